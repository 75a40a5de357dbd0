#include "cospace/knn.hpp"

#include <algorithm>
#include <cmath>

#include "cospace/parallel.hpp"

namespace cospace {

namespace detail {

void select_k_smallest(std::vector<Eigen::Index>& candidates, const Eigen::VectorXd& sq_dists,
                       const std::vector<SampleId>& ids, std::size_t keep) {
    auto closer = [&](Eigen::Index a, Eigen::Index b) {
        if (sq_dists(a) != sq_dists(b)) return sq_dists(a) < sq_dists(b);
        return ids[a] < ids[b];
    };
    if (keep < candidates.size()) {
        std::nth_element(candidates.begin(), candidates.begin() + keep, candidates.end(), closer);
        candidates.resize(keep);
    }
    std::sort(candidates.begin(), candidates.end(), closer);
}

}  // namespace detail

KnnIndex build_knn(const FeatureSpace& space, int k, int threads) {
    const Eigen::Index n = space.size();
    if (k < 1) throw ConfigError("knn: K must be positive");
    if (k >= n) {
        throw DataError("knn: K=" + std::to_string(k) + " must be smaller than n=" +
                        std::to_string(n));
    }

    const Eigen::MatrixXd& x = space.matrix();
    const Eigen::VectorXd sq_norms = x.rowwise().squaredNorm();
    KnnIndex index(n, k);

    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t begin, std::size_t end) {
        // Blocked distance computation: d^2(i,j) = |x_i|^2 + |x_j|^2 - 2 x_i.x_j,
        // with the inner products done as one matrix product per block.
        constexpr std::size_t kBlock = 256;
        Eigen::MatrixXd gram;
        Eigen::VectorXd row_sq(n);
        std::vector<Eigen::Index> candidates;
        candidates.reserve(n - 1);
        for (std::size_t b = begin; b < end; b += kBlock) {
            const std::size_t stop = std::min(b + kBlock, end);
            const Eigen::Index rows = static_cast<Eigen::Index>(stop - b);
            gram.noalias() = x.middleRows(static_cast<Eigen::Index>(b), rows) * x.transpose();
            for (Eigen::Index r = 0; r < rows; ++r) {
                const Eigen::Index i = static_cast<Eigen::Index>(b) + r;
                row_sq = (sq_norms.array() + sq_norms(i) - 2.0 * gram.row(r).transpose().array())
                             .cwiseMax(0.0);
                candidates.clear();
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (j != i) candidates.push_back(j);
                }
                detail::select_k_smallest(candidates, row_sq, space.ids(), k);
                for (int j = 0; j < k; ++j) {
                    index.neighbor(i, j) = candidates[j];
                    index.distance(i, j) = std::sqrt(row_sq(candidates[j]));
                }
            }
        }
    });
    return index;
}

}  // namespace cospace
