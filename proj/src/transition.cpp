#include "cospace/transition.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "cospace/dataset.hpp"

namespace cospace {

TransitionMatrix build_transition(const FeatureSpace& space, const KnnIndex& knn, double mu,
                                  double bandwidth_scale) {
    const Eigen::Index n = knn.size();
    if (n != space.size()) {
        throw DataError("transition: knn index was built over a different space");
    }
    if (mu <= 0.0) throw ConfigError("transition: mu must be positive");
    if (bandwidth_scale <= 0.0) throw ConfigError("transition: bandwidth scale must be positive");
    const int k = knn.k();

    std::vector<double> sigma(n);
    double min_positive = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double mean = 0.0;
        for (int j = 0; j < k; ++j) mean += knn.distance(i, j);
        mean /= k;
        sigma[i] = mean;
        if (mean > 0.0) min_positive = std::min(min_positive, mean);
    }
    if (!std::isfinite(min_positive)) {
        throw DataError("transition: degenerate geometry (all pairwise distances zero)");
    }

    TransitionMatrix p;
    p.k_ = k;
    p.mu_ = mu;
    p.bandwidth_scale_ = bandwidth_scale;
    p.sigma_ = sigma;
    p.offsets_.assign(n + 1, 0);
    p.cols_.reserve(n * k);
    p.values_.reserve(n * k);

    // Entries this small would turn the row sum into 0/0; drop them and
    // renormalize the survivors.
    constexpr double kUnderflowFloor = 1e-300;

    std::vector<double> weights(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = (sigma[i] > 0.0 ? sigma[i] : min_positive) * bandwidth_scale;
        const double denom = mu * s * s;
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            const double d = knn.distance(i, j);
            double w = std::exp(-(d * d) / denom);
            if (w < kUnderflowFloor) w = 0.0;
            weights[j] = w;
            sum += w;
        }
        if (sum <= 0.0) {
            // The whole row underflowed; in the sharp-kernel limit all mass
            // goes to the nearest neighbor.
            weights.assign(k, 0.0);
            weights[0] = 1.0;
            sum = 1.0;
        }
        // Kernel normalization over the row, then the row-stochastic pass.
        double renorm = 0.0;
        for (int j = 0; j < k; ++j) {
            weights[j] /= sum;
            renorm += weights[j];
        }
        for (int j = 0; j < k; ++j) {
            const double value = weights[j] / renorm;
            if (value > 0.0) {
                p.cols_.push_back(knn.neighbor(i, j));
                p.values_.push_back(value);
            }
        }
        p.offsets_[i + 1] = p.cols_.size();
    }
    return p;
}

void TransitionMatrix::dump(std::ostream& out) const {
    for (Eigen::Index i = 0; i < size(); ++i) {
        for (std::size_t pos = row_begin(i); pos < row_end(i); ++pos) {
            out << i << '\t' << cols_[pos] << '\t' << format_double(values_[pos]) << '\n';
        }
    }
}

}  // namespace cospace
