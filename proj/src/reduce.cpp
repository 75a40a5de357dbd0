#include "cospace/reduce.hpp"

#include <cmath>
#include <random>

namespace cospace {

ReduceMethod parse_reduce_method(const std::string& name) {
    if (name == "pca") return ReduceMethod::pca;
    if (name == "random-projection") return ReduceMethod::random_projection;
    if (name == "identity") return ReduceMethod::identity;
    throw ConfigError("unknown reduce method '" + name +
                      "' (expected pca, random-projection, or identity)");
}

std::string to_string(ReduceMethod method) {
    switch (method) {
        case ReduceMethod::pca: return "pca";
        case ReduceMethod::random_projection: return "random-projection";
        case ReduceMethod::identity: return "identity";
    }
    return "?";
}

PcaModel fit_pca(const Eigen::MatrixXd& rows, int target_dim) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    if (n < 2) throw DataError("pca: need at least 2 rows");
    if (target_dim < 1 || target_dim > d) {
        throw DataError("pca: target_dim " + std::to_string(target_dim) + " out of range [1," +
                        std::to_string(d) + "]");
    }

    PcaModel model;
    model.mean = rows.colwise().mean();
    Eigen::MatrixXd centered = rows.rowwise() - model.mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DataError("pca: eigendecomposition failed");
    // Eigen returns ascending eigenvalues; we want descending.
    const Eigen::VectorXd& evals = solver.eigenvalues();
    const Eigen::MatrixXd& evecs = solver.eigenvectors();

    model.components = Eigen::MatrixXd::Zero(d, target_dim);
    model.variances = Eigen::VectorXd::Zero(target_dim);
    const double top = std::max(evals(d - 1), 0.0);
    const double tol = top * 1e-12;
    model.rank = 0;
    for (int k = 0; k < target_dim; ++k) {
        const Eigen::Index src = d - 1 - k;
        const double lambda = evals(src);
        if (lambda <= tol) break;  // remaining directions are numeric noise; leave zero
        Eigen::VectorXd dir = evecs.col(src);
        // Sign convention: largest-magnitude coordinate positive.
        Eigen::Index imax = 0;
        dir.cwiseAbs().maxCoeff(&imax);
        if (dir(imax) < 0) dir = -dir;
        model.components.col(k) = dir;
        model.variances(k) = lambda;
        ++model.rank;
    }
    return model;
}

namespace {

Eigen::MatrixXd gaussian_projection(Eigen::Index d, int target_dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(target_dim));
    Eigen::MatrixXd proj(d, target_dim);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (int j = 0; j < target_dim; ++j) {
            proj(i, j) = gauss(rng) * scale;
        }
    }
    return proj;
}

}  // namespace

FeatureSpace reduce(const FeatureSpace& space, int target_dim, ReduceMethod method,
                    std::uint64_t seed, ReduceInfo* info) {
    if (target_dim < 1) throw ConfigError("reduce: target_dim must be positive");
    if (target_dim > space.dim()) {
        throw DataError("reduce: target_dim " + std::to_string(target_dim) +
                        " exceeds space dimension " + std::to_string(space.dim()));
    }
    if (info) *info = ReduceInfo{};

    switch (method) {
        case ReduceMethod::identity: {
            if (target_dim == space.dim()) return space;
            return FeatureSpace(space.ids(), space.matrix().leftCols(target_dim));
        }
        case ReduceMethod::random_projection: {
            Eigen::MatrixXd proj = gaussian_projection(space.dim(), target_dim, seed);
            return FeatureSpace(space.ids(), space.matrix() * proj);
        }
        case ReduceMethod::pca: {
            PcaModel model = fit_pca(space.matrix(), target_dim);
            if (info) {
                info->rank = model.rank;
                info->rank_deficient = model.rank < target_dim;
            }
            return FeatureSpace(space.ids(), model.transform(space.matrix()));
        }
    }
    throw ConfigError("reduce: unknown method");
}

CoSpace reduce_cospace(const CoSpace& cs, int target_dim, ReduceMethod method, std::uint64_t seed,
                       ReduceInfo* info_before, ReduceInfo* info_after) {
    FeatureSpace before = reduce(cs.before, target_dim, method, seed, info_before);
    FeatureSpace after = reduce(cs.after, target_dim, method, seed, info_after);
    return CoSpace{std::move(before), std::move(after)};
}

}  // namespace cospace
