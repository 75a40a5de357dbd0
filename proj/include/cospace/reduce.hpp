#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "cospace/feature_space.hpp"

namespace cospace {

enum class ReduceMethod { pca, random_projection, identity };

ReduceMethod parse_reduce_method(const std::string& name);  // throws ConfigError
std::string to_string(ReduceMethod method);

// Extra facts about a reduction, mainly for logging and tests.
struct ReduceInfo {
    int rank = 0;                // numeric rank found by pca (0 for other methods)
    bool rank_deficient = false; // pca had fewer informative directions than target_dim
};

/// Fitted principal-component model. Projection directions are orthonormal,
/// ordered by descending variance, with each direction's sign fixed so its
/// largest-magnitude coordinate is positive. Directions beyond the numeric
/// rank are zeroed, so rank-deficient data projects to zero in those
/// components instead of noise.
struct PcaModel {
    Eigen::RowVectorXd mean;      // 1 x D
    Eigen::MatrixXd components;   // D x target_dim, columns = directions
    Eigen::VectorXd variances;    // target_dim, descending
    int rank = 0;

    Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const {
        return (rows.rowwise() - mean) * components;
    }
};

// Requires n >= 2 and 1 <= target_dim <= D.
PcaModel fit_pca(const Eigen::MatrixXd& rows, int target_dim);

// Projects `space` down to target_dim dimensions. Deterministic given
// (space, target_dim, method, seed); the seed only matters for
// random_projection. identity keeps the leading target_dim coordinates.
FeatureSpace reduce(const FeatureSpace& space, int target_dim, ReduceMethod method,
                    std::uint64_t seed, ReduceInfo* info = nullptr);

// Reduces each side independently (each side fitted on its own data) with the
// same seed, so identical sides stay identical.
CoSpace reduce_cospace(const CoSpace& cs, int target_dim, ReduceMethod method, std::uint64_t seed,
                       ReduceInfo* info_before = nullptr, ReduceInfo* info_after = nullptr);

}  // namespace cospace
