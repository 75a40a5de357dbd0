#pragma once

#include <iosfwd>
#include <vector>

#include "cospace/knn.hpp"

namespace cospace {

/// Sparse row-stochastic n x n matrix over a kNN graph. Row i holds, for
/// each of i's neighbors, the probability of stepping there; every row sums
/// to 1. Entries come from a Gaussian-style kernel exp(-d^2 / (mu * sigma_i^2))
/// with a per-sample bandwidth sigma_i = bandwidth_scale * (mean distance from
/// i to its K neighbors), normalized over the row.
class TransitionMatrix {
public:
    TransitionMatrix() = default;

    Eigen::Index size() const { return static_cast<Eigen::Index>(offsets_.size()) - 1; }
    int k() const { return k_; }
    double mu() const { return mu_; }
    double bandwidth_scale() const { return bandwidth_scale_; }

    // Raw per-sample mean-kNN distance (before bandwidth scaling).
    const std::vector<double>& sigma() const { return sigma_; }

    std::size_t row_begin(Eigen::Index row) const { return offsets_[row]; }
    std::size_t row_end(Eigen::Index row) const { return offsets_[row + 1]; }
    Eigen::Index col(std::size_t pos) const { return cols_[pos]; }
    double value(std::size_t pos) const { return values_[pos]; }

    // Coordinate text dump: one `i<TAB>j<TAB>value` line per nonzero,
    // row-major. Indices refer to the source space's row order.
    void dump(std::ostream& out) const;

private:
    friend TransitionMatrix build_transition(const FeatureSpace&, const KnnIndex&, double, double);

    int k_ = 0;
    double mu_ = 0.0;
    double bandwidth_scale_ = 1.0;
    std::vector<double> sigma_;
    std::vector<std::size_t> offsets_;
    std::vector<Eigen::Index> cols_;
    std::vector<double> values_;
};

// Builds the transition matrix from a kNN index over the same space.
// bandwidth_scale multiplies every sigma_i before the kernel is applied.
// Rows whose sigma_i is zero (all K neighbors coincide with the sample)
// borrow the smallest positive sigma in the dataset; if every sigma is zero
// the geometry is degenerate and a DataError is thrown.
TransitionMatrix build_transition(const FeatureSpace& space, const KnnIndex& knn, double mu,
                                  double bandwidth_scale = 1.0);

}  // namespace cospace
