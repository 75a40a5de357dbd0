#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cospace/feature_space.hpp"

namespace cospace {

/// Exact K-nearest-neighbor index over one feature space. For every sample,
/// its K neighbors sorted by ascending Euclidean distance, ties by ascending
/// sample id; a sample never lists itself.
class KnnIndex {
public:
    KnnIndex() = default;
    KnnIndex(Eigen::Index n, int k) : n_(n), k_(k), neighbor_(n * k), distance_(n * k) {}

    Eigen::Index size() const { return n_; }
    int k() const { return k_; }

    Eigen::Index neighbor(Eigen::Index row, int j) const { return neighbor_[row * k_ + j]; }
    double distance(Eigen::Index row, int j) const { return distance_[row * k_ + j]; }

    Eigen::Index& neighbor(Eigen::Index row, int j) { return neighbor_[row * k_ + j]; }
    double& distance(Eigen::Index row, int j) { return distance_[row * k_ + j]; }

private:
    Eigen::Index n_ = 0;
    int k_ = 0;
    std::vector<Eigen::Index> neighbor_;
    std::vector<double> distance_;
};

// Exact (non-approximate) kNN under Euclidean distance. Requires K < n.
// Output is identical for any thread count.
KnnIndex build_knn(const FeatureSpace& space, int k, int threads = 1);

namespace detail {

// Keeps the `keep` candidates with smallest (distance^2, id) from `candidates`,
// sorted ascending. Shared by the graph build and the labeled-neighborhood
// search so both use the same tie-break.
void select_k_smallest(std::vector<Eigen::Index>& candidates, const Eigen::VectorXd& sq_dists,
                       const std::vector<SampleId>& ids, std::size_t keep);

}  // namespace detail

}  // namespace cospace
