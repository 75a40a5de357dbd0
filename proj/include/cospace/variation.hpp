#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "cospace/dataset.hpp"
#include "cospace/feature_space.hpp"

namespace cospace {

// Labeled samples nearest to one query, grouped by class. Members keep their
// nearest-first order.
using ClassNeighborhood = std::map<int, std::vector<SampleId>>;

/// Covariance of the labeled neighbors of one class around a query sample,
/// with the query itself folded in at weight k. Regularized by a relative
/// ridge so the determinant is always positive.
struct LocalCovariance {
    Eigen::MatrixXd sigma;
    int class_id = -1;
    SampleId center_sample;
    int neighbor_count = 0;
    double k_weight = 0.0;
};

/// Diagonal class-reweighting matrix for one unlabeled sample: kappa weights
/// over the top-s support classes, zero elsewhere. The diagonal sums to 1
/// whenever the support is non-empty.
struct TransformationMatrix {
    Eigen::VectorXd diag;       // length m
    std::vector<int> support;   // ascending class indices, |support| <= s
};

struct VariationParams {
    int max_labeled_neighbors = 300;  // N_max
    int top_s = 5;
    double k_weight = 1.0;
    // When true, both sides' covariances use the same member set (the
    // per-class intersection of the two neighborhoods) instead of each side's
    // own nearest labeled members.
    bool shared_members = false;
};

// Ridge added to a raw local covariance: relative to its mean diagonal with
// an absolute floor. Exposed so tests can reproduce regularized values.
double covariance_ridge(const Eigen::MatrixXd& raw_sigma);

// The N_max labeled samples nearest to `sample` in `space`, grouped by class.
// Ties on distance break by ascending sample id. Throws DataError when the
// partition has no labeled samples.
ClassNeighborhood labeled_neighborhood(const FeatureSpace& space, const SampleId& sample,
                                       const Partition& partition, int max_labeled_neighbors);

// Classes present in both neighborhoods, ranked by combined member count
// (ties by ascending class index), truncated to the top s. Returned in
// ascending class order. Empty when the intersection is empty.
std::vector<int> top_s_classes(const ClassNeighborhood& before, const ClassNeighborhood& after,
                               int s);

// Weighted local covariance around `sample`:
//   mu    = (k * f(x) + sum members) / (|N| + k)
//   sigma = [k (f(x)-mu)(f(x)-mu)^T + sum (x'-mu)(x'-mu)^T] / (|N| + k - 1)
// plus the ridge. Requires |members| + k_weight > 1.
LocalCovariance local_covariance(const FeatureSpace& space, const SampleId& sample,
                                 const std::vector<SampleId>& members, double k_weight);

// Distance in [0, 1] between two zero-mean Gaussians with the given
// covariances, computed in the log-determinant domain:
//   rho = sqrt(1 - exp(ln|Sb|/4 + ln|Sa|/4 - ln|(Sb+Sa)/2|/2))
// Throws DataError if either matrix is not positive definite.
double hellinger(const Eigen::MatrixXd& sigma_b, const Eigen::MatrixXd& sigma_a);
double hellinger(const LocalCovariance& sigma_b, const LocalCovariance& sigma_a);

// exp(-rho) normalized over the support classes, assembled into the diagonal.
// `rho_by_class` must be non-empty with distinct class indices below
// num_classes.
TransformationMatrix kappa_weights(const std::vector<std::pair<int, double>>& rho_by_class,
                                   int num_classes);

// Full per-sample pipeline: neighborhoods on both sides, top-s support,
// per-class covariances, Hellinger distances, kappa. Returns nullopt when the
// sample has no usable support this iteration (empty intersection, or every
// support class lacks enough members for a covariance). A single-class
// neighborhood yields a one-hot weight: the confidence is then 1.0 with the
// label pinned to that class — unanimous-census labeling.
std::optional<TransformationMatrix> transformation_matrix(const CoSpace& cs, const SampleId& sample,
                                                          const Partition& partition,
                                                          const VariationParams& params);

namespace detail {

// Snapshot of the labeled pool in one feature space, in space row order.
// Shared between the per-sample public entry points and the batched mining
// path so both select neighbors and build covariances identically.
struct LabeledIndex {
    LabeledIndex(const FeatureSpace& space, const Partition& partition);

    Eigen::MatrixXd features;              // n_l x D
    std::vector<Eigen::Index> space_rows;  // row in the source space
    std::vector<SampleId> ids;
    std::vector<int> classes;
};

// Reusable buffers for the per-sample pipeline; one per worker thread.
struct VariationScratch {
    std::vector<Eigen::Index> candidates;
    Eigen::VectorXd sq_dists;
    Eigen::MatrixXd gather;
};

// Indices (into LabeledIndex order) of the n_max labeled samples nearest to
// space row `query_row`, sorted by (distance, id). Result lands in
// scratch.candidates.
void nearest_labeled(const LabeledIndex& labeled, const FeatureSpace& space,
                     Eigen::Index query_row, int n_max, VariationScratch& scratch);

// transformation_matrix() over prebuilt labeled indexes; `sample_row` is the
// query's row in both (aligned) spaces.
std::optional<TransformationMatrix> transformation_matrix_at(
    const CoSpace& cs, const LabeledIndex& labeled_before, const LabeledIndex& labeled_after,
    Eigen::Index sample_row, const VariationParams& params, int num_classes,
    VariationScratch& scratch);

}  // namespace detail

}  // namespace cospace
