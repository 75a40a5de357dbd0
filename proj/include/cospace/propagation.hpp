#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cospace/dataset.hpp"
#include "cospace/transition.hpp"

namespace cospace {

/// Soft labels produced by clamped label propagation. Labeled rows equal their
/// one-hot ground truth exactly; unlabeled rows hold the propagated mass,
/// which sums to at most 1. Rows that received (almost) no mass after the
/// final iteration are "unreached" and normalized_row() returns nullopt for
/// them.
class SoftLabels {
public:
    SoftLabels() = default;
    SoftLabels(std::vector<SampleId> ids, Eigen::MatrixXd rows, std::vector<char> labeled_mask,
               int iterations_run);

    Eigen::Index size() const { return rows_.rows(); }
    int num_classes() const { return static_cast<int>(rows_.cols()); }
    int iterations_run() const { return iterations_run_; }

    const std::vector<SampleId>& ids() const { return ids_; }
    const Eigen::MatrixXd& matrix() const { return rows_; }

    Eigen::Index row_of(const SampleId& id) const;
    Eigen::RowVectorXd row(const SampleId& id) const { return rows_.row(row_of(id)); }
    bool is_labeled_row(const SampleId& id) const { return labeled_mask_[row_of(id)] != 0; }

    // True when the row's total mass is below the reachability floor.
    bool is_unreached(const SampleId& id) const;

    // Row rescaled to a probability vector, or nullopt if unreached.
    std::optional<Eigen::VectorXd> normalized_row(const SampleId& id) const;

    // `sample_id<TAB>p_0<TAB>...<TAB>p_{m-1}` per row, in row order.
    void dump(std::ostream& out) const;

    static constexpr double kReachFloor = 1e-12;

private:
    std::vector<SampleId> ids_;
    Eigen::MatrixXd rows_;
    std::vector<char> labeled_mask_;
    int iterations_run_ = 0;
    std::unordered_map<SampleId, Eigen::Index> index_;
};

struct PropagationParams {
    int knn = 10;
    double mu = 1.0;
    double delta = 0.9;  // bandwidth scale on the per-sample sigma
    int iterations = 50;
    double stop_tol = 0.0;  // > 0 enables early stop on max elementwise delta
    int threads = 1;
};

// Runs T iterations of multiply-then-clamp from Y_0 = [Y^L; 0]. `ids` gives
// the row order P was built over; it must cover exactly the partition's
// sample set. With stop_tol > 0 the loop stops once an iteration changes no
// entry by more than stop_tol.
SoftLabels propagate(const TransitionMatrix& p, const std::vector<SampleId>& ids,
                     const Partition& partition, int iterations, double stop_tol = 0.0,
                     int threads = 1);

// Builds the graph and propagates on each co-space side; both runs are
// clamped to the same ground truth. Sides must have been reduced to equal
// dimension. Returns (before-side, after-side) soft labels.
std::pair<SoftLabels, SoftLabels> intrinsic_variation(const CoSpace& cs, const Partition& partition,
                                                      const PropagationParams& params);

}  // namespace cospace
