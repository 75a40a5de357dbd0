#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

#include "cospace/types.hpp"

namespace cospace {

/// An immutable n x D embedding of a sample set, one row per sample id.
/// Row order is significant and preserved through file round trips.
class FeatureSpace {
public:
    FeatureSpace() = default;

    // Validates: |ids| == rows, ids unique and non-empty, all values finite.
    FeatureSpace(std::vector<SampleId> ids, Eigen::MatrixXd features);

    Eigen::Index size() const { return features_.rows(); }
    Eigen::Index dim() const { return features_.cols(); }

    const std::vector<SampleId>& ids() const { return ids_; }
    const Eigen::MatrixXd& matrix() const { return features_; }

    bool contains(const SampleId& id) const { return index_.count(id) != 0; }

    // Throws DataError if the id is unknown.
    Eigen::Index row_of(const SampleId& id) const;

    Eigen::RowVectorXd row(const SampleId& id) const { return features_.row(row_of(id)); }

private:
    std::vector<SampleId> ids_;
    Eigen::MatrixXd features_;
    std::unordered_map<SampleId, Eigen::Index> index_;
};

/// A pair of feature spaces over the same sample ids: the embedding of the
/// dataset before and after one model update. After construction via
/// make_cospace both sides share the before-side row order.
struct CoSpace {
    FeatureSpace before;
    FeatureSpace after;
};

// Builds a CoSpace, re-ordering `after`'s rows to match `before`'s id order.
// Throws DataError if the id sets differ. Dimensions may differ.
CoSpace make_cospace(FeatureSpace before, FeatureSpace after);

}  // namespace cospace
