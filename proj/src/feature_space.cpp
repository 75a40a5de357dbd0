#include "cospace/feature_space.hpp"

#include <utility>

namespace cospace {

FeatureSpace::FeatureSpace(std::vector<SampleId> ids, Eigen::MatrixXd features)
    : ids_(std::move(ids)), features_(std::move(features)) {
    if (static_cast<Eigen::Index>(ids_.size()) != features_.rows()) {
        throw DataError("feature space: id count (" + std::to_string(ids_.size()) +
                        ") does not match row count (" + std::to_string(features_.rows()) + ")");
    }
    index_.reserve(ids_.size());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(ids_.size()); ++i) {
        if (ids_[i].empty()) {
            throw DataError("feature space: empty sample id at row " + std::to_string(i));
        }
        if (!index_.emplace(ids_[i], i).second) {
            throw DataError("feature space: duplicate sample id '" + ids_[i] + "'");
        }
    }
    if (!features_.allFinite()) {
        throw DataError("feature space: non-finite value");
    }
}

Eigen::Index FeatureSpace::row_of(const SampleId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw DataError("feature space: unknown sample id '" + id + "'");
    }
    return it->second;
}

CoSpace make_cospace(FeatureSpace before, FeatureSpace after) {
    if (before.size() != after.size()) {
        throw DataError("co-space: sides have different sample counts (" +
                        std::to_string(before.size()) + " vs " + std::to_string(after.size()) + ")");
    }
    bool aligned = true;
    for (Eigen::Index i = 0; i < before.size(); ++i) {
        if (!after.contains(before.ids()[i])) {
            throw DataError("co-space: id '" + before.ids()[i] + "' missing from after-side");
        }
        if (after.ids()[i] != before.ids()[i]) aligned = false;
    }
    if (aligned) {
        return CoSpace{std::move(before), std::move(after)};
    }
    Eigen::MatrixXd reordered(after.size(), after.dim());
    for (Eigen::Index i = 0; i < before.size(); ++i) {
        reordered.row(i) = after.matrix().row(after.row_of(before.ids()[i]));
    }
    FeatureSpace aligned_after(before.ids(), std::move(reordered));
    return CoSpace{std::move(before), std::move(aligned_after)};
}

}  // namespace cospace
