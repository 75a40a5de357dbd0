#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cospace/feature_space.hpp"
#include "cospace/types.hpp"

namespace cospace {

// Where a hard label came from: ground truth, or a mining selection
// (iteration of selection + confidence score). The distinction feeds the
// sift rule and evaluation; propagation treats both the same.
struct PseudoLabelInfo {
    int iteration = 0;
    double confidence = 0.0;
};

struct LabelEntry {
    int class_index = 0;
    std::optional<PseudoLabelInfo> provenance;  // nullopt = ground truth
};

// One selected sample: the unit augment() consumes.
struct PseudoLabel {
    SampleId id;
    int class_index = 0;
    double confidence = 0.0;
    int iteration = 0;
};

/// Labeled pool + unlabeled pool over a fixed sample universe.
/// Immutable; augment() returns a new value. The pools are disjoint and
/// their union covers the universe at all times.
class Partition {
public:
    Partition() = default;
    Partition(int num_classes, std::map<SampleId, LabelEntry> labeled, std::set<SampleId> unlabeled);

    int num_classes() const { return num_classes_; }
    const std::map<SampleId, LabelEntry>& labeled() const { return labeled_; }
    const std::set<SampleId>& unlabeled() const { return unlabeled_; }

    std::size_t labeled_count() const { return labeled_.size(); }
    std::size_t unlabeled_count() const { return unlabeled_.size(); }
    std::size_t total() const { return labeled_.size() + unlabeled_.size(); }

    bool is_labeled(const SampleId& id) const { return labeled_.count(id) != 0; }
    bool contains(const SampleId& id) const { return is_labeled(id) || unlabeled_.count(id) != 0; }

    // Class index of a labeled sample; throws DataError for unlabeled/unknown ids.
    int class_of(const SampleId& id) const;

    // One-hot label vector of a labeled sample.
    Eigen::VectorXd label_vector(const SampleId& id) const;

    // Moves each selection into the labeled pool with its pseudo-label as a
    // hard one-hot. Throws DataError if a selection is not currently unlabeled.
    Partition augmented(const std::vector<PseudoLabel>& selections) const;

private:
    int num_classes_ = 0;
    std::map<SampleId, LabelEntry> labeled_;
    std::set<SampleId> unlabeled_;
};

// Joins a labeled-id map onto a feature space's sample universe; everything
// not labeled becomes unlabeled. Throws DataError for labels whose id is not
// in the space.
Partition make_partition(const FeatureSpace& universe, const std::map<SampleId, int>& labels,
                         int num_classes);

// -- file formats -----------------------------------------------------------
//
// Feature file (canonical text): header `#cospace-features v1 n=<n> d=<d>`,
// then n lines `id<TAB>f1<TAB>...<TAB>fd`, LF endings. Floats are written in
// shortest round-trip decimal form, so canonical files reload bit-exactly.
// Label file: lines `id<TAB>class_index` (0-based).
// Pseudo-label file: lines `id<TAB>class_index<TAB>confidence<TAB>iteration`.

FeatureSpace load_features(const std::string& path);
FeatureSpace read_features(std::istream& in, const std::string& origin);

void save_features(const FeatureSpace& space, const std::string& path);
void write_features(const FeatureSpace& space, std::ostream& out);

std::map<SampleId, int> load_labels(const std::string& path, int num_classes);
std::map<SampleId, int> read_labels(std::istream& in, int num_classes, const std::string& origin);

void write_pseudo_labels(const std::vector<PseudoLabel>& rows, std::ostream& out);
void save_pseudo_labels(const std::vector<PseudoLabel>& rows, const std::string& path);
std::vector<PseudoLabel> load_pseudo_labels(const std::string& path, int num_classes);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict double parse; rejects trailing garbage and non-finite values.
double parse_double(const std::string& token, const std::string& context);

}  // namespace cospace
