#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cospace/dataset.hpp"
#include "cospace/mining.hpp"
#include "cospace/provider.hpp"

namespace cospace {

/// Parameters of the synthetic feature-transformation sequence. Iteration t
/// draws every sample as class-center * separation_schedule[t] plus fresh
/// Gaussian noise, rotated by rotation_schedule[t] in a fixed random frame.
/// An outlier_fraction of samples migrate: their centers slide from their
/// true class toward another class across the sequence, which is what a
/// criterion ignoring the feature transformation tends to mislabel.
struct DriftScenario {
    int num_classes = 5;
    int samples_per_class = 200;
    int dim = 15;
    double labeled_fraction = 0.1;
    std::vector<double> separation_schedule;  // one entry per emitted space
    std::vector<double> rotation_schedule;    // radians, same length
    double noise_sigma = 1.0;
    double outlier_fraction = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const DriftScenario&) const = default;
};

// Throws ConfigError on empty/mismatched schedules or out-of-range fields.
void validate(const DriftScenario& scenario);

// The scenario every regression baseline is pinned against; mirrored by the
// checked-in scenarios/default.cfg.
DriftScenario default_scenario();

// Line-based `key = value` file; `#` lines and blank lines are skipped.
// Schedules are comma-separated. Unknown keys are errors.
DriftScenario read_scenario(std::istream& in, const std::string& origin);
DriftScenario load_scenario(const std::string& path);

/// True class of every generated sample; fixed across the whole sequence.
struct GroundTruth {
    std::map<SampleId, int> classes;

    // Throws DataError for unknown ids.
    int class_of(const SampleId& id) const;
};

/// One generated dataset: the emitted feature spaces, the initial partition
/// (labeled pool drawn per class), and the true classes.
struct ScenarioData {
    std::shared_ptr<const std::vector<FeatureSpace>> spaces;
    Partition partition;
    GroundTruth truth;

    // A fresh provider over the shared spaces; cheap, so paired runs can
    // consume identical data.
    MemorySequenceProvider make_provider() const { return MemorySequenceProvider(spaces); }
};

// Deterministic for a given scenario. Throws ConfigError when the labeled
// fraction cannot give every class at least one labeled sample.
ScenarioData generate(const DriftScenario& scenario);

// Per-iteration fraction of selections whose pseudo-label matches the truth;
// nullopt for iterations that selected nothing.
std::vector<std::optional<double>> evaluate(const std::vector<MiningResult>& results,
                                            const GroundTruth& truth);

struct ComparisonRow {
    int iteration = 0;
    std::optional<double> accuracy_full;
    std::optional<double> accuracy_ablation;
    std::size_t count_full = 0;
    std::size_t count_ablation = 0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

// Paired ablation study: generates the data once, runs the mining loop with
// the full criterion and with the plain-cosine ablation on identical inputs,
// and tabulates per-iteration accuracy and selection counts.
ComparisonTable compare_criteria(const DriftScenario& scenario, const MiningConfig& cfg);

// `iteration,acc_full,acc_ablation,count_full,count_ablation`; empty cells
// for iterations with no selections.
void write_comparison_csv(const ComparisonTable& table, std::ostream& out);

// Whitespace-separated columns for plotting; missing accuracies become `?`
// (use `set datafile missing "?"`).
void write_comparison_gnuplot(const ComparisonTable& table, std::ostream& out);

}  // namespace cospace
