#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cospace/dataset.hpp"
#include "cospace/feature_space.hpp"
#include "cospace/provider.hpp"
#include "cospace/reduce.hpp"
#include "cospace/variation.hpp"

namespace cospace {

// Which selection score to use: the class-reweighted agreement score, or the
// plain cosine between the raw soft labels (its identity-matrix ablation).
enum class Criterion { full, ablation };

Criterion parse_criterion(const std::string& name);  // throws ConfigError
std::string to_string(Criterion criterion);

/// Mining score of one unlabeled sample. `contribution` is the per-class
/// Hadamard product of the two reweighted, renormalized soft labels; its sum
/// is the score and its argmax the pseudo-label.
struct Confidence {
    SampleId sample;
    double score = 0.0;
    Eigen::VectorXd contribution;  // length m
    int pseudo_label = -1;
    Criterion criterion = Criterion::full;
};

/// One iteration's accepted selections, sorted by descending score with ties
/// by ascending id. Diagnostics count what the iteration looked at: scored =
/// samples that produced a score, unminable = skipped ones (unreached by
/// propagation, empty class support, or no soft-label mass on the support).
struct MiningResult {
    std::vector<Confidence> selections;
    int iteration = 0;
    double threshold_used = 0.0;
    int cap_used = 0;
    std::size_t scored = 0;
    std::size_t unminable = 0;
};

struct MiningConfig {
    int knn = 10;                     // neighbors per sample in the graph
    double mu = 1.0;                  // kernel bandwidth multiplier
    double delta = 0.9;               // bandwidth scale on per-sample sigma
    int lp_iterations = 50;
    double lp_stop_tol = 0.0;         // > 0 enables early stop
    int max_labeled_neighbors = 300;  // N_max
    int top_s = 5;
    double k_weight = 1.0;
    int reduce_dim = 15;
    ReduceMethod reduce_method = ReduceMethod::pca;
    double threshold = 0.7;
    int cap = 1000;            // max selections per iteration
    int max_iterations = 1000; // loop bound; the provider usually runs out first
    std::uint64_t seed = 0;
    int threads = 1;
    Criterion criterion = Criterion::full;
    bool shared_members = false;
};

// Throws ConfigError on any out-of-range field.
void validate(const MiningConfig& cfg);

// Reweighted agreement score between the two soft labels of one sample:
//   r = sqrt(M) y / |sqrt(M) y|,  score = r_b . r_a,  contribution = r_b o r_a
// Inputs must be probability vectors matching M's diagonal length. Returns
// nullopt when either side has no mass on m's support (unminable this
// iteration). Throws DataError for empty support.
std::optional<Confidence> confidence(const Eigen::VectorXd& y_b, const Eigen::VectorXd& y_a,
                                     const TransformationMatrix& m);

// Plain cosine between the two soft labels; pseudo-label is the Hadamard
// argmax. Throws DataError on a zero vector.
Confidence confidence_ablation(const Eigen::VectorXd& y_b, const Eigen::VectorXd& y_a);

// Keeps scores >= threshold whose sample is not excluded, sorted descending
// (ties by ascending id), truncated to cap.
MiningResult select(std::vector<Confidence> scores, double threshold, int cap,
                    const std::set<SampleId>& excluded);

// One full mining pass over a co-space: reduce both sides, propagate labels
// on each, score every unlabeled sample, select. `excluded` holds previously
// selected ids (the sift rule). Deterministic for any cfg.threads.
MiningResult mine_iteration(const CoSpace& cs, const Partition& partition, const MiningConfig& cfg,
                            const std::set<SampleId>& excluded);

// Selections as pseudo-label records, carrying the result's iteration.
std::vector<PseudoLabel> to_pseudo_labels(const MiningResult& result);

struct LoopOutput {
    std::vector<MiningResult> results;
    Partition partition;  // initial partition plus every accepted selection
};

// The iterative loop: consecutive provider spaces (t-1, t) form iteration t's
// co-space; each iteration mines, augments the partition, and extends the
// sift set. Stops after cfg.max_iterations or when the provider runs out.
// Requires at least two spaces unless max_iterations is 0.
LoopOutput run_loop(FeatureProvider& provider, const Partition& initial, const MiningConfig& cfg);

}  // namespace cospace
