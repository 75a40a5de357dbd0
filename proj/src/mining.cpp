#include "cospace/mining.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "cospace/parallel.hpp"
#include "cospace/propagation.hpp"

namespace cospace {

namespace {

// Minimum weighted soft-label norm that still counts as real signal; values
// below it are indistinguishable from the propagation reachability floor.
constexpr double kMassFloor = 1e-9;

// The soft labels feeding a score must be probability vectors.
void check_probability(const Eigen::VectorXd& y, const char* side) {
    if (y.size() == 0) throw DataError(std::string("confidence: empty ") + side + " vector");
    if (y.minCoeff() < -1e-9)
        throw DataError(std::string("confidence: negative entry in ") + side + " vector");
    if (std::abs(y.sum() - 1.0) > 1e-9)
        throw DataError(std::string("confidence: ") + side + " vector is not normalized");
}

int hadamard_argmax(const Eigen::VectorXd& v) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(v.size()); ++j)
        if (v[j] > v[best]) best = j;
    return best;
}

}  // namespace

Criterion parse_criterion(const std::string& name) {
    if (name == "full") return Criterion::full;
    if (name == "ablation") return Criterion::ablation;
    throw ConfigError("unknown criterion '" + name + "' (expected full or ablation)");
}

std::string to_string(Criterion criterion) {
    return criterion == Criterion::full ? "full" : "ablation";
}

void validate(const MiningConfig& cfg) {
    if (cfg.knn < 1) throw ConfigError("knn must be >= 1");
    if (!(cfg.mu > 0.0)) throw ConfigError("mu must be > 0");
    if (!(cfg.delta > 0.0)) throw ConfigError("delta must be > 0");
    if (cfg.lp_iterations < 1) throw ConfigError("lp_iterations must be >= 1");
    if (cfg.lp_stop_tol < 0.0) throw ConfigError("lp_stop_tol must be >= 0");
    if (cfg.max_labeled_neighbors < 1) throw ConfigError("max_labeled_neighbors must be >= 1");
    if (cfg.top_s < 1) throw ConfigError("top_s must be >= 1");
    if (cfg.k_weight < 0.0) throw ConfigError("k_weight must be >= 0");
    if (cfg.reduce_dim < 1) throw ConfigError("reduce_dim must be >= 1");
    if (cfg.threshold < 0.0 || cfg.threshold > 1.0) throw ConfigError("threshold must be in [0,1]");
    if (cfg.cap < 1) throw ConfigError("cap must be >= 1");
    if (cfg.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

std::optional<Confidence> confidence(const Eigen::VectorXd& y_b, const Eigen::VectorXd& y_a,
                                     const TransformationMatrix& m) {
    check_probability(y_b, "before");
    check_probability(y_a, "after");
    if (m.support.empty()) throw DataError("confidence: transformation matrix has empty support");
    if (m.diag.size() != y_b.size() || m.diag.size() != y_a.size())
        throw DataError("confidence: transformation matrix size does not match label vectors");

    if (m.diag.minCoeff() < 0.0)
        throw DataError("confidence: negative transformation weight");
    const Eigen::VectorXd root = m.diag.cwiseSqrt();
    Eigen::VectorXd r_b = root.cwiseProduct(y_b);
    Eigen::VectorXd r_a = root.cwiseProduct(y_a);
    const double norm_b = r_b.norm();
    const double norm_a = r_a.norm();
    // Below kMassFloor the weighted vectors hold no real probability mass,
    // only propagation-floor residue; normalizing that residue would yield a
    // spurious near-1 score, so the sample is not minable on this support.
    if (norm_b < kMassFloor || norm_a < kMassFloor) return std::nullopt;
    r_b /= norm_b;
    r_a /= norm_a;

    Confidence out;
    out.criterion = Criterion::full;
    out.contribution = r_b.cwiseProduct(r_a);
    out.score = r_b.dot(r_a);
    out.pseudo_label = hadamard_argmax(out.contribution);
    return out;
}

Confidence confidence_ablation(const Eigen::VectorXd& y_b, const Eigen::VectorXd& y_a) {
    check_probability(y_b, "before");
    check_probability(y_a, "after");
    if (y_b.size() != y_a.size()) throw DataError("confidence: label vector sizes differ");
    const double norm_b = y_b.norm();
    const double norm_a = y_a.norm();
    if (norm_b == 0.0 || norm_a == 0.0) throw DataError("confidence: zero soft-label vector");

    Confidence out;
    out.criterion = Criterion::ablation;
    out.contribution = (y_b / norm_b).cwiseProduct(y_a / norm_a);
    out.score = out.contribution.sum();
    out.pseudo_label = hadamard_argmax(out.contribution);
    return out;
}

MiningResult select(std::vector<Confidence> scores, double threshold, int cap,
                    const std::set<SampleId>& excluded) {
    if (cap < 1) throw ConfigError("cap must be >= 1");
    MiningResult out;
    out.threshold_used = threshold;
    out.cap_used = cap;
    std::unordered_set<SampleId> seen;
    seen.reserve(scores.size());
    for (auto& c : scores) {
        if (!seen.insert(c.sample).second)
            throw DataError("select: duplicate sample id '" + c.sample + "'");
        if (c.score < threshold) continue;
        if (excluded.count(c.sample)) continue;
        out.selections.push_back(std::move(c));
    }
    std::sort(out.selections.begin(), out.selections.end(),
              [](const Confidence& x, const Confidence& y) {
                  if (x.score != y.score) return x.score > y.score;
                  return x.sample < y.sample;
              });
    if (out.selections.size() > static_cast<std::size_t>(cap))
        out.selections.resize(static_cast<std::size_t>(cap));
    return out;
}

MiningResult mine_iteration(const CoSpace& cs, const Partition& partition, const MiningConfig& cfg,
                            const std::set<SampleId>& excluded) {
    validate(cfg);
    if (partition.unlabeled().empty()) {
        MiningResult out;
        out.threshold_used = cfg.threshold;
        out.cap_used = cfg.cap;
        return out;
    }

    const CoSpace reduced = reduce_cospace(cs, cfg.reduce_dim, cfg.reduce_method, cfg.seed);

    PropagationParams lp;
    lp.knn = cfg.knn;
    lp.mu = cfg.mu;
    lp.delta = cfg.delta;
    lp.iterations = cfg.lp_iterations;
    lp.stop_tol = cfg.lp_stop_tol;
    lp.threads = cfg.threads;
    const auto [soft_before, soft_after] = intrinsic_variation(reduced, partition, lp);

    // Unlabeled samples in row order; every row must belong to the partition.
    const auto& ids = reduced.before.ids();
    std::vector<Eigen::Index> rows;
    rows.reserve(partition.unlabeled_count());
    for (Eigen::Index i = 0; i < reduced.before.size(); ++i) {
        const SampleId& id = ids[static_cast<std::size_t>(i)];
        if (partition.is_labeled(id)) continue;
        if (!partition.unlabeled().count(id))
            throw DataError("mine: sample '" + id + "' is not in the partition");
        rows.push_back(i);
    }
    if (rows.size() != partition.unlabeled_count())
        throw DataError("mine: partition lists samples missing from the co-space");

    const detail::LabeledIndex labeled_before(reduced.before, partition);
    const detail::LabeledIndex labeled_after(reduced.after, partition);
    VariationParams vp;
    vp.max_labeled_neighbors = cfg.max_labeled_neighbors;
    vp.top_s = cfg.top_s;
    vp.k_weight = cfg.k_weight;
    vp.shared_members = cfg.shared_members;
    const int num_classes = partition.num_classes();

    std::vector<std::optional<Confidence>> slots(rows.size());
    parallel_for(rows.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
        detail::VariationScratch scratch;
        for (std::size_t i = begin; i < end; ++i) {
            const Eigen::Index row = rows[i];
            const SampleId& id = ids[static_cast<std::size_t>(row)];
            const auto y_b = soft_before.normalized_row(id);
            const auto y_a = soft_after.normalized_row(id);
            if (!y_b || !y_a) continue;  // unreached by propagation
            std::optional<Confidence> scored;
            if (cfg.criterion == Criterion::full) {
                const auto m = detail::transformation_matrix_at(
                    reduced, labeled_before, labeled_after, row, vp, num_classes, scratch);
                if (!m) continue;  // no usable class support
                scored = confidence(*y_b, *y_a, *m);
                if (!scored) continue;  // no soft-label mass on the support
            } else {
                scored = confidence_ablation(*y_b, *y_a);
            }
            scored->sample = id;
            slots[i] = std::move(scored);
        }
    });

    std::vector<Confidence> scored;
    scored.reserve(rows.size());
    std::size_t unminable = 0;
    for (auto& slot : slots) {
        if (slot)
            scored.push_back(std::move(*slot));
        else
            ++unminable;
    }

    MiningResult out = select(std::move(scored), cfg.threshold, cfg.cap, excluded);
    out.scored = rows.size() - unminable;
    out.unminable = unminable;
    return out;
}

std::vector<PseudoLabel> to_pseudo_labels(const MiningResult& result) {
    std::vector<PseudoLabel> out;
    out.reserve(result.selections.size());
    for (const auto& c : result.selections)
        out.push_back(PseudoLabel{c.sample, c.pseudo_label, c.score, result.iteration});
    return out;
}

LoopOutput run_loop(FeatureProvider& provider, const Partition& initial, const MiningConfig& cfg) {
    validate(cfg);
    LoopOutput out{{}, initial};
    if (cfg.max_iterations == 0) return out;

    std::optional<FeatureSpace> prev = provider.next();
    if (!prev) throw DataError("run loop: provider yielded no feature spaces");
    std::set<SampleId> excluded;
    int iteration = 0;
    while (iteration < cfg.max_iterations) {
        std::optional<FeatureSpace> curr = provider.next();
        if (!curr) {
            if (iteration == 0)
                throw DataError("run loop: provider yielded only one feature space");
            break;
        }
        CoSpace cs = make_cospace(std::move(*prev), std::move(*curr));
        ++iteration;
        MiningResult result = mine_iteration(cs, out.partition, cfg, excluded);
        result.iteration = iteration;
        for (const auto& c : result.selections) excluded.insert(c.sample);
        out.partition = out.partition.augmented(to_pseudo_labels(result));
        prev = std::move(cs.after);
        out.results.push_back(std::move(result));
    }
    return out;
}

}  // namespace cospace
