#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cospace/dataset.hpp"
#include "cospace/knn.hpp"
#include "cospace/mining.hpp"
#include "cospace/propagation.hpp"
#include "cospace/provider.hpp"
#include "cospace/synth.hpp"
#include "cospace/transition.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cospace;

namespace {

constexpr const char* kToolName = "cospace";
constexpr const char* kToolVersion = "0.1.0";

struct MineArgs {
    std::string features;  // manifest listing one feature file per line
    std::string labels;
    std::string truth;  // optional ground-truth label file
    int num_classes = 0;
    std::string out_dir = "out";
    std::string reduce_method = "pca";
    MiningConfig cfg;
    bool threshold_given = false;
};

struct PropagateArgs {
    std::string before;
    std::string after;
    std::string labels;
    int num_classes = 0;
    std::string out_dir = "out";
    std::string reduce_method = "pca";
    int reduce_dim = 0;  // 0 = propagate at the input dimensionality
    MiningConfig cfg;
};

struct SimulateArgs {
    std::string scenario_file;  // empty = built-in default scenario
    std::string arm = "both";   // both | full | ablation
    std::string out_dir = "out";
    std::string reduce_method = "pca";
    MiningConfig cfg;
    bool threshold_given = false;
};

struct EvalArgs {
    std::string truth;
    int num_classes = 0;
    std::vector<std::string> selections;
    std::string out_dir = "out";
};

struct DumpGraphArgs {
    std::string features;
    std::string out_dir = "out";
    MiningConfig cfg;
};

void log_line(const std::string& message) { std::cerr << kToolName << ": " << message << "\n"; }

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

json config_to_json(const MiningConfig& cfg) {
    return json{{"knn", cfg.knn},
                {"mu", cfg.mu},
                {"delta", cfg.delta},
                {"lp_iterations", cfg.lp_iterations},
                {"lp_stop_tol", cfg.lp_stop_tol},
                {"labeled_neighbors", cfg.max_labeled_neighbors},
                {"top_s", cfg.top_s},
                {"k_weight", cfg.k_weight},
                {"reduce_dim", cfg.reduce_dim},
                {"reduce_method", to_string(cfg.reduce_method)},
                {"threshold", cfg.threshold},
                {"cap", cfg.cap},
                {"max_iterations", cfg.max_iterations},
                {"seed", cfg.seed},
                {"threads", cfg.threads},
                {"criterion", to_string(cfg.criterion)},
                {"shared_members", cfg.shared_members}};
}

MiningConfig config_from_json(const json& j) {
    MiningConfig cfg;
    cfg.knn = j.at("knn").get<int>();
    cfg.mu = j.at("mu").get<double>();
    cfg.delta = j.at("delta").get<double>();
    cfg.lp_iterations = j.at("lp_iterations").get<int>();
    cfg.lp_stop_tol = j.at("lp_stop_tol").get<double>();
    cfg.max_labeled_neighbors = j.at("labeled_neighbors").get<int>();
    cfg.top_s = j.at("top_s").get<int>();
    cfg.k_weight = j.at("k_weight").get<double>();
    cfg.reduce_dim = j.at("reduce_dim").get<int>();
    cfg.reduce_method = parse_reduce_method(j.at("reduce_method").get<std::string>());
    cfg.threshold = j.at("threshold").get<double>();
    cfg.cap = j.at("cap").get<int>();
    cfg.max_iterations = j.at("max_iterations").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.threads = j.at("threads").get<int>();
    cfg.criterion = parse_criterion(j.at("criterion").get<std::string>());
    cfg.shared_members = j.at("shared_members").get<bool>();
    return cfg;
}

json scenario_to_json(const DriftScenario& s) {
    return json{{"num_classes", s.num_classes},
                {"samples_per_class", s.samples_per_class},
                {"dim", s.dim},
                {"labeled_fraction", s.labeled_fraction},
                {"separation_schedule", s.separation_schedule},
                {"rotation_schedule", s.rotation_schedule},
                {"noise_sigma", s.noise_sigma},
                {"outlier_fraction", s.outlier_fraction},
                {"seed", s.seed}};
}

DriftScenario scenario_from_json(const json& j) {
    DriftScenario s;
    s.num_classes = j.at("num_classes").get<int>();
    s.samples_per_class = j.at("samples_per_class").get<int>();
    s.dim = j.at("dim").get<int>();
    s.labeled_fraction = j.at("labeled_fraction").get<double>();
    s.separation_schedule = j.at("separation_schedule").get<std::vector<double>>();
    s.rotation_schedule = j.at("rotation_schedule").get<std::vector<double>>();
    s.noise_sigma = j.at("noise_sigma").get<double>();
    s.outlier_fraction = j.at("outlier_fraction").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& inputs,
                    const MiningConfig& cfg, const json& extra = json::object()) {
    json manifest{{"tool", kToolName},
                  {"version", kToolVersion},
                  {"command", command},
                  {"inputs", inputs},
                  {"output_dir", out_dir.string()},
                  {"config", config_to_json(cfg)}};
    for (const auto& [key, value] : extra.items()) manifest[key] = value;
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void warn_default_threshold(const MiningConfig& cfg, bool given) {
    if (!given)
        log_line("warning: --threshold left at its default (" + format_double(cfg.threshold) +
                 "); the selection threshold is a data-dependent tuning knob");
}

// Accuracy of one iteration's selections against ground truth, if available.
std::optional<double> selection_accuracy(const MiningResult& result, const GroundTruth& truth) {
    if (result.selections.empty()) return std::nullopt;
    std::size_t correct = 0;
    for (const auto& c : result.selections)
        if (c.pseudo_label == truth.class_of(c.sample)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(result.selections.size());
}

int run_mine(const MineArgs& args, const std::string& command) {
    MiningConfig cfg = args.cfg;
    cfg.reduce_method = parse_reduce_method(args.reduce_method);
    cfg.criterion = command == "ablate" ? Criterion::ablation : cfg.criterion;
    validate(cfg);
    if (args.num_classes < 1) throw ConfigError("--classes must be >= 1");
    if (args.features.empty()) throw ConfigError("--features is required");
    if (args.labels.empty()) throw ConfigError("--labels is required");
    warn_default_threshold(cfg, args.threshold_given);

    fs::create_directories(args.out_dir);
    const auto labels = load_labels(args.labels, args.num_classes);
    FileSequenceProvider provider(args.features);
    if (provider.paths().empty()) throw DataError("feature manifest lists no files");
    const FeatureSpace first = load_features(provider.paths().front());
    const Partition initial = make_partition(first, labels, args.num_classes);
    log_line("mining: " + std::to_string(initial.total()) + " samples, " +
             std::to_string(initial.labeled_count()) + " labeled, " +
             std::to_string(provider.paths().size()) + " feature spaces");

    const LoopOutput loop = run_loop(provider, initial, cfg);

    std::optional<GroundTruth> truth;
    if (!args.truth.empty()) {
        GroundTruth t;
        t.classes = load_labels(args.truth, args.num_classes);
        truth = t;
    }

    std::ostringstream metrics;
    metrics << "iteration,selected_count,mean_confidence,labeled_pool_size";
    if (truth) metrics << ",selection_accuracy";
    metrics << "\n";
    std::size_t pool = initial.labeled_count();
    for (const auto& result : loop.results) {
        pool += result.selections.size();
        double mean = 0.0;
        for (const auto& c : result.selections) mean += c.score;
        metrics << result.iteration << ',' << result.selections.size() << ',';
        if (!result.selections.empty())
            metrics << format_double(mean / static_cast<double>(result.selections.size()));
        metrics << ',' << pool;
        if (truth) {
            metrics << ',';
            if (const auto acc = selection_accuracy(result, *truth)) metrics << format_double(*acc);
        }
        metrics << "\n";
        save_pseudo_labels(to_pseudo_labels(result),
                           (fs::path(args.out_dir) /
                            ("selected_" + std::to_string(result.iteration) + ".tsv"))
                               .string());
        log_line("iteration " + std::to_string(result.iteration) + ": selected " +
                 std::to_string(result.selections.size()) + " of " +
                 std::to_string(result.scored + result.unminable) + " unlabeled (" +
                 std::to_string(result.unminable) + " unminable), pool " + std::to_string(pool));
    }
    write_text_file(fs::path(args.out_dir) / "metrics.csv", metrics.str());

    json inputs{{"features", args.features},
                {"labels", args.labels},
                {"num_classes", args.num_classes},
                {"truth", args.truth.empty() ? json() : json(args.truth)}};
    write_manifest(args.out_dir, command, inputs, cfg);
    log_line("wrote " + std::to_string(loop.results.size()) + " iteration(s) to " + args.out_dir);
    return 0;
}

int run_propagate(const PropagateArgs& args) {
    MiningConfig cfg = args.cfg;
    cfg.reduce_method = parse_reduce_method(args.reduce_method);
    cfg.reduce_dim = args.reduce_dim;
    if (args.num_classes < 1) throw ConfigError("--classes must be >= 1");
    if (args.before.empty() || args.after.empty())
        throw ConfigError("--before and --after are required");
    if (args.labels.empty()) throw ConfigError("--labels is required");

    fs::create_directories(args.out_dir);
    CoSpace cs = make_cospace(load_features(args.before), load_features(args.after));
    if (args.reduce_dim > 0) cs = reduce_cospace(cs, args.reduce_dim, cfg.reduce_method, cfg.seed);
    const auto labels = load_labels(args.labels, args.num_classes);
    const Partition partition = make_partition(cs.before, labels, args.num_classes);

    PropagationParams lp;
    lp.knn = cfg.knn;
    lp.mu = cfg.mu;
    lp.delta = cfg.delta;
    lp.iterations = cfg.lp_iterations;
    lp.stop_tol = cfg.lp_stop_tol;
    lp.threads = cfg.threads;
    const auto [soft_before, soft_after] = intrinsic_variation(cs, partition, lp);

    std::ostringstream before_dump, after_dump;
    soft_before.dump(before_dump);
    soft_after.dump(after_dump);
    write_text_file(fs::path(args.out_dir) / "propagated_before.tsv", before_dump.str());
    write_text_file(fs::path(args.out_dir) / "propagated_after.tsv", after_dump.str());

    json inputs{{"before", args.before},
                {"after", args.after},
                {"labels", args.labels},
                {"num_classes", args.num_classes},
                {"reduce_dim", args.reduce_dim}};
    write_manifest(args.out_dir, "propagate", inputs, cfg);
    log_line("propagated " + std::to_string(partition.total()) + " samples on both sides");
    return 0;
}

ComparisonTable single_arm_table(const std::vector<MiningResult>& results, const GroundTruth& truth,
                                 Criterion arm) {
    const auto accuracy = evaluate(results, truth);
    ComparisonTable table;
    for (std::size_t i = 0; i < results.size(); ++i) {
        ComparisonRow row;
        row.iteration = static_cast<int>(i) + 1;
        if (arm == Criterion::full) {
            row.accuracy_full = accuracy[i];
            row.count_full = results[i].selections.size();
        } else {
            row.accuracy_ablation = accuracy[i];
            row.count_ablation = results[i].selections.size();
        }
        table.rows.push_back(row);
    }
    return table;
}

int run_simulate(const SimulateArgs& args, const std::optional<DriftScenario>& resolved) {
    MiningConfig cfg = args.cfg;
    cfg.reduce_method = parse_reduce_method(args.reduce_method);
    validate(cfg);
    if (args.arm != "both" && args.arm != "full" && args.arm != "ablation")
        throw ConfigError("--criterion must be both, full, or ablation");
    warn_default_threshold(cfg, args.threshold_given);

    DriftScenario scenario;
    if (resolved)
        scenario = *resolved;
    else if (!args.scenario_file.empty())
        scenario = load_scenario(args.scenario_file);
    else
        scenario = default_scenario();

    fs::create_directories(args.out_dir);
    ComparisonTable table;
    if (args.arm == "both") {
        table = compare_criteria(scenario, cfg);
    } else {
        const Criterion arm = parse_criterion(args.arm);
        cfg.criterion = arm;
        const ScenarioData data = generate(scenario);
        MemorySequenceProvider provider = data.make_provider();
        const LoopOutput loop = run_loop(provider, data.partition, cfg);
        table = single_arm_table(loop.results, data.truth, arm);
    }

    std::ostringstream csv, plot;
    write_comparison_csv(table, csv);
    write_comparison_gnuplot(table, plot);
    write_text_file(fs::path(args.out_dir) / "comparison.csv", csv.str());
    write_text_file(fs::path(args.out_dir) / "comparison.dat", plot.str());

    for (const auto& row : table.rows) {
        std::string line = "iteration " + std::to_string(row.iteration) + ":";
        if (row.accuracy_full)
            line += " full " + format_double(*row.accuracy_full) + " (" +
                    std::to_string(row.count_full) + ")";
        if (row.accuracy_ablation)
            line += " ablation " + format_double(*row.accuracy_ablation) + " (" +
                    std::to_string(row.count_ablation) + ")";
        log_line(line);
    }

    json inputs{{"scenario_file", args.scenario_file.empty() ? json() : json(args.scenario_file)}};
    write_manifest(args.out_dir, "simulate", inputs, cfg,
                   json{{"scenario", scenario_to_json(scenario)}, {"arm", args.arm}});
    return 0;
}

int run_eval(const EvalArgs& args) {
    if (args.num_classes < 1) throw ConfigError("--classes must be >= 1");
    if (args.truth.empty()) throw ConfigError("--truth is required");
    if (args.selections.empty()) throw ConfigError("at least one --selections file is required");

    GroundTruth truth;
    truth.classes = load_labels(args.truth, args.num_classes);

    fs::create_directories(args.out_dir);
    std::ostringstream csv;
    csv << "file,selected_count,accuracy\n";
    for (const auto& file : args.selections) {
        const auto rows = load_pseudo_labels(file, args.num_classes);
        std::size_t correct = 0;
        for (const auto& row : rows)
            if (row.class_index == truth.class_of(row.id)) ++correct;
        csv << file << ',' << rows.size() << ',';
        if (!rows.empty())
            csv << format_double(static_cast<double>(correct) / static_cast<double>(rows.size()));
        csv << "\n";
        log_line(file + ": " + std::to_string(correct) + "/" + std::to_string(rows.size()) +
                 " pseudo-labels correct");
    }
    write_text_file(fs::path(args.out_dir) / "accuracy.csv", csv.str());

    MiningConfig cfg;  // eval has no tuning knobs; record defaults for replay
    json inputs{{"truth", args.truth},
                {"num_classes", args.num_classes},
                {"selections", args.selections}};
    write_manifest(args.out_dir, "eval", inputs, cfg);
    return 0;
}

int run_dump_graph(const DumpGraphArgs& args) {
    if (args.features.empty()) throw ConfigError("--features is required");
    const MiningConfig& cfg = args.cfg;
    if (cfg.knn < 1) throw ConfigError("knn must be >= 1");

    fs::create_directories(args.out_dir);
    const FeatureSpace space = load_features(args.features);
    const KnnIndex knn = build_knn(space, cfg.knn, cfg.threads);
    const TransitionMatrix transition = build_transition(space, knn, cfg.mu, cfg.delta);
    std::ostringstream dump;
    transition.dump(dump);
    write_text_file(fs::path(args.out_dir) / "graph.tsv", dump.str());

    json inputs{{"features", args.features}};
    write_manifest(args.out_dir, "dump-graph", inputs, args.cfg);
    log_line("wrote transition matrix for " + std::to_string(space.size()) + " samples");
    return 0;
}

void add_mining_flags(CLI::App* cmd, MiningConfig& cfg, std::string& reduce_method,
                      bool with_reduce_dim = true) {
    cmd->add_option("--knn", cfg.knn, "Graph neighbors per sample");
    cmd->add_option("--mu", cfg.mu, "Kernel bandwidth multiplier");
    cmd->add_option("--delta", cfg.delta, "Bandwidth scale on the per-sample sigma");
    cmd->add_option("--lp-iters", cfg.lp_iterations, "Label-propagation iterations");
    cmd->add_option("--lp-stop-tol", cfg.lp_stop_tol, "Early-stop tolerance (0 disables)");
    cmd->add_option("--labeled-neighbors", cfg.max_labeled_neighbors,
                    "Labeled samples per neighborhood");
    cmd->add_option("--top-s", cfg.top_s, "Support classes per sample");
    cmd->add_option("--k-weight", cfg.k_weight, "Query weight inside local covariances");
    if (with_reduce_dim) cmd->add_option("--reduce-dim", cfg.reduce_dim, "Reduced dimensionality");
    cmd->add_option("--reduce-method", reduce_method, "pca, random-projection, or identity");
    cmd->add_option("--threshold", cfg.threshold, "Selection threshold in [0,1]");
    cmd->add_option("--cap", cfg.cap, "Max selections per iteration");
    cmd->add_option("--max-iterations", cfg.max_iterations, "Mining loop bound");
    cmd->add_option("--seed", cfg.seed, "Random seed");
    cmd->add_option("--threads", cfg.threads, "Worker threads");
    cmd->add_flag("--shared-members", cfg.shared_members,
                  "Build both covariance sides from the shared member set");
}

int replay_manifest(const std::string& path, const std::string& out_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest '" + path + "'");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ConfigError("manifest '" + path + "': " + e.what());
    }
    try {
        const std::string command = manifest.at("command").get<std::string>();
        const MiningConfig cfg = config_from_json(manifest.at("config"));
        const std::string out_dir =
            out_override.empty() ? manifest.at("output_dir").get<std::string>() : out_override;
        const json& inputs = manifest.at("inputs");
        log_line("replaying '" + command + "' into " + out_dir);
        if (command == "mine" || command == "ablate") {
            MineArgs args;
            args.features = inputs.at("features").get<std::string>();
            args.labels = inputs.at("labels").get<std::string>();
            args.num_classes = inputs.at("num_classes").get<int>();
            if (!inputs.at("truth").is_null()) args.truth = inputs.at("truth").get<std::string>();
            args.out_dir = out_dir;
            args.cfg = cfg;
            args.reduce_method = to_string(cfg.reduce_method);
            args.threshold_given = true;  // recorded value is intentional
            return run_mine(args, command);
        }
        if (command == "propagate") {
            PropagateArgs args;
            args.before = inputs.at("before").get<std::string>();
            args.after = inputs.at("after").get<std::string>();
            args.labels = inputs.at("labels").get<std::string>();
            args.num_classes = inputs.at("num_classes").get<int>();
            args.reduce_dim = inputs.at("reduce_dim").get<int>();
            args.out_dir = out_dir;
            args.cfg = cfg;
            args.reduce_method = to_string(cfg.reduce_method);
            return run_propagate(args);
        }
        if (command == "simulate") {
            SimulateArgs args;
            if (!inputs.at("scenario_file").is_null())
                args.scenario_file = inputs.at("scenario_file").get<std::string>();
            args.arm = manifest.at("arm").get<std::string>();
            args.out_dir = out_dir;
            args.cfg = cfg;
            args.reduce_method = to_string(cfg.reduce_method);
            args.threshold_given = true;
            return run_simulate(args, scenario_from_json(manifest.at("scenario")));
        }
        if (command == "eval") {
            EvalArgs args;
            args.truth = inputs.at("truth").get<std::string>();
            args.num_classes = inputs.at("num_classes").get<int>();
            args.selections = inputs.at("selections").get<std::vector<std::string>>();
            args.out_dir = out_dir;
            return run_eval(args);
        }
        if (command == "dump-graph") {
            DumpGraphArgs args;
            args.features = inputs.at("features").get<std::string>();
            args.out_dir = out_dir;
            args.cfg = cfg;
            return run_dump_graph(args);
        }
        throw ConfigError("manifest: unknown command '" + command + "'");
    } catch (const json::exception& e) {
        throw ConfigError("manifest '" + path + "': " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Co-space sample mining: pseudo-labels from neighborhood stability across\n"
                 "two successive feature embeddings of the same dataset."};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(0, 1);

    std::string from_manifest;
    std::string replay_out;
    app.add_option("--from-manifest", from_manifest, "Replay a recorded run manifest");
    app.add_option("--out-override", replay_out, "Output directory for the replayed run")
        ->needs("--from-manifest");

    MineArgs mine_args;
    CLI::App* mine = app.add_subcommand("mine", "Run the iterative mining loop");
    mine->add_option("--features", mine_args.features, "Manifest listing feature files in order")
        ->required();
    mine->add_option("--labels", mine_args.labels, "Seed label file (id<TAB>class)")->required();
    mine->add_option("--classes", mine_args.num_classes, "Number of classes")->required();
    mine->add_option("--truth", mine_args.truth, "Ground-truth label file (adds accuracy column)");
    mine->add_option("--out", mine_args.out_dir, "Output directory");
    add_mining_flags(mine, mine_args.cfg, mine_args.reduce_method);

    MineArgs ablate_args;
    CLI::App* ablate = app.add_subcommand("ablate", "Mining loop with the plain-cosine criterion");
    ablate->add_option("--features", ablate_args.features, "Manifest listing feature files in order")
        ->required();
    ablate->add_option("--labels", ablate_args.labels, "Seed label file (id<TAB>class)")->required();
    ablate->add_option("--classes", ablate_args.num_classes, "Number of classes")->required();
    ablate->add_option("--truth", ablate_args.truth, "Ground-truth label file");
    ablate->add_option("--out", ablate_args.out_dir, "Output directory");
    add_mining_flags(ablate, ablate_args.cfg, ablate_args.reduce_method);

    PropagateArgs prop_args;
    CLI::App* propagate = app.add_subcommand("propagate", "Label propagation on one co-space");
    propagate->add_option("--before", prop_args.before, "Feature file before the update")
        ->required();
    propagate->add_option("--after", prop_args.after, "Feature file after the update")->required();
    propagate->add_option("--labels", prop_args.labels, "Seed label file")->required();
    propagate->add_option("--classes", prop_args.num_classes, "Number of classes")->required();
    propagate->add_option("--out", prop_args.out_dir, "Output directory");
    propagate->add_option("--reduce-dim", prop_args.reduce_dim,
                          "Reduce both sides first (0 = no reduction)");
    add_mining_flags(propagate, prop_args.cfg, prop_args.reduce_method, false);

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "Synthetic drift comparison run");
    simulate->add_option("--scenario", sim_args.scenario_file,
                         "Scenario file (defaults to the built-in scenario)");
    simulate->add_option("--criterion", sim_args.arm, "both, full, or ablation");
    simulate->add_option("--out", sim_args.out_dir, "Output directory");
    add_mining_flags(simulate, sim_args.cfg, sim_args.reduce_method);

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score selections against ground truth");
    eval->add_option("--truth", eval_args.truth, "Ground-truth label file")->required();
    eval->add_option("--classes", eval_args.num_classes, "Number of classes")->required();
    eval->add_option("--selections", eval_args.selections, "Pseudo-label files to score")
        ->required()
        ->expected(-1);
    eval->add_option("--out", eval_args.out_dir, "Output directory");

    DumpGraphArgs graph_args;
    CLI::App* dump_graph = app.add_subcommand("dump-graph", "Write one transition matrix");
    dump_graph->add_option("--features", graph_args.features, "Feature file")->required();
    dump_graph->add_option("--out", graph_args.out_dir, "Output directory");
    dump_graph->add_option("--knn", graph_args.cfg.knn, "Graph neighbors per sample");
    dump_graph->add_option("--mu", graph_args.cfg.mu, "Kernel bandwidth multiplier");
    dump_graph->add_option("--delta", graph_args.cfg.delta, "Bandwidth scale");
    dump_graph->add_option("--threads", graph_args.cfg.threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!from_manifest.empty()) return replay_manifest(from_manifest, replay_out);
        if (app.got_subcommand(mine)) {
            mine_args.threshold_given = mine->count("--threshold") > 0;
            return run_mine(mine_args, "mine");
        }
        if (app.got_subcommand(ablate)) {
            ablate_args.threshold_given = ablate->count("--threshold") > 0;
            return run_mine(ablate_args, "ablate");
        }
        if (app.got_subcommand(propagate)) return run_propagate(prop_args);
        if (app.got_subcommand(simulate)) {
            sim_args.threshold_given = simulate->count("--threshold") > 0;
            return run_simulate(sim_args, std::nullopt);
        }
        if (app.got_subcommand(eval)) return run_eval(eval_args);
        if (app.got_subcommand(dump_graph)) return run_dump_graph(graph_args);
        std::cerr << app.help();
        return 2;
    } catch (const ConfigError& e) {
        log_line(std::string("config error: ") + e.what());
        return 2;
    } catch (const DataError& e) {
        log_line(std::string("error: ") + e.what());
        return 1;
    } catch (const std::exception& e) {
        log_line(std::string("error: ") + e.what());
        return 1;
    }
}
