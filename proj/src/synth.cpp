#include "cospace/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace cospace {

namespace {

// A sample keeps most of its cluster-relative offset across the sequence
// (successive embeddings of one sample are strongly correlated); only this
// fraction of noise_sigma is redrawn per space.
constexpr double kInnovationRatio = 0.12;  // per-space redraw, fraction of noise_sigma
constexpr double kNoisyChurn = 12.0;       // churn multiplier for non-bridge-source classes
constexpr double kBridgeDepthMin = 0.56;   // bridge depth band between adjacent centers
constexpr double kBridgeDepthMax = 0.62;
constexpr double kBridgeCreep = 0.015;     // extra depth per space: slow migration

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <class Int>
Int parse_integer(const std::string& token, const std::string& context) {
    Int value{};
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError(context + ": bad integer '" + token + "'");
    return value;
}

double parse_fraction(const std::string& token, const std::string& context) {
    try {
        return parse_double(token, context);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> parse_schedule(const std::string& value, const std::string& context) {
    std::vector<double> entries;
    std::string item;
    std::istringstream stream(value);
    while (std::getline(stream, item, ',')) entries.push_back(parse_fraction(trim(item), context));
    return entries;
}

std::string sample_name(int index, int width) {
    std::string digits = std::to_string(index);
    return "s" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

// Orthogonal frame for the rotation schedule: QR of a random matrix with the
// sign of each column fixed by R's diagonal.
Eigen::MatrixXd random_frame(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd raw(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) raw(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// Rotation by `angle` in every 2-plane of the frame.
Eigen::MatrixXd frame_rotation(const Eigen::MatrixXd& frame, double angle) {
    const Eigen::Index dim = frame.rows();
    Eigen::MatrixXd block = Eigen::MatrixXd::Identity(dim, dim);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (Eigen::Index p = 0; p + 1 < dim; p += 2) {
        block(p, p) = c;
        block(p, p + 1) = -s;
        block(p + 1, p) = s;
        block(p + 1, p + 1) = c;
    }
    return frame * block * frame.transpose();
}

}  // namespace

void validate(const DriftScenario& scenario) {
    if (scenario.num_classes < 1) throw ConfigError("scenario: num_classes must be >= 1");
    if (scenario.samples_per_class < 1)
        throw ConfigError("scenario: samples_per_class must be >= 1");
    if (scenario.dim < 1) throw ConfigError("scenario: dim must be >= 1");
    if (scenario.labeled_fraction < 0.0 || scenario.labeled_fraction > 1.0)
        throw ConfigError("scenario: labeled_fraction must be in [0,1]");
    if (scenario.separation_schedule.empty()) throw ConfigError("scenario: empty separation_schedule");
    if (scenario.rotation_schedule.size() != scenario.separation_schedule.size())
        throw ConfigError("scenario: schedules must have equal length");
    for (double sep : scenario.separation_schedule)
        if (!(sep > 0.0)) throw ConfigError("scenario: separation factors must be > 0");
    for (double angle : scenario.rotation_schedule)
        if (!std::isfinite(angle)) throw ConfigError("scenario: non-finite rotation angle");
    if (scenario.noise_sigma < 0.0) throw ConfigError("scenario: noise_sigma must be >= 0");
    if (scenario.outlier_fraction < 0.0 || scenario.outlier_fraction > 1.0)
        throw ConfigError("scenario: outlier_fraction must be in [0,1]");
    if (scenario.outlier_fraction > 0.0 && scenario.num_classes < 2)
        throw ConfigError("scenario: migrating outliers need at least 2 classes");
}

DriftScenario default_scenario() {
    DriftScenario scenario;
    scenario.num_classes = 5;
    scenario.samples_per_class = 200;
    scenario.dim = 15;
    scenario.labeled_fraction = 0.1;
    scenario.separation_schedule = {2.6, 2.8, 3.0, 3.2, 3.4, 3.6, 3.8};
    scenario.rotation_schedule = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    scenario.noise_sigma = 0.4;
    scenario.outlier_fraction = 0.35;
    scenario.seed = 185;
    return scenario;
}

DriftScenario read_scenario(std::istream& in, const std::string& origin) {
    DriftScenario scenario = default_scenario();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto eq = text.find('=');
        const std::string where = origin + ": line " + std::to_string(lineno);
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + text + "'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key == "num_classes")
            scenario.num_classes = parse_integer<int>(value, where);
        else if (key == "samples_per_class")
            scenario.samples_per_class = parse_integer<int>(value, where);
        else if (key == "dim")
            scenario.dim = parse_integer<int>(value, where);
        else if (key == "labeled_fraction")
            scenario.labeled_fraction = parse_fraction(value, where);
        else if (key == "separation_schedule")
            scenario.separation_schedule = parse_schedule(value, where);
        else if (key == "rotation_schedule")
            scenario.rotation_schedule = parse_schedule(value, where);
        else if (key == "noise_sigma")
            scenario.noise_sigma = parse_fraction(value, where);
        else if (key == "outlier_fraction")
            scenario.outlier_fraction = parse_fraction(value, where);
        else if (key == "seed")
            scenario.seed = parse_integer<std::uint64_t>(value, where);
        else
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
    validate(scenario);
    return scenario;
}

DriftScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    return read_scenario(in, path);
}

int GroundTruth::class_of(const SampleId& id) const {
    auto it = classes.find(id);
    if (it == classes.end()) throw DataError("ground truth: unknown sample id '" + id + "'");
    return it->second;
}

ScenarioData generate(const DriftScenario& scenario) {
    validate(scenario);
    const int m = scenario.num_classes;
    const int per_class = scenario.samples_per_class;
    const int n = m * per_class;
    const Eigen::Index dim = scenario.dim;
    const std::size_t steps = scenario.separation_schedule.size();

    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Unit class centers.
    Eigen::MatrixXd centers(m, dim);
    for (int c = 0; c < m; ++c) {
        for (Eigen::Index d = 0; d < dim; ++d) centers(c, d) = normal(rng);
        const double norm = centers.row(c).norm();
        if (norm < 1e-12)
            centers(c, 0) = 1.0;
        else
            centers.row(c) /= norm;
    }

    const bool rotated = std::any_of(scenario.rotation_schedule.begin(),
                                     scenario.rotation_schedule.end(),
                                     [](double a) { return a != 0.0; });
    Eigen::MatrixXd frame;
    if (rotated) frame = random_frame(dim, rng);

    // Outliers sit past the midpoint of the path from their own center to the
    // next class's center and creep a little deeper every space, forming a
    // slowly migrating bridge between clusters. The creep is small enough that
    // successive soft labels still agree, but it carries the bridge across the
    // decision boundary as the sequence progresses. Bridges start only at even
    // classes, which keep a calm churn scale, so each bridge points toward a
    // noisier class (see the churn scale below).
    std::vector<char> migrates(static_cast<std::size_t>(n), 0);
    std::vector<int> target(static_cast<std::size_t>(n), 0);
    std::vector<double> depth(static_cast<std::size_t>(n), 0.0);
    const long migrators_per_class = std::lround(scenario.outlier_fraction * per_class);
    if (migrators_per_class > 0) {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (int c = 0; c + 1 < m; c += 2) {
            std::vector<int> members(static_cast<std::size_t>(per_class));
            std::iota(members.begin(), members.end(), c * per_class);
            std::shuffle(members.begin(), members.end(), rng);
            const long count = std::min<long>(migrators_per_class, per_class);
            for (long i = 0; i < count; ++i) {
                const auto k = static_cast<std::size_t>(members[static_cast<std::size_t>(i)]);
                migrates[k] = 1;
                depth[k] = kBridgeDepthMin + (kBridgeDepthMax - kBridgeDepthMin) * uniform(rng);
            }
        }
    }
    for (int k = 0; k < n; ++k) target[static_cast<std::size_t>(k)] = (k / per_class + 1) % m;

    // Sample names; zero-padded so lexicographic order equals numeric order.
    int width = 4;
    for (long long bound = 10000; n - 1 >= bound; bound *= 10) ++width;
    std::vector<SampleId> ids;
    ids.reserve(static_cast<std::size_t>(n));
    GroundTruth truth;
    for (int k = 0; k < n; ++k) {
        ids.push_back(sample_name(k, width));
        truth.classes[ids.back()] = k / per_class;
    }

    // Labeled pool: per class, a uniform draw from its non-migrating samples.
    std::map<SampleId, int> labels;
    for (int c = 0; c < m; ++c) {
        std::vector<int> pool;
        for (int j = 0; j < per_class; ++j) {
            const int k = c * per_class + j;
            if (!migrates[static_cast<std::size_t>(k)]) pool.push_back(k);
        }
        const long want = std::lround(scenario.labeled_fraction * per_class);
        if (want < 1)
            throw ConfigError("scenario: labeled_fraction gives no labeled samples for class " +
                              std::to_string(c));
        if (static_cast<std::size_t>(want) > pool.size())
            throw ConfigError("scenario: class " + std::to_string(c) +
                              " has too few non-migrating samples for labeled_fraction");
        std::shuffle(pool.begin(), pool.end(), rng);
        for (long i = 0; i < want; ++i) labels[ids[static_cast<std::size_t>(pool[i])]] = c;
    }

    // Persistent cluster-relative offset per sample; successive spaces only
    // redraw the innovation part.
    Eigen::MatrixXd base_offset(n, dim);
    for (int k = 0; k < n; ++k)
        for (Eigen::Index d = 0; d < dim; ++d)
            base_offset(k, d) = scenario.noise_sigma * normal(rng);

    // One space per schedule entry; single stream.
    auto spaces = std::make_shared<std::vector<FeatureSpace>>();
    spaces->reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const double sep = scenario.separation_schedule[t];
        const double angle = scenario.rotation_schedule[t];
        Eigen::MatrixXd features(n, dim);
        for (int k = 0; k < n; ++k) {
            const int c = k / per_class;
            Eigen::RowVectorXd center = centers.row(c);
            if (migrates[static_cast<std::size_t>(k)]) {
                const double w = std::min(
                    depth[static_cast<std::size_t>(k)] + kBridgeCreep * static_cast<double>(t),
                    0.95);
                center = (1.0 - w) * center + w * centers.row(target[static_cast<std::size_t>(k)]);
            }
            // Classes that source a bridge stay calm; everyone else redraws a
            // larger innovation, so soft labels churn hardest where bridges
            // point. Sources are the even classes with a right-hand neighbor.
            const bool calm = c % 2 == 0 && c + 1 < m;
            const double innovation =
                kInnovationRatio * scenario.noise_sigma * (calm ? 1.0 : kNoisyChurn);
            features.row(k) = sep * center + base_offset.row(k);
            for (Eigen::Index d = 0; d < dim; ++d)
                features(k, d) += innovation * normal(rng);
        }
        if (rotated && angle != 0.0) features *= frame_rotation(frame, angle).transpose();
        spaces->emplace_back(ids, std::move(features));
    }

    ScenarioData out{std::move(spaces), Partition{}, std::move(truth)};
    out.partition = make_partition(out.spaces->front(), labels, m);
    return out;
}

std::vector<std::optional<double>> evaluate(const std::vector<MiningResult>& results,
                                            const GroundTruth& truth) {
    std::vector<std::optional<double>> accuracy;
    accuracy.reserve(results.size());
    for (const auto& result : results) {
        if (result.selections.empty()) {
            accuracy.push_back(std::nullopt);
            continue;
        }
        std::size_t correct = 0;
        for (const auto& c : result.selections)
            if (c.pseudo_label == truth.class_of(c.sample)) ++correct;
        accuracy.push_back(static_cast<double>(correct) /
                           static_cast<double>(result.selections.size()));
    }
    return accuracy;
}

ComparisonTable compare_criteria(const DriftScenario& scenario, const MiningConfig& cfg) {
    const ScenarioData data = generate(scenario);

    MiningConfig full_cfg = cfg;
    full_cfg.criterion = Criterion::full;
    MiningConfig ablation_cfg = cfg;
    ablation_cfg.criterion = Criterion::ablation;

    MemorySequenceProvider full_provider = data.make_provider();
    const LoopOutput full = run_loop(full_provider, data.partition, full_cfg);
    MemorySequenceProvider ablation_provider = data.make_provider();
    const LoopOutput ablation = run_loop(ablation_provider, data.partition, ablation_cfg);

    const auto acc_full = evaluate(full.results, data.truth);
    const auto acc_ablation = evaluate(ablation.results, data.truth);

    ComparisonTable table;
    const std::size_t rows = std::max(full.results.size(), ablation.results.size());
    for (std::size_t i = 0; i < rows; ++i) {
        ComparisonRow row;
        row.iteration = static_cast<int>(i) + 1;
        if (i < full.results.size()) {
            row.accuracy_full = acc_full[i];
            row.count_full = full.results[i].selections.size();
        }
        if (i < ablation.results.size()) {
            row.accuracy_ablation = acc_ablation[i];
            row.count_ablation = ablation.results[i].selections.size();
        }
        table.rows.push_back(row);
    }
    return table;
}

void write_comparison_csv(const ComparisonTable& table, std::ostream& out) {
    out << "iteration,acc_full,acc_ablation,count_full,count_ablation\n";
    for (const auto& row : table.rows) {
        out << row.iteration << ',';
        if (row.accuracy_full) out << format_double(*row.accuracy_full);
        out << ',';
        if (row.accuracy_ablation) out << format_double(*row.accuracy_ablation);
        out << ',' << row.count_full << ',' << row.count_ablation << '\n';
    }
}

void write_comparison_gnuplot(const ComparisonTable& table, std::ostream& out) {
    out << "# iteration acc_full acc_ablation count_full count_ablation\n";
    for (const auto& row : table.rows) {
        out << row.iteration << ' ';
        out << (row.accuracy_full ? format_double(*row.accuracy_full) : "?") << ' ';
        out << (row.accuracy_ablation ? format_double(*row.accuracy_ablation) : "?") << ' ';
        out << row.count_full << ' ' << row.count_ablation << '\n';
    }
}

}  // namespace cospace
