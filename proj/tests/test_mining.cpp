#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "cospace/dataset.hpp"
#include "cospace/feature_space.hpp"
#include "cospace/mining.hpp"
#include "cospace/provider.hpp"
#include "cospace/types.hpp"

using namespace cospace;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

// Two well-separated 2-D blobs with a handful of labels per class.
struct BlobFixture {
    CoSpace cs;
    Partition partition;
};

BlobFixture blob_fixture(int per_class, unsigned seed, double drift = 0.3) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.5);
    const int n = 2 * per_class;
    Eigen::MatrixXd before(n, 2), after(n, 2);
    std::vector<SampleId> ids;
    std::map<SampleId, int> labels;
    for (int i = 0; i < n; ++i) {
        const int cls = i < per_class ? 0 : 1;
        SampleId id = "s" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        ids.push_back(id);
        const double cx = cls == 0 ? 0.0 : 4.0;
        before(i, 0) = cx + normal(rng);
        before(i, 1) = normal(rng);
        after(i, 0) = before(i, 0) + drift * normal(rng);
        after(i, 1) = before(i, 1) + drift * normal(rng);
        if (i % per_class < 3) labels[id] = cls;
    }
    FeatureSpace sb(ids, before), sa(ids, after);
    Partition partition = make_partition(sb, labels, 2);
    return {{std::move(sb), std::move(sa)}, std::move(partition)};
}

MiningConfig blob_config() {
    MiningConfig cfg;
    cfg.knn = 5;
    cfg.reduce_dim = 2;
    cfg.reduce_method = ReduceMethod::identity;
    cfg.threshold = 0.0;
    cfg.cap = 1000;
    cfg.top_s = 2;
    return cfg;
}

}  // namespace

TEST_CASE("criterion names parse both ways") {
    CHECK(parse_criterion("full") == Criterion::full);
    CHECK(parse_criterion("ablation") == Criterion::ablation);
    CHECK_THROWS_AS(parse_criterion("cosine"), ConfigError);
    CHECK(to_string(Criterion::full) == "full");
    CHECK(to_string(Criterion::ablation) == "ablation");
}

TEST_CASE("confidence frozen oracle") {
    // y_b = (0.8, 0.2), y_a = (0.6, 0.4), M = diag(0.75, 0.25):
    // r_b = (sqrt(.6), sqrt(.05)) / sqrt(.65), r_a = (sqrt(.45), sqrt(.1)) / sqrt(.55).
    TransformationMatrix m;
    m.diag = vec2(0.75, 0.25);
    m.support = {0, 1};
    const auto c = confidence(vec2(0.8, 0.2), vec2(0.6, 0.4), m);
    REQUIRE(c.has_value());

    // |sqrt(M) y_b|^2 = 0.75 * 0.64 + 0.25 * 0.04 = 0.49, so r_b multiplies
    // by 1 / 0.7; the after side normalizes by sqrt(0.31).
    const Eigen::VectorXd r_b = vec2(std::sqrt(0.75) * 0.8 / 0.7, 0.5 * 0.2 / 0.7);
    const Eigen::VectorXd r_a = vec2(std::sqrt(0.75) * 0.6, 0.5 * 0.4) / std::sqrt(0.31);
    CHECK(c->score == doctest::Approx(r_b.dot(r_a)).epsilon(1e-12));
    CHECK(c->score == doctest::Approx(0.97499).epsilon(1e-4));
    CHECK(c->contribution(0) == doctest::Approx(r_b(0) * r_a(0)).epsilon(1e-12));
    CHECK(c->contribution(1) == doctest::Approx(r_b(1) * r_a(1)).epsilon(1e-12));
    CHECK(c->pseudo_label == 0);
    CHECK(c->criterion == Criterion::full);
}

TEST_CASE("ablation cosine oracle") {
    const Confidence c = confidence_ablation(vec2(0.8, 0.2), vec2(0.6, 0.4));
    CHECK(c.score == doctest::Approx(0.941741911595).epsilon(1e-11));
    CHECK(c.pseudo_label == 0);
    CHECK(c.criterion == Criterion::ablation);
    // Contribution is the Hadamard product of the normalized vectors.
    const double denom = std::sqrt(0.68) * std::sqrt(0.52);
    CHECK(c.contribution(0) == doctest::Approx(0.48 / denom).epsilon(1e-12));
    CHECK(c.contribution(1) == doctest::Approx(0.08 / denom).epsilon(1e-12));
}

TEST_CASE("uniform reweighting reduces to the ablation score") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uniform(0.01, 1.0);
    for (int rep = 0; rep < 300; ++rep) {
        const int m = 2 + static_cast<int>(rng() % 9);
        Eigen::VectorXd y_b(m), y_a(m);
        for (int c = 0; c < m; ++c) {
            y_b(c) = uniform(rng);
            y_a(c) = uniform(rng);
        }
        y_b /= y_b.sum();
        y_a /= y_a.sum();

        TransformationMatrix t;
        const double scale = uniform(rng);  // any c * I with full support
        t.diag = Eigen::VectorXd::Constant(m, scale);
        for (int c = 0; c < m; ++c) t.support.push_back(c);

        const auto full = confidence(y_b, y_a, t);
        REQUIRE(full.has_value());
        const Confidence plain = confidence_ablation(y_b, y_a);
        CHECK(full->score == doctest::Approx(plain.score).epsilon(1e-12));
        CHECK(full->pseudo_label == plain.pseudo_label);
    }
}

TEST_CASE("confidence with one-hot support is vacuously certain") {
    TransformationMatrix m;
    m.diag = vec2(1.0, 0.0);
    m.support = {0};
    const auto c = confidence(vec2(0.3, 0.7), vec2(0.2, 0.8), m);
    REQUIRE(c.has_value());
    // Restricting to a single class and renormalizing pins the score to 1
    // and the label to that class, whatever the soft labels preferred.
    CHECK(c->score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c->pseudo_label == 0);
}

TEST_CASE("confidence is nullopt when the support holds no mass") {
    TransformationMatrix m;
    m.diag = vec2(0.0, 1.0);
    m.support = {1};
    // Both vectors put everything on class 0; class 1 carries only floor-level
    // residue, which must not be normalized into a spurious score.
    const auto c = confidence(vec2(1.0 - 1e-15, 1e-15), vec2(1.0 - 1e-15, 1e-15), m);
    CHECK(!c.has_value());
}

TEST_CASE("confidence validates its inputs") {
    TransformationMatrix m;
    m.diag = vec2(0.5, 0.5);
    m.support = {0, 1};
    CHECK_THROWS_AS(confidence(Eigen::VectorXd(), vec2(0.5, 0.5), m), DataError);
    CHECK_THROWS_AS(confidence(vec2(0.5, 0.5), vec2(0.9, 0.2), m), DataError);  // not normalized
    CHECK_THROWS_AS(confidence(vec2(1.5, -0.5), vec2(0.5, 0.5), m), DataError); // negative
    TransformationMatrix empty;
    empty.diag = vec2(0.5, 0.5);
    CHECK_THROWS_AS(confidence(vec2(0.5, 0.5), vec2(0.5, 0.5), empty), DataError);
    Eigen::VectorXd three(3);
    three << 0.2, 0.3, 0.5;
    CHECK_THROWS_AS(confidence(vec2(0.5, 0.5), three, m), DataError);
    CHECK_THROWS_AS(confidence_ablation(vec2(0.0, 0.0), vec2(0.5, 0.5)), DataError);
}

TEST_CASE("select filters, sorts, and caps") {
    auto mk = [](SampleId id, double score) {
        Confidence c;
        c.sample = std::move(id);
        c.score = score;
        c.contribution = vec2(score, 0.0);
        c.pseudo_label = 0;
        return c;
    };
    std::vector<Confidence> scores = {mk("d", 0.9), mk("a", 0.4), mk("c", 0.9),
                                      mk("b", 0.7), mk("e", 0.95)};

    const MiningResult all = select(scores, 0.5, 10, {});
    REQUIRE(all.selections.size() == 4);
    CHECK(all.selections[0].sample == "e");
    CHECK(all.selections[1].sample == "c");  // 0.9 tie: id order
    CHECK(all.selections[2].sample == "d");
    CHECK(all.selections[3].sample == "b");
    CHECK(all.threshold_used == 0.5);
    CHECK(all.cap_used == 10);

    const MiningResult capped = select(scores, 0.5, 2, {});
    REQUIRE(capped.selections.size() == 2);
    CHECK(capped.selections[0].sample == "e");
    CHECK(capped.selections[1].sample == "c");

    const MiningResult sifted = select(scores, 0.5, 10, {"c", "e"});
    REQUIRE(sifted.selections.size() == 2);
    CHECK(sifted.selections[0].sample == "d");

    CHECK_THROWS_AS(select(scores, 0.5, 0, {}), ConfigError);
    scores.push_back(mk("a", 0.8));
    CHECK_THROWS_AS(select(scores, 0.5, 10, {}), DataError);  // duplicate id
}

TEST_CASE("config validation rejects each bad field") {
    CHECK_NOTHROW(validate(MiningConfig{}));
    auto bad = [](auto&& mutate) {
        MiningConfig cfg;
        mutate(cfg);
        CHECK_THROWS_AS(validate(cfg), ConfigError);
    };
    bad([](MiningConfig& c) { c.knn = 0; });
    bad([](MiningConfig& c) { c.mu = 0.0; });
    bad([](MiningConfig& c) { c.delta = -1.0; });
    bad([](MiningConfig& c) { c.lp_iterations = 0; });
    bad([](MiningConfig& c) { c.lp_stop_tol = -1e-9; });
    bad([](MiningConfig& c) { c.max_labeled_neighbors = 0; });
    bad([](MiningConfig& c) { c.top_s = 0; });
    bad([](MiningConfig& c) { c.k_weight = -0.1; });
    bad([](MiningConfig& c) { c.reduce_dim = 0; });
    bad([](MiningConfig& c) { c.threshold = 1.5; });
    bad([](MiningConfig& c) { c.threshold = -0.1; });
    bad([](MiningConfig& c) { c.cap = 0; });
    bad([](MiningConfig& c) { c.max_iterations = -1; });
    bad([](MiningConfig& c) { c.threads = 0; });
}

TEST_CASE("mine_iteration labels blob samples correctly") {
    const BlobFixture fx = blob_fixture(20, 5);
    const MiningConfig cfg = blob_config();
    const MiningResult result = mine_iteration(fx.cs, fx.partition, cfg, {});

    CHECK(result.scored > 0);
    CHECK(!result.selections.empty());
    for (const Confidence& c : result.selections) {
        CHECK(!fx.partition.is_labeled(c.sample));
        // Blob membership is encoded in the id index.
        const int expect = std::stoi(c.sample.substr(1)) < 20 ? 0 : 1;
        CHECK(c.pseudo_label == expect);
        CHECK(c.score >= 0.0);
        CHECK(c.score <= 1.0 + 1e-9);
    }
    // Scores arrive sorted descending with ids breaking ties.
    for (std::size_t i = 1; i < result.selections.size(); ++i) {
        const auto& prev = result.selections[i - 1];
        const auto& cur = result.selections[i];
        CHECK((prev.score > cur.score ||
               (prev.score == cur.score && prev.sample < cur.sample)));
    }
}

TEST_CASE("mine_iteration respects the sift set and the cap") {
    const BlobFixture fx = blob_fixture(20, 7);
    MiningConfig cfg = blob_config();
    const MiningResult first = mine_iteration(fx.cs, fx.partition, cfg, {});
    REQUIRE(first.selections.size() >= 3);

    std::set<SampleId> sift;
    for (int i = 0; i < 3; ++i) sift.insert(first.selections[i].sample);
    const MiningResult second = mine_iteration(fx.cs, fx.partition, cfg, sift);
    for (const Confidence& c : second.selections) CHECK(sift.count(c.sample) == 0);

    cfg.cap = 2;
    const MiningResult capped = mine_iteration(fx.cs, fx.partition, cfg, {});
    CHECK(capped.selections.size() == 2);
    CHECK(capped.cap_used == 2);
}

TEST_CASE("mine_iteration is identical for any thread count") {
    const BlobFixture fx = blob_fixture(25, 9);
    MiningConfig cfg = blob_config();
    for (Criterion crit : {Criterion::full, Criterion::ablation}) {
        cfg.criterion = crit;
        cfg.threads = 1;
        const MiningResult one = mine_iteration(fx.cs, fx.partition, cfg, {});
        cfg.threads = 4;
        const MiningResult four = mine_iteration(fx.cs, fx.partition, cfg, {});
        REQUIRE(one.selections.size() == four.selections.size());
        for (std::size_t i = 0; i < one.selections.size(); ++i) {
            CHECK(one.selections[i].sample == four.selections[i].sample);
            CHECK(one.selections[i].score == four.selections[i].score);
            CHECK(one.selections[i].pseudo_label == four.selections[i].pseudo_label);
        }
        CHECK(one.scored == four.scored);
        CHECK(one.unminable == four.unminable);
    }
}

TEST_CASE("to_pseudo_labels carries scores and the iteration") {
    const BlobFixture fx = blob_fixture(15, 13);
    MiningConfig cfg = blob_config();
    cfg.cap = 4;
    MiningResult result = mine_iteration(fx.cs, fx.partition, cfg, {});
    result.iteration = 7;
    const auto rows = to_pseudo_labels(result);
    REQUIRE(rows.size() == result.selections.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].id == result.selections[i].sample);
        CHECK(rows[i].class_index == result.selections[i].pseudo_label);
        CHECK(rows[i].confidence == result.selections[i].score);
        CHECK(rows[i].iteration == 7);
    }
}

TEST_CASE("run_loop grows the labeled pool without reselection") {
    // Three snapshots of the same blobs: two consecutive co-spaces.
    const BlobFixture a = blob_fixture(20, 21, 0.2);
    auto spaces = std::make_shared<std::vector<FeatureSpace>>();
    spaces->push_back(a.cs.before);
    spaces->push_back(a.cs.after);
    {
        Eigen::MatrixXd third = a.cs.after.matrix();
        third.array() *= 1.05;
        spaces->emplace_back(a.cs.after.ids(), third);
    }

    MiningConfig cfg = blob_config();
    cfg.cap = 5;
    cfg.max_iterations = 10;  // provider runs out first
    MemorySequenceProvider provider(spaces);
    const LoopOutput out = run_loop(provider, a.partition, cfg);

    REQUIRE(out.results.size() == 2);
    CHECK(out.results[0].iteration == 1);
    CHECK(out.results[1].iteration == 2);

    std::set<SampleId> seen;
    std::size_t total = 0;
    for (const MiningResult& r : out.results) {
        for (const Confidence& c : r.selections) {
            CHECK(seen.insert(c.sample).second);  // never selected twice
            CHECK(!a.partition.is_labeled(c.sample));
        }
        total += r.selections.size();
    }
    CHECK(out.partition.labeled_count() == a.partition.labeled_count() + total);
    CHECK(out.partition.total() == a.partition.total());
    // Selections carry provenance from their iteration.
    for (const MiningResult& r : out.results)
        for (const Confidence& c : r.selections) {
            REQUIRE(out.partition.labeled().at(c.sample).provenance.has_value());
            CHECK(out.partition.labeled().at(c.sample).provenance->iteration == r.iteration);
        }
}

TEST_CASE("run_loop honors max_iterations") {
    const BlobFixture a = blob_fixture(15, 23, 0.2);
    auto spaces = std::make_shared<std::vector<FeatureSpace>>();
    for (int i = 0; i < 5; ++i) {
        Eigen::MatrixXd m = a.cs.before.matrix();
        m.array() += 0.01 * i;
        spaces->emplace_back(a.cs.before.ids(), m);
    }
    MiningConfig cfg = blob_config();
    cfg.cap = 3;
    cfg.max_iterations = 2;
    MemorySequenceProvider provider(spaces);
    const LoopOutput out = run_loop(provider, a.partition, cfg);
    CHECK(out.results.size() == 2);

    cfg.max_iterations = 0;
    MemorySequenceProvider empty_ok(spaces);
    const LoopOutput none = run_loop(empty_ok, a.partition, cfg);
    CHECK(none.results.empty());
    CHECK(none.partition.labeled_count() == a.partition.labeled_count());
}

TEST_CASE("run_loop needs at least two spaces") {
    const BlobFixture a = blob_fixture(10, 27);
    MiningConfig cfg = blob_config();
    auto one = std::make_shared<std::vector<FeatureSpace>>();
    one->push_back(a.cs.before);
    MemorySequenceProvider provider(one);
    CHECK_THROWS_AS(run_loop(provider, a.partition, cfg), DataError);

    auto zero = std::make_shared<std::vector<FeatureSpace>>();
    MemorySequenceProvider empty(zero);
    CHECK_THROWS_AS(run_loop(empty, a.partition, cfg), DataError);
}
