#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "cospace/dataset.hpp"
#include "cospace/feature_space.hpp"
#include "cospace/knn.hpp"
#include "cospace/propagation.hpp"
#include "cospace/transition.hpp"
#include "cospace/types.hpp"

using namespace cospace;

namespace {

struct Fixture {
    FeatureSpace space;
    Partition partition;
    TransitionMatrix p;
};

// n random points, the first `labeled_per_class` of each class labeled.
Fixture random_fixture(int n, int d, int m, int k, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd f(n, d);
    std::vector<SampleId> ids;
    std::map<SampleId, int> labels;
    for (int i = 0; i < n; ++i) {
        SampleId id = "s" + std::string(i < 10 ? "00" : i < 100 ? "0" : "") + std::to_string(i);
        ids.push_back(id);
        const int cls = i % m;
        for (int j = 0; j < d; ++j) f(i, j) = normal(rng) + 3.0 * cls;
        if (i < 2 * m) labels[id] = cls;
    }
    FeatureSpace space(std::move(ids), std::move(f));
    Partition partition = make_partition(space, labels, m);
    TransitionMatrix p = build_transition(space, build_knn(space, k), 1.0, 0.9);
    return {std::move(space), std::move(partition), std::move(p)};
}

// Dense reference: Y <- P Y, then clamp labeled rows, T times.
Eigen::MatrixXd dense_propagate(const TransitionMatrix& p, const FeatureSpace& space,
                                const Partition& partition, int iterations) {
    const Eigen::Index n = p.size();
    const int m = partition.num_classes();
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t pos = p.row_begin(i); pos < p.row_end(i); ++pos)
            dense(i, p.col(pos)) = p.value(pos);

    Eigen::MatrixXd clamp = Eigen::MatrixXd::Zero(n, m);
    std::vector<bool> labeled(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const SampleId& id = space.ids()[i];
        if (partition.is_labeled(id)) {
            labeled[i] = true;
            clamp.row(i) = partition.label_vector(id).transpose();
        }
    }
    Eigen::MatrixXd y = clamp;
    for (int t = 0; t < iterations; ++t) {
        y = dense * y;
        for (Eigen::Index i = 0; i < n; ++i)
            if (labeled[i]) y.row(i) = clamp.row(i);
    }
    return y;
}

}  // namespace

TEST_CASE("propagation matches a dense reference on random graphs") {
    std::mt19937 meta(99);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 30 + static_cast<int>(meta() % 50);
        const int m = 2 + static_cast<int>(meta() % 3);
        const Fixture fx = random_fixture(n, 3, m, 5, meta());
        const SoftLabels soft = propagate(fx.p, fx.space.ids(), fx.partition, 50);
        const Eigen::MatrixXd expect = dense_propagate(fx.p, fx.space, fx.partition, 50);
        CHECK((soft.matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("labeled rows are exactly their one-hot labels") {
    const Fixture fx = random_fixture(60, 3, 3, 6, 7);
    const SoftLabels soft = propagate(fx.p, fx.space.ids(), fx.partition, 50);
    for (const auto& [id, entry] : fx.partition.labeled()) {
        CHECK(soft.is_labeled_row(id));
        const Eigen::RowVectorXd row = soft.row(id);
        for (int c = 0; c < fx.partition.num_classes(); ++c)
            CHECK(row(c) == (c == entry.class_index ? 1.0 : 0.0));
    }
    for (const SampleId& id : fx.partition.unlabeled()) CHECK(!soft.is_labeled_row(id));
}

TEST_CASE("unlabeled row mass stays within [0, 1]") {
    const Fixture fx = random_fixture(80, 4, 4, 8, 13);
    const SoftLabels soft = propagate(fx.p, fx.space.ids(), fx.partition, 50);
    for (const SampleId& id : fx.partition.unlabeled()) {
        const Eigen::RowVectorXd row = soft.row(id);
        CHECK(row.minCoeff() >= 0.0);
        CHECK(row.sum() <= 1.0 + 1e-9);
    }
}

TEST_CASE("unreached rows normalize to nullopt") {
    // Two tight clusters far apart; only cluster one is labeled. With K = 1
    // every sample links inside its own cluster, so cluster two gets no mass.
    Eigen::MatrixXd f(6, 1);
    f << 0.0, 0.1, 0.2, 1e6, 1e6 + 0.1, 1e6 + 0.2;
    const FeatureSpace space({"a", "b", "c", "x", "y", "z"}, f);
    const Partition partition = make_partition(space, {{"a", 0}, {"b", 1}}, 2);
    const TransitionMatrix p = build_transition(space, build_knn(space, 1), 1.0);
    const SoftLabels soft = propagate(p, space.ids(), partition, 50);

    CHECK(!soft.is_unreached("c"));
    REQUIRE(soft.normalized_row("c").has_value());
    const Eigen::VectorXd c = *soft.normalized_row("c");
    CHECK(c.sum() == doctest::Approx(1.0).epsilon(1e-12));

    for (const SampleId far : {"x", "y", "z"}) {
        CHECK(soft.is_unreached(far));
        CHECK(!soft.normalized_row(far).has_value());
    }
}

TEST_CASE("stop_tol ends the loop early on a converged graph") {
    const Fixture fx = random_fixture(50, 3, 2, 5, 21);
    const SoftLabels full = propagate(fx.p, fx.space.ids(), fx.partition, 500, 0.0);
    CHECK(full.iterations_run() == 500);
    const SoftLabels early = propagate(fx.p, fx.space.ids(), fx.partition, 500, 1e-13);
    CHECK(early.iterations_run() < 500);
    CHECK((early.matrix() - full.matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("propagation is identical for any thread count") {
    const Fixture fx = random_fixture(70, 4, 3, 7, 29);
    const SoftLabels one = propagate(fx.p, fx.space.ids(), fx.partition, 50, 0.0, 1);
    const SoftLabels four = propagate(fx.p, fx.space.ids(), fx.partition, 50, 0.0, 4);
    CHECK(one.matrix() == four.matrix());
}

TEST_CASE("propagate validates ids against the partition") {
    const Fixture fx = random_fixture(20, 2, 2, 3, 31);
    std::vector<SampleId> wrong = fx.space.ids();
    wrong[0] = "not-a-sample";
    CHECK_THROWS_AS(propagate(fx.p, wrong, fx.partition, 10), DataError);
    wrong = fx.space.ids();
    wrong.pop_back();
    CHECK_THROWS_AS(propagate(fx.p, wrong, fx.partition, 10), DataError);
}

TEST_CASE("soft label dump lists one row per sample") {
    const Fixture fx = random_fixture(12, 2, 2, 3, 37);
    const SoftLabels soft = propagate(fx.p, fx.space.ids(), fx.partition, 20);
    std::ostringstream out;
    soft.dump(out);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(line.rfind(fx.space.ids()[rows] + "\t", 0) == 0);
        ++rows;
    }
    CHECK(rows == 12);
}

TEST_CASE("intrinsic_variation propagates both sides against the same labels") {
    const Fixture fx = random_fixture(40, 3, 2, 5, 41);
    // After side: the same points, shifted; geometry unchanged.
    Eigen::MatrixXd shifted = fx.space.matrix();
    shifted.array() += 0.5;
    const CoSpace cs{fx.space, FeatureSpace(fx.space.ids(), shifted)};

    PropagationParams params;
    params.knn = 5;
    const auto [before, after] = intrinsic_variation(cs, fx.partition, params);
    CHECK(before.size() == 40);
    CHECK(after.size() == 40);
    // A rigid shift leaves distances, and so the whole propagation, unchanged.
    CHECK((before.matrix() - after.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& [id, entry] : fx.partition.labeled()) {
        CHECK(before.row(id)(entry.class_index) == 1.0);
        CHECK(after.row(id)(entry.class_index) == 1.0);
    }
}
