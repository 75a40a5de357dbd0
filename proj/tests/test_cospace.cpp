#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "cospace/feature_space.hpp"
#include "cospace/reduce.hpp"
#include "cospace/types.hpp"

using namespace cospace;

namespace {

FeatureSpace random_space(int n, int d, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd f(n, d);
    std::vector<SampleId> ids;
    for (int i = 0; i < n; ++i) {
        ids.push_back("s" + std::to_string(100 + i));
        for (int j = 0; j < d; ++j) f(i, j) = normal(rng);
    }
    return FeatureSpace(std::move(ids), std::move(f));
}

}  // namespace

TEST_CASE("feature space validates its inputs") {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2, 3);
    CHECK_NOTHROW(FeatureSpace({"a", "b"}, f));
    CHECK_THROWS_AS(FeatureSpace({"a"}, f), DataError);             // id/row mismatch
    CHECK_THROWS_AS(FeatureSpace({"a", "a"}, f), DataError);        // duplicate id
    CHECK_THROWS_AS(FeatureSpace({"a", ""}, f), DataError);         // empty id

    Eigen::MatrixXd bad = f;
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(FeatureSpace({"a", "b"}, bad), DataError);
    bad(1, 2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(FeatureSpace({"a", "b"}, bad), DataError);
}

TEST_CASE("feature space row lookup") {
    Eigen::MatrixXd f(2, 2);
    f << 1, 2, 3, 4;
    const FeatureSpace space({"x", "y"}, f);
    CHECK(space.size() == 2);
    CHECK(space.dim() == 2);
    CHECK(space.row_of("y") == 1);
    CHECK(space.contains("x"));
    CHECK(!space.contains("z"));
    CHECK(space.row("y")(0) == 3.0);
    CHECK_THROWS_AS(space.row_of("z"), DataError);
}

TEST_CASE("make_cospace aligns the after side to the before order") {
    Eigen::MatrixXd fb(3, 2);
    fb << 0, 0, 1, 1, 2, 2;
    Eigen::MatrixXd fa(3, 1);
    fa << 20, 0, 10;  // rows for c, a, b
    const CoSpace cs = make_cospace(FeatureSpace({"a", "b", "c"}, fb),
                                    FeatureSpace({"c", "a", "b"}, fa));
    CHECK(cs.before.ids() == cs.after.ids());
    CHECK(cs.after.ids() == std::vector<SampleId>{"a", "b", "c"});
    CHECK(cs.after.matrix()(0, 0) == 0.0);
    CHECK(cs.after.matrix()(1, 0) == 10.0);
    CHECK(cs.after.matrix()(2, 0) == 20.0);
    // Dimensions may legitimately differ between the two sides.
    CHECK(cs.before.dim() == 2);
    CHECK(cs.after.dim() == 1);
}

TEST_CASE("make_cospace rejects mismatched id sets") {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2, 1);
    CHECK_THROWS_AS(make_cospace(FeatureSpace({"a", "b"}, f), FeatureSpace({"a", "c"}, f)),
                    DataError);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 1);
    CHECK_THROWS_AS(make_cospace(FeatureSpace({"a", "b"}, f), FeatureSpace({"a", "b", "c"}, g)),
                    DataError);
}

TEST_CASE("reduce method parsing") {
    CHECK(parse_reduce_method("pca") == ReduceMethod::pca);
    CHECK(parse_reduce_method("random-projection") == ReduceMethod::random_projection);
    CHECK(parse_reduce_method("identity") == ReduceMethod::identity);
    CHECK_THROWS_AS(parse_reduce_method("umap"), ConfigError);
    CHECK(to_string(ReduceMethod::pca) == "pca");
    CHECK(to_string(ReduceMethod::identity) == "identity");
}

TEST_CASE("identity reduce keeps the leading coordinates") {
    const FeatureSpace space = random_space(5, 4, 7);
    const FeatureSpace out = reduce(space, 2, ReduceMethod::identity, 0);
    CHECK(out.ids() == space.ids());
    CHECK(out.dim() == 2);
    CHECK(out.matrix() == space.matrix().leftCols(2));
    // Reducing to the full dimension is the identity map.
    CHECK(reduce(space, 4, ReduceMethod::identity, 0).matrix() == space.matrix());
}

TEST_CASE("pca model is orthonormal with descending variances") {
    const FeatureSpace space = random_space(40, 6, 11);
    const PcaModel model = fit_pca(space.matrix(), 4);
    const Eigen::MatrixXd gram = model.components.transpose() * model.components;
    CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
    for (int j = 0; j + 1 < 4; ++j) CHECK(model.variances(j) >= model.variances(j + 1) - 1e-12);
    CHECK(model.rank == 4);

    // Sign convention: each column's largest-magnitude coordinate is positive.
    for (int j = 0; j < 4; ++j) {
        Eigen::Index arg = 0;
        model.components.col(j).cwiseAbs().maxCoeff(&arg);
        CHECK(model.components(arg, j) > 0.0);
    }
}

TEST_CASE("pca projection preserves pairwise distances at full rank") {
    const FeatureSpace space = random_space(30, 5, 3);
    const FeatureSpace out = reduce(space, 5, ReduceMethod::pca, 0);
    // A full-rank orthonormal change of basis keeps all pairwise distances.
    for (int i = 0; i < 30; ++i)
        for (int j = i + 1; j < 30; ++j) {
            const double before = (space.matrix().row(i) - space.matrix().row(j)).norm();
            const double after = (out.matrix().row(i) - out.matrix().row(j)).norm();
            CHECK(after == doctest::Approx(before).epsilon(1e-9));
        }
}

TEST_CASE("pca zeroes rank-deficient directions") {
    // Ten points on a line in 3-D: rank 1 after centering.
    Eigen::MatrixXd f(10, 3);
    for (int i = 0; i < 10; ++i) f.row(i) = Eigen::RowVector3d(1.0, -2.0, 0.5) * i;
    std::vector<SampleId> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("p" + std::to_string(i));
    const FeatureSpace space(ids, f);

    ReduceInfo info;
    const FeatureSpace out = reduce(space, 3, ReduceMethod::pca, 0, &info);
    CHECK(info.rank == 1);
    CHECK(info.rank_deficient);
    // Components beyond the rank project everything to exactly zero.
    CHECK(out.matrix().col(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.matrix().col(2).cwiseAbs().maxCoeff() == 0.0);
    // The informative direction still separates the points.
    CHECK(out.matrix().col(0).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("reduce is deterministic") {
    const FeatureSpace space = random_space(25, 8, 19);
    for (ReduceMethod method :
         {ReduceMethod::pca, ReduceMethod::random_projection, ReduceMethod::identity}) {
        const FeatureSpace a = reduce(space, 3, method, 42);
        const FeatureSpace b = reduce(space, 3, method, 42);
        CHECK(a.matrix() == b.matrix());
    }
    // Different seeds give different random projections.
    const FeatureSpace p = reduce(space, 3, ReduceMethod::random_projection, 1);
    const FeatureSpace q = reduce(space, 3, ReduceMethod::random_projection, 2);
    CHECK(p.matrix() != q.matrix());
}

TEST_CASE("reduce validates the target dimension") {
    const FeatureSpace space = random_space(10, 4, 5);
    CHECK_THROWS_AS(reduce(space, 0, ReduceMethod::pca, 0), ConfigError);
    // Exceeding the space dimension depends on the data, not the config.
    CHECK_THROWS_AS(reduce(space, 5, ReduceMethod::pca, 0), DataError);
}

TEST_CASE("reduce_cospace fits each side on its own data") {
    const FeatureSpace before = random_space(30, 6, 23);
    FeatureSpace after = random_space(30, 6, 29);

    ReduceInfo ib, ia;
    const CoSpace out =
        reduce_cospace({before, after}, 3, ReduceMethod::pca, 0, &ib, &ia);
    CHECK(out.before.dim() == 3);
    CHECK(out.after.dim() == 3);
    CHECK(out.before.matrix() == reduce(before, 3, ReduceMethod::pca, 0).matrix());
    CHECK(out.after.matrix() == reduce(after, 3, ReduceMethod::pca, 0).matrix());

    // Identical sides stay identical through the reduction.
    const CoSpace same = reduce_cospace({before, before}, 3, ReduceMethod::random_projection, 9);
    CHECK(same.before.matrix() == same.after.matrix());
}
