#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "btlab/grid.hpp"
#include "btlab/rng.hpp"

using namespace btlab;

namespace {

Field sampled(const Grid1D& g, double (*fn)(double)) {
    ArrayXd s(g.n);
    for (Index i = 0; i < g.n; ++i) s[i] = fn(g.x(i));
    return Field{g, s};
}

Field random_field(const Grid1D& g, SplitMix64& rng) {
    ArrayXd s(g.n);
    for (Index i = 0; i < g.n; ++i) s[i] = rng.symmetric();
    return Field{g, s};
}

} // namespace

TEST_CASE("grid construction and validation") {
    const Grid1D g = make_grid(-1.0, 0.25, 9);
    CHECK(g.x(0) == -1.0);
    CHECK(g.x(8) == doctest::Approx(1.0));
    CHECK(g.xs().size() == 9);
    CHECK_THROWS_AS(make_grid(0.0, 0.0, 5), InvalidValue);
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 1), InvalidValue);
    CHECK_THROWS_AS(make_field(g, ArrayXd::Zero(3)), GridMismatch);
    ArrayXd bad = ArrayXd::Zero(9);
    bad[4] = std::nan("");
    CHECK_THROWS_AS(make_field(g, bad), InvalidValue);
}

TEST_CASE("l2_norm on reference inputs") {
    const Grid1D unit = make_grid(0.0, 0.01, 101);
    CHECK(l2_norm(zero_field(unit)) == 0.0);

    const Field ones{unit, ArrayXd::Ones(unit.n)};
    CHECK(l2_norm(ones) == doctest::Approx(1.0).epsilon(1e-12));

    const Grid1D wide = make_grid(-20.0, 0.01, 4001);
    const Field sech = sampled(wide, [](double x) { return 1.0 / std::cosh(x); });
    CHECK(std::abs(l2_norm(sech) - std::sqrt(2.0)) < 1e-6);
}

TEST_CASE("h1_norm on reference inputs") {
    const Grid1D unit = make_grid(0.0, 0.01, 101);
    CHECK(h1_norm(zero_field(unit)) == 0.0);

    const Field c{unit, ArrayXd::Constant(unit.n, -3.5)};
    CHECK(h1_norm(c) == doctest::Approx(3.5).epsilon(1e-12));

    const Grid1D wide = make_grid(-20.0, 0.01, 4001);
    const Field sech = sampled(wide, [](double x) { return 1.0 / std::cosh(x); });
    CHECK(std::abs(h1_norm(sech) - std::sqrt(2.0 + 2.0 / 3.0)) < 1e-4);
}

TEST_CASE("diff_x exactness and accuracy") {
    const Grid1D g = make_grid(-2.0, 0.01, 401);
    Field lin = sampled(g, [](double x) { return 3.0 * x; });
    const Field dl = diff_x(lin);
    CHECK((dl.samples - 3.0).abs().maxCoeff() < 1e-10);

    const Field c{g, ArrayXd::Constant(g.n, 5.0)};
    CHECK(sup_norm(diff_x(c)) == 0.0);

    const Field s = sampled(g, [](double x) { return std::sin(x); });
    const Field ds = diff_x(s);
    double worst = 0.0;
    for (Index i = 1; i + 1 < g.n; ++i)
        worst = std::max(worst, std::abs(ds.samples[i] - std::cos(g.x(i))));
    CHECK(worst < g.dx * g.dx);

    const Grid1D tiny = make_grid(0.0, 1.0, 2);
    CHECK_THROWS_AS(diff_x(Field{tiny, ArrayXd::Zero(2)}), GridTooSmall);
}

TEST_CASE("sequence norms") {
    const LatticeWindow w = make_window(-3, 7);
    CHECK(l2_seq(zero_seq(w)) == 0.0);

    ArrayXd delta = ArrayXd::Zero(7);
    delta[2] = 1.0;
    CHECK(l2_seq(Seq{w, delta}) == 1.0);

    const LatticeWindow w2 = make_window(0, 2);
    ArrayXd py(2);
    py << 3.0, 4.0;
    CHECK(l2_seq(Seq{w2, py}) == doctest::Approx(5.0));

    ArrayXd two(2);
    two << -2.0, 1.0;
    CHECK(sup_norm(Seq{w2, two}) == 2.0);
}

TEST_CASE("sup_norm of a sampled peak") {
    const Grid1D g = make_grid(-10.0, 0.5, 41); // includes x = 0
    const Field sech = sampled(g, [](double x) { return 1.0 / std::cosh(x); });
    CHECK(sup_norm(sech) == 1.0);
}

TEST_CASE("norm axioms on random inputs") {
    SplitMix64 rng(2024);
    const Grid1D g = make_grid(-1.0, 0.02, 101);
    const LatticeWindow w = make_window(-8, 17);
    for (int trial = 0; trial < 20; ++trial) {
        const Field f = random_field(g, rng);
        const Field h = random_field(g, rng);
        const double lam = 4.0 * rng.symmetric();
        const Field sum{g, f.samples + h.samples};
        const Field scaled{g, lam * f.samples};

        CHECK(l2_norm(sum) <= l2_norm(f) + l2_norm(h) + 1e-12);
        CHECK(h1_norm(sum) <= h1_norm(f) + h1_norm(h) + 1e-12);
        CHECK(l2_norm(scaled) ==
              doctest::Approx(std::abs(lam) * l2_norm(f)).epsilon(1e-12));
        CHECK(h1_norm(scaled) ==
              doctest::Approx(std::abs(lam) * h1_norm(f)).epsilon(1e-12));
        CHECK(sup_norm(Field{g, f.samples + h.samples}) <=
              sup_norm(f) + sup_norm(h) + 1e-15);

        ArrayXd sv(w.n), tv(w.n);
        for (Index i = 0; i < w.n; ++i) sv[i] = rng.symmetric();
        for (Index i = 0; i < w.n; ++i) tv[i] = rng.symmetric();
        CHECK(l2_seq(Seq{w, sv + tv}) <=
              l2_seq(Seq{w, sv}) + l2_seq(Seq{w, tv}) + 1e-12);
        CHECK(l2_seq(Seq{w, lam * sv}) ==
              doctest::Approx(std::abs(lam) * l2_seq(Seq{w, sv})).epsilon(1e-12));
    }
}

TEST_CASE("diff_x is linear") {
    SplitMix64 rng(99);
    const Grid1D g = make_grid(0.0, 0.1, 57);
    const Field f = random_field(g, rng);
    const Field h = random_field(g, rng);
    const double a = 2.75, b = -0.4;
    const Field lhs = diff_x(Field{g, a * f.samples + b * h.samples});
    const ArrayXd rhs = a * diff_x(f).samples + b * diff_x(h).samples;
    CHECK((lhs.samples - rhs).abs().maxCoeff() < 1e-12);
}

TEST_CASE("norms converge at second order") {
    // sin on [0,1] has non-vanishing boundary slopes, so the trapezoid error
    // is genuinely O(dx^2).
    const double exact_l2 = std::sqrt(0.5 - std::sin(2.0) / 4.0);
    double err[3];
    for (int k = 0; k < 3; ++k) {
        const Index n = 101 * (1 << k) - (1 << k) + 1; // 101, 201, 401
        const Grid1D g = make_grid(0.0, 1.0 / static_cast<double>(n - 1), n);
        const Field f = sampled(g, [](double x) { return std::sin(x); });
        err[k] = std::abs(l2_norm(f) - exact_l2);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.15));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.15));
}
