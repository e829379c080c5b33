#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "btlab/dichotomy.hpp"
#include "btlab/rng.hpp"

using namespace btlab;

namespace {

Grid1D sym_grid(double half, double dx) {
    const Index n = 2 * static_cast<Index>(std::lround(half / dx)) + 1;
    return make_grid(-half, dx, n);
}

Field tanh_profile(const Grid1D& g, double sign) {
    ArrayXd a(g.n);
    for (Index i = 0; i < g.n; ++i) a[i] = sign * std::tanh(g.x(i));
    return Field{g, a};
}

Field sech_field(const Grid1D& g) {
    ArrayXd f(g.n);
    for (Index i = 0; i < g.n; ++i) f[i] = 1.0 / std::cosh(g.x(i));
    return Field{g, f};
}

// Band-limited random data under a Gaussian envelope, deterministic per seed.
Field random_drive(const Grid1D& g, std::uint64_t seed) {
    SplitMix64 rng(seed);
    ArrayXd f = ArrayXd::Zero(g.n);
    const double span = g.x_end() - g.x0;
    for (int mode = 1; mode <= 8; ++mode) {
        const double c = rng.symmetric();
        const double s = rng.symmetric();
        const double k = 2.0 * std::numbers::pi * mode / span;
        for (Index i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            f[i] += c * std::cos(k * x) + s * std::sin(k * x);
        }
    }
    const double mid = 0.5 * (g.x0 + g.x_end());
    const double w = span / 10.0;
    for (Index i = 0; i < g.n; ++i)
        f[i] *= std::exp(-0.5 * std::pow((g.x(i) - mid) / w, 2));
    return Field{g, f};
}

double back_substitution_residual(const CoefficientProfile& cp, const Field& u,
                                  const Field& f) {
    const ArrayXd r =
        diff_x(u).samples - cp.alpha.samples * u.samples - f.samples;
    return l2_norm(Field{u.grid, r});
}

double discrete_residual(const DiscreteCoefficientProfile& cp, const Seq& u,
                         const Seq& f) {
    double worst = 0.0;
    for (Index i = 0; i + 1 < u.window.n; ++i)
        worst = std::max(worst, std::abs(u.values[i + 1] -
                                         cp.alpha.values[i] * u.values[i] -
                                         f.values[i]));
    return worst;
}

} // namespace

TEST_CASE("profile classification and claims") {
    const Grid1D g = sym_grid(5.0, 0.1);
    CHECK(classify_continuous(1.0, -1.0) == DichotomyCase::case1);
    CHECK(classify_continuous(-0.5, 2.0) == DichotomyCase::case2);
    CHECK(!classify_continuous(1.0, 2.0).has_value());
    CHECK(classify_discrete(2.0, 0.5) == DichotomyCase::case1);
    CHECK(classify_discrete(0.5, 2.0) == DichotomyCase::case2);
    CHECK(!classify_discrete(2.0, 3.0).has_value());

    CHECK_THROWS_AS(make_profile(tanh_profile(g, -1.0), 1.0, -1.0, g.n / 2,
                                 DichotomyCase::case2),
                    WrongCase);
    // Limits exactly on the boundary between the cases are rejected.
    CHECK_THROWS_AS(make_profile(tanh_profile(g, -1.0), 0.0, -1.0, g.n / 2,
                                 DichotomyCase::case1),
                    WrongCase);
    const LatticeWindow w = make_window(-4, 9);
    CHECK_THROWS_AS(make_profile(Seq{w, ArrayXd::Ones(9)}, 1.0, 0.5, 4,
                                 DichotomyCase::case1),
                    WrongCase);
}

TEST_CASE("adjoint solution: analytic and trivial cases") {
    const Grid1D g = sym_grid(10.0, 0.01);
    // alpha = 0 -> mu = 1.
    const CoefficientProfile flat =
        make_profile(zero_field(g), 0.0, 0.0, g.n / 2, std::nullopt);
    CHECK((adjoint_solution(flat).samples - 1.0).abs().maxCoeff() == 0.0);

    // alpha = -tanh, anchored at x = 0 -> mu = cosh.
    const CoefficientProfile cp = make_profile(tanh_profile(g, -1.0), 1.0, -1.0,
                                               g.n / 2, DichotomyCase::case1);
    const Field mu = adjoint_solution(cp);
    double worst = 0.0;
    for (Index i = 0; i < g.n; ++i)
        worst = std::max(worst, std::abs(mu.samples[i] - std::cosh(g.x(i))));
    CHECK(worst < 1e-8 * std::cosh(10.0));
    // Relative error everywhere, not just near the anchor.
    for (Index i = 0; i < g.n; i += 400)
        CHECK(mu.samples[i] ==
              doctest::Approx(std::cosh(g.x(i))).epsilon(1e-8));

    // Overflow is reported, not saturated.
    const Grid1D huge = make_grid(0.0, 1.0, 800);
    const CoefficientProfile steep = make_profile(
        Field{huge, ArrayXd::Constant(800, -2.0)}, 0.0, 0.0, 0, std::nullopt);
    CHECK_THROWS_AS(adjoint_solution(steep), Overflow);
}

TEST_CASE("discrete adjoint solution") {
    const LatticeWindow w = make_window(0, 12);
    const DiscreteCoefficientProfile cp = make_profile(
        Seq{w, ArrayXd::Constant(12, 2.0)}, 2.0, 2.0, 0, std::nullopt);
    const Seq phi = adjoint_solution(cp);
    for (Index i = 0; i < 12; ++i)
        CHECK(phi.values[i] ==
              doctest::Approx(std::pow(2.0, -static_cast<double>(i))));

    ArrayXd neg = ArrayXd::Constant(12, 2.0);
    neg[5] = -1.0;
    const DiscreteCoefficientProfile bad =
        make_profile(Seq{w, neg}, 2.0, 2.0, 0, std::nullopt);
    CHECK_THROWS_AS(adjoint_solution(bad), InvalidValue);
}

TEST_CASE("case 1 continuous: zero data and the x sech x oracle") {
    const Grid1D g = sym_grid(10.0, 0.01);
    const CoefficientProfile cp = make_profile(tanh_profile(g, -1.0), 1.0, -1.0,
                                               g.n / 2, DichotomyCase::case1);
    CHECK(sup_norm(solve_case1(cp, zero_field(g))) == 0.0);

    const Field f = sech_field(g);
    const Field u = solve_case1(cp, f);
    double worst = 0.0;
    for (Index i = 0; i < g.n; ++i)
        worst = std::max(worst,
                         std::abs(u.samples[i] - g.x(i) / std::cosh(g.x(i))));
    CHECK(worst < 1e-6);
    CHECK(back_substitution_residual(cp, u, f) < 1e-6 * (1.0 + l2_norm(f)));

    const CoefficientProfile wrong = make_profile(
        tanh_profile(g, 1.0), -1.0, 1.0, g.n / 2, DichotomyCase::case2);
    CHECK_THROWS_AS(solve_case1(wrong, f), WrongCase);
}

TEST_CASE("case 1 continuous: bound stability over a random ensemble") {
    std::vector<double> ratios[2];
    for (int res = 0; res < 2; ++res) {
        const Grid1D g = sym_grid(10.0, res == 0 ? 0.02 : 0.01);
        const CoefficientProfile cp = make_profile(
            tanh_profile(g, -1.0), 1.0, -1.0, g.n / 2, DichotomyCase::case1);
        for (std::uint64_t k = 0; k < 20; ++k) {
            const Field f = random_drive(g, 1000 + k);
            const Field u = solve_case1(cp, f);
            ratios[res].push_back(h1_norm(u) / l2_norm(f));
            CHECK(back_substitution_residual(cp, u, f) <
                  1e-6 * (1.0 + l2_norm(f)));
        }
    }
    const auto cmax = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    };
    const double c_coarse = cmax(ratios[0]);
    const double c_fine = cmax(ratios[1]);
    CHECK(std::abs(c_coarse - c_fine) / c_fine < 0.10);
}

TEST_CASE("case 1 bound depends on the tails, not the anchor") {
    const Grid1D g = sym_grid(10.0, 0.01);
    const Field alpha = tanh_profile(g, -1.0);
    const CoefficientProfile mid =
        make_profile(alpha, 1.0, -1.0, g.n / 2, DichotomyCase::case1);
    const CoefficientProfile shifted =
        make_profile(alpha, 1.0, -1.0, g.n / 2 + 50, DichotomyCase::case1);
    double c0 = 0.0, c1 = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const Field f = random_drive(g, 7000 + k);
        c0 = std::max(c0, h1_norm(solve_case1(mid, f)) / l2_norm(f));
        c1 = std::max(c1, h1_norm(solve_case1(shifted, f)) / l2_norm(f));
    }
    CHECK(std::abs(c0 - c1) / std::max(c0, c1) < 0.20);
}

TEST_CASE("case 2 continuous: parity oracle, decay and rejection") {
    const Grid1D g = sym_grid(10.0, 0.01);
    const CoefficientProfile cp = make_profile(tanh_profile(g, 1.0), -1.0, 1.0,
                                               g.n / 2, DichotomyCase::case2);

    const auto [u0f, z0] = solve_case2(cp, zero_field(g));
    CHECK(sup_norm(u0f) == 0.0);
    CHECK(z0 == 0.0);

    // f = (sech)' is odd, hence orthogonal to the even adjoint sech.
    ArrayXd fo(g.n);
    for (Index i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        fo[i] = -std::tanh(x) / std::cosh(x);
    }
    const Field f{g, fo};
    const Case2Solution sol = solve_case2(cp, f);
    CHECK(std::abs(sol.u.samples[0]) < 1e-4);
    CHECK(std::abs(sol.u.samples[g.n - 1]) < 1e-4);
    CHECK(sol.u.samples.tail(20).abs().maxCoeff() < 1e-4);
    CHECK(back_substitution_residual(cp, sol.u, f) < 1e-6 * (1.0 + l2_norm(f)));

    // Even data pairs to int sech^2 = 2 and must be rejected.
    CHECK_THROWS_AS(solve_case2(cp, sech_field(g)), NotOrthogonal);
}

TEST_CASE("case 1 discrete: delta data oracle") {
    const LatticeWindow w = make_window(-10, 21); // sites -10..10
    ArrayXd a(21);
    for (Index i = 0; i < 21; ++i) a[i] = (w.j0 + static_cast<long>(i)) < 0 ? 2.0 : 0.5;
    const DiscreteCoefficientProfile cp =
        make_profile(Seq{w, a}, 2.0, 0.5, w.offset(0), DichotomyCase::case1);

    CHECK(sup_norm(solve_case1(cp, zero_seq(w))) == 0.0);

    ArrayXd f = ArrayXd::Zero(21);
    f[w.offset(5)] = 1.0;
    const Seq u = solve_case1(cp, Seq{w, f});
    for (Index i = 0; i < 21; ++i) {
        const long n = w.j0 + static_cast<long>(i);
        const double expected = n >= 6 ? std::pow(2.0, -(n - 6.0)) : 0.0;
        CHECK(u.values[i] == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(discrete_residual(cp, u, Seq{w, f}) < 1e-10);
}

TEST_CASE("case 1 discrete: bound stable under window widening") {
    // The same tapered data restricted to nested windows, so the bound is
    // compared on matching right-hand sides.
    const Index wide_half = 40;
    const LatticeWindow wide = make_window(-static_cast<long>(wide_half),
                                           2 * wide_half + 1);
    std::vector<ArrayXd> data;
    for (std::uint64_t k = 0; k < 20; ++k) {
        SplitMix64 rng(300 + k);
        ArrayXd f(wide.n);
        for (Index i = 0; i < wide.n; ++i) f[i] = rng.symmetric();
        for (Index i = 0; i < wide.n; ++i) {
            const double j = static_cast<double>(wide.j0 + static_cast<long>(i));
            f[i] *= std::exp(-0.05 * j * j);
        }
        data.push_back(std::move(f));
    }
    double cs[2];
    for (int res = 0; res < 2; ++res) {
        const Index half = res == 0 ? 20 : 40;
        const LatticeWindow w =
            make_window(-static_cast<long>(half), 2 * half + 1);
        ArrayXd a(w.n);
        for (Index i = 0; i < w.n; ++i)
            a[i] = (w.j0 + static_cast<long>(i)) < 0 ? 2.0 : 0.5;
        const DiscreteCoefficientProfile cp =
            make_profile(Seq{w, a}, 2.0, 0.5, w.offset(0), DichotomyCase::case1);
        double c = 0.0;
        for (const ArrayXd& f : data) {
            const Seq fs{w, f.segment(wide.offset(w.j0), w.n)};
            const Seq u = solve_case1(cp, fs);
            CHECK(discrete_residual(cp, u, fs) < 1e-10);
            c = std::max(c, l2_seq(u) / l2_seq(fs));
        }
        cs[res] = c;
    }
    CHECK(std::abs(cs[0] - cs[1]) / cs[1] < 0.10);
}

TEST_CASE("case 2 discrete: constructed orthogonality and rejection") {
    const LatticeWindow w = make_window(-26, 53);
    ArrayXd a(w.n);
    for (Index i = 0; i < w.n; ++i)
        a[i] = (w.j0 + static_cast<long>(i)) < 0 ? 0.5 : 2.0;
    const DiscreteCoefficientProfile cp =
        make_profile(Seq{w, a}, 0.5, 2.0, w.offset(0), DichotomyCase::case2);

    const auto zero = solve_case2(cp, zero_seq(w));
    CHECK(sup_norm(zero.u) == 0.0);

    const Seq phi = adjoint_solution(cp);
    SplitMix64 rng(42);
    ArrayXd raw(w.n);
    for (Index i = 0; i < w.n; ++i) raw[i] = rng.symmetric();
    for (Index i = 0; i < w.n; ++i) {
        const double j = static_cast<double>(w.j0 + static_cast<long>(i));
        raw[i] *= std::exp(-0.2 * j * j);
    }
    Seq f{w, raw};
    const double proj = pairing(f, phi) / pairing(phi, phi);
    f.values -= proj * phi.values;

    const DiscreteCase2Solution sol = solve_case2(cp, f);
    CHECK(sol.u.values.head(3).abs().maxCoeff() < 1e-6);
    CHECK(sol.u.values.tail(3).abs().maxCoeff() < 1e-6);
    CHECK(discrete_residual(cp, sol.u, f) < 1e-10);

    CHECK_THROWS_AS(solve_case2(cp, phi), NotOrthogonal);
}

TEST_CASE("pairing") {
    const Grid1D g = sym_grid(20.0, 0.01);
    CHECK(pairing(zero_field(g), sech_field(g)) == 0.0);
    CHECK(std::abs(pairing(sech_field(g), sech_field(g)) - 2.0) < 1e-8);

    ArrayXd odd(g.n);
    for (Index i = 0; i < g.n; ++i)
        odd[i] = g.x(i) * std::exp(-g.x(i) * g.x(i));
    CHECK(std::abs(pairing(Field{g, odd}, sech_field(g))) < 1e-12);

    const Grid1D other = sym_grid(20.0, 0.02);
    CHECK_THROWS_AS(pairing(sech_field(g), sech_field(other)), CarrierMismatch);
}

TEST_CASE("solvers are linear in the data") {
    const Grid1D g = sym_grid(10.0, 0.02);
    const CoefficientProfile cp = make_profile(tanh_profile(g, -1.0), 1.0, -1.0,
                                               g.n / 2, DichotomyCase::case1);
    const Field f1 = random_drive(g, 5);
    const Field f2 = random_drive(g, 6);
    const double lam = -2.25;
    const Field u1 = solve_case1(cp, f1);
    const Field u2 = solve_case1(cp, f2);
    const Field mix = solve_case1(cp, Field{g, f1.samples + lam * f2.samples});
    CHECK((mix.samples - (u1.samples + lam * u2.samples)).abs().maxCoeff() <
          1e-10);
}

TEST_CASE("tail deviations are finite and case-consistent") {
    const Grid1D g = sym_grid(10.0, 0.01);
    const CoefficientProfile cp = make_profile(tanh_profile(g, -1.0), 1.0, -1.0,
                                               g.n / 2, DichotomyCase::case1);
    // int_0^inf |tanh(x) - 1| dx = log 2 on each side.
    CHECK(tail_deviation_minus(cp) == doctest::Approx(std::log(2.0)).epsilon(1e-4));
    CHECK(tail_deviation_plus(cp) == doctest::Approx(std::log(2.0)).epsilon(1e-4));
}
