#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "btlab/rng.hpp"
#include "btlab/toda.hpp"

using namespace btlab;

namespace {

LatticeWindow wide_window() { return make_window(-60, 121); }

double sup_diff(const TodaState& a, const TodaState& b) {
    return std::max((a.q.values - b.q.values).abs().maxCoeff(),
                    (a.p.values - b.p.values).abs().maxCoeff());
}

// Positions of the two largest separated pulses of r, sorted ascending.
std::vector<double> two_peaks(const TodaState& s) {
    const ArrayXd r = toda_displacements(s);
    Index i1 = 0;
    r.maxCoeff(&i1);
    // Second peak: largest local max at least 8 sites away from the first.
    Index i2 = -1;
    double best = -1.0;
    for (Index i = 1; i + 1 < r.size(); ++i) {
        if (std::abs(static_cast<double>(i - i1)) < 8) continue;
        if (r[i] >= r[i - 1] && r[i] >= r[i + 1] && r[i] > best) {
            best = r[i];
            i2 = i;
        }
    }
    REQUIRE(i2 >= 0);
    const auto refine = [&](Index im) {
        double off = 0.0;
        const double den = r[im - 1] - 2.0 * r[im] + r[im + 1];
        if (den != 0.0) off = 0.5 * (r[im - 1] - r[im + 1]) / den;
        return static_cast<double>(s.window.j0 + static_cast<long>(im)) + off;
    };
    double p1 = refine(i1), p2 = refine(i2);
    if (p1 > p2) std::swap(p1, p2);
    return {p1, p2};
}

} // namespace

TEST_CASE("soliton parameters") {
    for (double k : {0.3, 0.5, 1.0, 1.5}) {
        const SolitonParams sp = make_soliton_params(k, 0.0);
        CHECK(sp.speed() > 1.0);
        CHECK(std::abs(sp.speed() * k - std::sinh(k)) < 1e-12);
        CHECK(sp.q_drop() == 2.0 * k);
    }
    CHECK_THROWS_AS(make_soliton_params(-1.0, 0.0), InvalidValue);
}

TEST_CASE("vacuum state") {
    const LatticeWindow w = wide_window();
    const TodaState v = toda_vacuum(w);
    CHECK(sup_norm(v.q) == 0.0);
    CHECK(sup_norm(v.p) == 0.0);
    CHECK(toda_energy(v) == 0.0);
    CHECK(sup_diff(toda_step(v, 0.01), v) == 0.0);
}

TEST_CASE("soliton closed form") {
    const LatticeWindow w = wide_window();
    const SolitonParams sp = make_soliton_params(1.0, 0.0);
    const TodaState s = toda_soliton(sp, w);

    // Raw cosh-ratio value at site 0 before the additive repair.
    const double q0_raw = s.q.values[w.offset(0)] + sp.kappa;
    CHECK(q0_raw == doctest::Approx(-std::log(std::cosh(1.0))).epsilon(1e-12));

    // Residual against the vacuum pins the additive constant and signs.
    for (double k : {0.5, 1.0, 1.5}) {
        const TodaState sk = toda_soliton(make_soliton_params(k, 0.0), w);
        CHECK(toda_bt_residual_sup(sk, toda_vacuum(w), k) < 1e-10);
        CHECK(std::abs(std::abs(sk.q_right - sk.q_left) - 2.0 * k) < 1e-10);
        CHECK(std::abs(sk.q.values[0] - sk.q_left) < 1e-12);
        CHECK(std::abs(sk.q.values[w.n - 1] - sk.q_right) < 1e-12);
    }

    CHECK_THROWS_AS(toda_soliton(make_soliton_params(0.3, 0.0), make_window(-8, 17)),
                    WindowTooNarrow);
}

TEST_CASE("lattice energy") {
    const LatticeWindow w = wide_window();
    const TodaState s = toda_soliton(make_soliton_params(1.0, 0.0), w);
    const double e = toda_energy(s);
    CHECK(e > 0.0);
    // Frozen regression value for the kappa=1 soliton energy.
    CHECK(e == doctest::Approx(1.6268604078470186).epsilon(1e-9));

    // Invariant under a global shift of q.
    TodaState shifted = s;
    shifted.q.values += 3.7;
    CHECK(std::abs(toda_energy(shifted) - e) < 1e-12);
}

TEST_CASE("velocity-Verlet step properties") {
    const LatticeWindow w = wide_window();
    const TodaState s = toda_soliton(make_soliton_params(1.0, 0.0), w);

    // Exact time reversal.
    TodaState fwd = toda_step(s, 0.01);
    fwd.p.values = -fwd.p.values;
    TodaState back = toda_step(fwd, 0.01);
    back.p.values = -back.p.values;
    CHECK(sup_diff(back, s) < 1e-12);

    CHECK_THROWS_AS(toda_step(s, 0.5), InvalidValue);
}

TEST_CASE("evolved soliton is the phase-shifted closed form") {
    const LatticeWindow w = make_window(-45, 76); // sites -45..30
    const SolitonParams sp = make_soliton_params(1.0, 15.0);
    const TodaState s = toda_soliton(sp, w);
    const auto samples = toda_evolve(s, 10.0, 0.01, 1000);
    const SolitonParams shifted =
        make_soliton_params(1.0, 15.0 - std::sinh(1.0) * 10.0);
    const double err =
        toda_distance(samples.back().state, toda_soliton_profile(shifted, w));
    MESSAGE("l2 error against the shifted profile ", err);
    CHECK(err < 1e-3);
}

TEST_CASE("energy and momentum conservation along evolution") {
    const LatticeWindow w = make_window(-50, 91); // sites -50..40
    const TodaState s = toda_soliton(make_soliton_params(1.0, 25.0), w);
    const auto samples = toda_evolve(s, 20.0, 0.01, 200);
    const double e0 = toda_energy(samples.front().state);
    const double p0 = toda_momentum(samples.front().state);
    double edrift = 0.0, pdrift = 0.0;
    for (const auto& smp : samples) {
        edrift = std::max(edrift,
                          std::abs(toda_energy(smp.state) - e0) / std::abs(e0));
        pdrift = std::max(pdrift, std::abs(toda_momentum(smp.state) - p0));
    }
    MESSAGE("relative energy drift ", edrift, ", momentum drift ", pdrift);
    // Frozen regression bound: measured 2.46e-6 at dt=0.01 (pure dt^2
    // oscillation of the scheme, bounded in T).
    CHECK(edrift < 3e-6);
    CHECK(pdrift < 1e-10);

    CHECK(toda_evolve(s, 0.0, 0.01, 5).size() == 1);
}

TEST_CASE("measured soliton speed matches sinh(kappa)/kappa") {
    const LatticeWindow w = make_window(-50, 91);
    const TodaState s = toda_soliton(make_soliton_params(1.0, 25.0), w);
    const auto samples = toda_evolve(s, 20.0, 0.01, 100);
    // Least-squares slope of the tracked peak position.
    double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
    const double n = static_cast<double>(samples.size());
    for (const auto& smp : samples) {
        const double pos = toda_peak_position(smp.state);
        st += smp.t;
        sx += pos;
        stt += smp.t * smp.t;
        stx += smp.t * pos;
    }
    const double slope = (n * stx - st * sx) / (n * stt - st * st);
    MESSAGE("measured speed ", slope);
    CHECK(std::abs(slope - std::sinh(1.0)) / std::sinh(1.0) < 0.01);
}

TEST_CASE("transform residual cases") {
    const LatticeWindow w = wide_window();
    const TodaState v = toda_vacuum(w);
    CHECK(toda_bt_residual_sup(v, v, 0.4) < 1e-14);
    CHECK(toda_bt_residual_sup(v, v, 1.3) < 1e-14);

    // F depends on q and q' only through differences of shifted entries:
    // shifting both by the same constant changes nothing.
    SplitMix64 rng(7);
    ArrayXd q(w.n), p(w.n), qp(w.n), pp(w.n);
    for (Index i = 0; i < w.n; ++i) {
        q[i] = 0.3 * rng.symmetric();
        p[i] = 0.3 * rng.symmetric();
        qp[i] = 0.3 * rng.symmetric();
        pp[i] = 0.3 * rng.symmetric();
    }
    const TodaState x{w, Seq{w, q}, Seq{w, p}, 0.1, -0.2};
    const TodaState y{w, Seq{w, qp}, Seq{w, pp}, -0.3, 0.4};
    const double c = 1.7;
    const TodaState xs{w, Seq{w, q + c}, Seq{w, p}, 0.1 + c, -0.2 + c};
    const TodaState ys{w, Seq{w, qp + c}, Seq{w, pp}, -0.3 + c, 0.4 + c};
    const auto [r1a, r2a] = toda_bt_residual(x, y, 0.8);
    const auto [r1b, r2b] = toda_bt_residual(xs, ys, 0.8);
    CHECK((r1a.values - r1b.values).abs().maxCoeff() < 1e-12);
    CHECK((r2a.values - r2b.values).abs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(toda_bt_residual(toda_vacuum(make_window(0, 5)), v, 1.0),
                    WindowMismatch);
}

TEST_CASE("forward transform reproduces the closed-form soliton") {
    const LatticeWindow w = wide_window();
    const TodaState v = toda_vacuum(w);
    for (double k : {0.5, 1.0, 1.5}) {
        const SolitonParams sp = make_soliton_params(k, 0.0);
        const long anchor = 0;
        const TodaState built =
            toda_bt_forward(v, k, soliton_seed(sp, anchor), anchor);
        CHECK(sup_diff(built, toda_soliton(sp, w)) < 1e-8);
        CHECK(std::abs(std::abs(built.q_right - built.q_left) - 2.0 * k) <
              1e-10);
    }
    // A seed outside the admissible interval hits the log domain.
    CHECK_THROWS_AS(toda_bt_forward(v, 1.0, 0.5, 0), LogDomain);
}

TEST_CASE("two-soliton construction and speeds") {
    // Fast component ahead of the slow one, so the peaks separate cleanly.
    const LatticeWindow w = make_window(-40, 121); // sites -40..80
    const std::vector<SolitonParams> params = {
        make_soliton_params(0.5, 2.5),  // slow, center -5
        make_soliton_params(1.0, -5.0), // fast, center +5
    };
    const TodaState two = toda_multisoliton(params, w);
    const TodaState one = toda_multisoliton({params[0]}, w);
    CHECK(toda_bt_residual_sup(two, one, 1.0) < 1e-8);
    CHECK(std::abs(std::abs(two.q_right - two.q_left) - 3.0) < 1e-8);

    const auto samples = toda_evolve(two, 20.0, 0.01, 250);
    std::vector<double> t, slow_pos, fast_pos;
    for (const auto& smp : samples) {
        const auto peaks = two_peaks(smp.state);
        t.push_back(smp.t);
        slow_pos.push_back(peaks[0]);
        fast_pos.push_back(peaks[1]);
    }
    const auto slope = [&](const std::vector<double>& xs) {
        double st = 0, sx = 0, stt = 0, stx = 0;
        const double n = static_cast<double>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            st += t[i];
            sx += xs[i];
            stt += t[i] * t[i];
            stx += t[i] * xs[i];
        }
        return (n * stx - st * sx) / (n * stt - st * st);
    };
    const double s_slow = slope(slow_pos);
    const double s_fast = slope(fast_pos);
    MESSAGE("measured speeds ", s_slow, " ", s_fast);
    CHECK(std::abs(s_slow - 2.0 * std::sinh(0.5)) / (2.0 * std::sinh(0.5)) <
          0.02);
    CHECK(std::abs(s_fast - std::sinh(1.0)) / std::sinh(1.0) < 0.02);
}

TEST_CASE("multisoliton basics") {
    const LatticeWindow w = wide_window();
    CHECK(sup_diff(toda_multisoliton({}, w), toda_vacuum(w)) == 0.0);

    const SolitonParams sp = make_soliton_params(1.0, 3.0);
    CHECK(sup_diff(toda_multisoliton({sp}, w), toda_soliton(sp, w)) < 1e-8);

    CHECK_THROWS_AS(toda_multisoliton({make_soliton_params(1.0, 0.0),
                                       make_soliton_params(1.0, 5.0)},
                                      w),
                    InvalidValue);
}

TEST_CASE("inverse transform recovers the seed pair") {
    const LatticeWindow w = wide_window();
    const TodaState s = toda_soliton(make_soliton_params(1.0, 0.0), w);
    const TodaInverseResult inv = toda_bt_inverse(s, 0.9);
    CHECK(std::abs(inv.kappa - 1.0) < 1e-6);
    CHECK(toda_distance(inv.y, toda_vacuum(w)) < 1e-6);
    CHECK(toda_bt_residual_sup(s, inv.y, inv.kappa) < 1e-6);
}

TEST_CASE("inverse transform strips the top soliton of a pair") {
    const LatticeWindow w = make_window(-50, 101);
    const std::vector<SolitonParams> params = {
        make_soliton_params(0.5, 1.0),
        make_soliton_params(1.0, -8.0),
    };
    const TodaState two = toda_multisoliton(params, w);
    const TodaInverseResult inv = toda_bt_inverse(two, 1.1);
    CHECK(std::abs(inv.kappa - 1.0) < 1e-6);
    const TodaState one = toda_multisoliton({params[0]}, w);
    CHECK(toda_distance(inv.y, one) < 1e-5);
}

TEST_CASE("inverse transform tolerates a perturbed input") {
    const LatticeWindow w = wide_window();
    const TodaState s = toda_soliton(make_soliton_params(1.0, 0.0), w);
    const double eps = 1e-3;
    ArrayXd bump(w.n);
    for (Index i = 0; i < w.n; ++i) {
        const double j = static_cast<double>(w.j0 + static_cast<long>(i));
        bump[i] = std::exp(-0.125 * j * j);
    }
    bump *= eps / std::sqrt(bump.square().sum());
    const TodaState pert{w, s.q, Seq{w, s.p.values + bump}, s.q_left,
                         s.q_right};
    const TodaInverseResult inv = toda_bt_inverse(pert, 1.0);
    CHECK(toda_bt_residual_sup(pert, inv.y, inv.kappa) < 1e-6);
    const double c_emp = std::abs(inv.kappa - 1.0) / eps;
    MESSAGE("parameter sensitivity |dkappa|/eps = ", c_emp);
    CHECK(c_emp < 10.0);
}

TEST_CASE("linearization coefficient profile") {
    const LatticeWindow w = wide_window();
    const TodaState v = toda_vacuum(w);

    const DiscreteCoefficientProfile flat = toda_alpha(v, v, 1.0);
    CHECK((flat.alpha.values - std::exp(2.0)).abs().maxCoeff() < 1e-12);
    CHECK(!flat.claimed.has_value());

    const TodaState s = toda_soliton(make_soliton_params(1.0, 0.0), w);
    const DiscreteCoefficientProfile cp = toda_alpha(s, v, 1.0);
    CHECK(cp.claimed == DichotomyCase::case1);
    CHECK(std::abs(cp.alpha_minus - std::exp(2.0)) < 1e-6);
    CHECK(std::abs(cp.alpha_plus - std::exp(-2.0)) < 1e-6);

    // Tail sums are finite and stable under widening the window.
    const double dev = tail_deviation_minus(cp) + tail_deviation_plus(cp);
    const LatticeWindow w2 = make_window(-75, 151);
    const DiscreteCoefficientProfile cp2 = toda_alpha(
        toda_soliton(make_soliton_params(1.0, 0.0), w2), toda_vacuum(w2), 1.0);
    const double dev2 = tail_deviation_minus(cp2) + tail_deviation_plus(cp2);
    MESSAGE("tail deviation ", dev);
    CHECK(std::abs(dev - dev2) < 1e-8);
}

TEST_CASE("total drop grows by one amplitude per transform") {
    const LatticeWindow w = make_window(-50, 101);
    const TodaState one = toda_multisoliton({make_soliton_params(0.5, 1.0)}, w);
    CHECK(std::abs(std::abs(one.q_right - one.q_left) - 1.0) < 1e-10);
    const TodaState two = toda_multisoliton(
        {make_soliton_params(0.5, 1.0), make_soliton_params(1.0, -6.0)}, w);
    CHECK(std::abs(std::abs(two.q_right - two.q_left) - 3.0) < 1e-8);
}
