#include "btlab/dichotomy.hpp"

#include <cmath>
#include <utility>

namespace btlab {

namespace {

constexpr double kLogCap = 700.0;

void check_claim(std::optional<DichotomyCase> actual,
                 std::optional<DichotomyCase> claimed) {
    if (claimed && actual != claimed)
        throw WrongCase("declared limits do not match the claimed case");
}

// One RK4 cell of u' = alpha u + f, with alpha and f given at the two cell
// nodes and the interpolated midpoint. h is +dx or -dx; for h < 0 the roles
// of the nodes are swapped by the caller.
double rk4_cell(double u, double h, double a0, double am, double a1, double f0,
                double fm, double f1) {
    const double k1 = a0 * u + f0;
    const double u2 = u + 0.5 * h * k1;
    const double k2 = am * u2 + fm;
    const double u3 = u + 0.5 * h * k2;
    const double k3 = am * u3 + fm;
    const double u4 = u + h * k3;
    const double k4 = a1 * u4 + f1;
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

std::optional<DichotomyCase> classify_continuous(double am, double ap) {
    if (am > 0.0 && ap < 0.0) return DichotomyCase::case1;
    if (am < 0.0 && ap > 0.0) return DichotomyCase::case2;
    return std::nullopt;
}

std::optional<DichotomyCase> classify_discrete(double am, double ap) {
    const double m = std::abs(am), p = std::abs(ap);
    if (m > 1.0 && p < 1.0) return DichotomyCase::case1;
    if (m < 1.0 && p > 1.0) return DichotomyCase::case2;
    return std::nullopt;
}

CoefficientProfile make_profile(Field alpha, double alpha_minus,
                                double alpha_plus, Index anchor,
                                std::optional<DichotomyCase> claimed) {
    if (anchor < 0 || anchor >= alpha.grid.n)
        throw InvalidValue("profile anchor out of range");
    if (claimed && (alpha_minus == 0.0 || alpha_plus == 0.0))
        throw WrongCase("zero limit is not covered by either case");
    check_claim(classify_continuous(alpha_minus, alpha_plus), claimed);
    return CoefficientProfile{std::move(alpha), alpha_minus, alpha_plus, anchor,
                              claimed};
}

DiscreteCoefficientProfile make_profile(Seq alpha, double alpha_minus,
                                        double alpha_plus, Index anchor,
                                        std::optional<DichotomyCase> claimed) {
    if (anchor < 0 || anchor >= alpha.window.n)
        throw InvalidValue("profile anchor out of range");
    if (claimed &&
        (std::abs(std::abs(alpha_minus) - 1.0) == 0.0 ||
         std::abs(std::abs(alpha_plus) - 1.0) == 0.0))
        throw WrongCase("unit-modulus limit is not covered by either case");
    check_claim(classify_discrete(alpha_minus, alpha_plus), claimed);
    return DiscreteCoefficientProfile{std::move(alpha), alpha_minus, alpha_plus,
                                      anchor, claimed};
}

double tail_deviation_minus(const CoefficientProfile& cp) {
    const ArrayXd dev =
        (cp.alpha.samples.head(cp.anchor + 1) - cp.alpha_minus).abs();
    Field d{Grid1D{cp.alpha.grid.x0, cp.alpha.grid.dx, cp.anchor + 1}, dev};
    return trapezoid(d);
}

double tail_deviation_plus(const CoefficientProfile& cp) {
    const Index m = cp.alpha.grid.n - cp.anchor;
    const ArrayXd dev = (cp.alpha.samples.tail(m) - cp.alpha_plus).abs();
    Field d{Grid1D{cp.alpha.grid.x(cp.anchor), cp.alpha.grid.dx, m}, dev};
    return trapezoid(d);
}

double tail_deviation_minus(const DiscreteCoefficientProfile& cp) {
    return (cp.alpha.values.head(cp.anchor + 1) - cp.alpha_minus).abs().sum();
}

double tail_deviation_plus(const DiscreteCoefficientProfile& cp) {
    const Index m = cp.alpha.window.n - cp.anchor;
    return (cp.alpha.values.tail(m) - cp.alpha_plus).abs().sum();
}

Field adjoint_solution(const CoefficientProfile& cp) {
    const ArrayXd log_mu =
        cumulative_integral(-cp.alpha.samples, cp.alpha.grid.dx, cp.anchor);
    if (log_mu.abs().maxCoeff() > kLogCap)
        throw Overflow("adjoint solution exceeds the representable range");
    return Field{cp.alpha.grid, log_mu.exp()};
}

Seq adjoint_solution(const DiscreteCoefficientProfile& cp) {
    const ArrayXd& a = cp.alpha.values;
    const Index n = a.size();
    if ((a <= 0.0).any())
        throw InvalidValue("discrete adjoint requires positive coefficients");
    // phi_{n-1} = alpha_n phi_n, accumulated as log phi.
    ArrayXd log_phi(n);
    log_phi[cp.anchor] = 0.0;
    for (Index i = cp.anchor; i + 1 < n; ++i)
        log_phi[i + 1] = log_phi[i] - std::log(a[i + 1]);
    for (Index i = cp.anchor; i > 0; --i)
        log_phi[i - 1] = log_phi[i] + std::log(a[i]);
    if (log_phi.abs().maxCoeff() > kLogCap)
        throw Overflow("adjoint solution exceeds the representable range");
    return Seq{cp.alpha.window, log_phi.exp()};
}

Field solve_case1(const CoefficientProfile& cp, const Field& f) {
    if (!(cp.alpha.grid == f.grid))
        throw CarrierMismatch("coefficient and data live on different grids");
    if (classify_continuous(cp.alpha_minus, cp.alpha_plus) !=
        DichotomyCase::case1)
        throw WrongCase("limits do not satisfy alpha_- > 0 > alpha_+");
    const Index n = f.grid.n;
    const double dx = f.grid.dx;
    const ArrayXd& a = cp.alpha.samples;
    const ArrayXd& g = f.samples;
    const ArrayXd am = cell_midpoints(a);
    const ArrayXd gm = cell_midpoints(g);

    ArrayXd u(n);
    u[cp.anchor] = 0.0;
    // Outward from the anchor: both directions are the decaying ones.
    for (Index i = cp.anchor; i + 1 < n; ++i)
        u[i + 1] = rk4_cell(u[i], dx, a[i], am[i], a[i + 1], g[i], gm[i],
                            g[i + 1]);
    for (Index i = cp.anchor; i > 0; --i)
        u[i - 1] = rk4_cell(u[i], -dx, a[i], am[i - 1], a[i - 1], g[i],
                            gm[i - 1], g[i - 1]);
    return Field{f.grid, std::move(u)};
}

Case2Solution solve_case2(const CoefficientProfile& cp, const Field& f) {
    if (!(cp.alpha.grid == f.grid))
        throw CarrierMismatch("coefficient and data live on different grids");
    if (classify_continuous(cp.alpha_minus, cp.alpha_plus) !=
        DichotomyCase::case2)
        throw WrongCase("limits do not satisfy alpha_- < 0 < alpha_+");
    const Field mu = adjoint_solution(cp);
    const double pair = pairing(f, mu);
    const double scale = l2_norm(f) * l2_norm(mu);
    if (std::abs(pair) > 1e-6 * scale)
        throw NotOrthogonal("data is not orthogonal to the adjoint solution");

    const Index n = f.grid.n;
    const double dx = f.grid.dx;
    const ArrayXd& a = cp.alpha.samples;
    const ArrayXd& g = f.samples;
    const ArrayXd am = cell_midpoints(a);
    const ArrayXd gm = cell_midpoints(g);

    // The bounded solution decays toward both ends, so integrate inward from
    // each end (the contracting direction) and meet at the anchor.
    ArrayXd u(n);
    u[0] = 0.0;
    for (Index i = 0; i < cp.anchor; ++i)
        u[i + 1] = rk4_cell(u[i], dx, a[i], am[i], a[i + 1], g[i], gm[i],
                            g[i + 1]);
    double ur = 0.0; // right-edge value of the decaying solution
    ArrayXd right(n - cp.anchor);
    right[n - 1 - cp.anchor] = ur;
    for (Index i = n - 1; i > cp.anchor; --i) {
        ur = rk4_cell(ur, -dx, a[i], am[i - 1], a[i - 1], g[i], gm[i - 1],
                      g[i - 1]);
        right[i - 1 - cp.anchor] = ur;
    }
    const double u0 = right[0];
    for (Index i = cp.anchor; i < n; ++i) u[i] = right[i - cp.anchor];
    return Case2Solution{Field{f.grid, std::move(u)}, u0};
}

Seq solve_case1(const DiscreteCoefficientProfile& cp, const Seq& f) {
    if (!(cp.alpha.window == f.window))
        throw CarrierMismatch("coefficient and data live on different windows");
    if (classify_discrete(cp.alpha_minus, cp.alpha_plus) != DichotomyCase::case1)
        throw WrongCase("limits do not satisfy |alpha_-| > 1 > |alpha_+|");
    const Index n = f.window.n;
    const ArrayXd& a = cp.alpha.values;
    const ArrayXd& g = f.values;
    ArrayXd u = ArrayXd::Zero(n);
    u[cp.anchor] = 0.0;
    // u_{i+1} = alpha_i u_i + f_i rightward, the inverted step leftward.
    for (Index i = cp.anchor; i + 1 < n; ++i) u[i + 1] = a[i] * u[i] + g[i];
    for (Index i = cp.anchor; i > 0; --i) u[i - 1] = (u[i] - g[i - 1]) / a[i - 1];
    return Seq{f.window, std::move(u)};
}

DiscreteCase2Solution solve_case2(const DiscreteCoefficientProfile& cp,
                                  const Seq& f) {
    if (!(cp.alpha.window == f.window))
        throw CarrierMismatch("coefficient and data live on different windows");
    if (classify_discrete(cp.alpha_minus, cp.alpha_plus) != DichotomyCase::case2)
        throw WrongCase("limits do not satisfy |alpha_-| < 1 < |alpha_+|");
    const Seq phi = adjoint_solution(cp);
    const double pair = pairing(f, phi);
    const double scale = l2_seq(f) * l2_seq(phi);
    if (std::abs(pair) > 1e-6 * scale)
        throw NotOrthogonal("data is not orthogonal to the adjoint solution");

    const Index n = f.window.n;
    const ArrayXd& a = cp.alpha.values;
    const ArrayXd& g = f.values;
    // Inward from each end (the contracting direction), meeting at the anchor:
    // left-bounded part by the forward step, right-bounded part by the
    // inverted step from a zero tail.
    ArrayXd u = ArrayXd::Zero(n);
    for (Index i = 0; i < cp.anchor; ++i) u[i + 1] = a[i] * u[i] + g[i];
    double v = 0.0;
    u[n - 1] = v;
    for (Index i = n - 1; i > cp.anchor; --i) {
        v = (v - g[i - 1]) / a[i - 1];
        u[i - 1] = v;
    }
    const double u0 = u[cp.anchor];
    return DiscreteCase2Solution{Seq{f.window, std::move(u)}, u0};
}

double pairing(const Field& b, const Field& mu) {
    if (!(b.grid == mu.grid))
        throw CarrierMismatch("pairing factors live on different grids");
    Field prod{b.grid, b.samples * mu.samples};
    return trapezoid(prod);
}

double pairing(const Seq& b, const Seq& mu) {
    if (!(b.window == mu.window))
        throw CarrierMismatch("pairing factors live on different windows");
    return (b.values * mu.values).sum();
}

} // namespace btlab
