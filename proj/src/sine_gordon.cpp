#include "btlab/sine_gordon.hpp"

#include <cmath>
#include <numbers>

namespace btlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 4 atan(exp(theta)) without overflow, exact limits 0 and 2*pi.
double kink_angle(double theta) {
    if (theta > 0.0) return kTwoPi - 4.0 * std::atan(std::exp(-theta));
    return 4.0 * std::atan(std::exp(theta));
}

int winding(double u_boundary) {
    return static_cast<int>(std::lround(u_boundary / kTwoPi));
}

void check_same_grid(const SGState& x, const SGState& y) {
    if (!(x.grid == y.grid))
        throw GridMismatch("states live on different grids");
}

void check_parameter(double a) {
    if (!(a > 0.0 && a < 1.0))
        throw InvalidValue("transform parameter must lie in (0, 1)");
}

} // namespace

KinkParams make_kink_params(double a, double delta) {
    check_parameter(a);
    if (!std::isfinite(delta)) throw InvalidValue("phase must be finite");
    return KinkParams{a, delta};
}

int SGState::kink_index() const {
    const Index n = grid.n;
    return winding(u.samples[n - 1]) - winding(u.samples[0]);
}

SGState make_sg_state(Field u, Field v) {
    if (!(u.grid == v.grid))
        throw GridMismatch("u and v live on different grids");
    if (!u.samples.allFinite() || !v.samples.allFinite())
        throw InvalidValue("state contains non-finite samples");
    Grid1D g = u.grid;
    return SGState{g, std::move(u), std::move(v)};
}

SGState sg_zero(const Grid1D& grid) {
    return SGState{grid, zero_field(grid), zero_field(grid)};
}

SGState sg_kink_profile(const KinkParams& p, const Grid1D& grid, double t) {
    const double gamma = p.gamma();
    const double c = p.speed();
    // Saturation-safe vector form: with w = exp(-|theta|),
    //   u = pi + sgn(theta) (pi - 4 atan w),  sech(theta) = 2w / (1 + w^2).
    const ArrayXd theta = gamma * (grid.xs() - c * t) + p.delta;
    const ArrayXd w = (-theta.abs()).exp();
    const ArrayXd atw = w.atan();
    const ArrayXd sign = theta.sign();
    const ArrayXd u =
        std::numbers::pi + sign * (std::numbers::pi - 4.0 * atw);
    const ArrayXd v = (-2.0 * c * gamma) * (2.0 * w / (1.0 + w.square()));
    return SGState{grid, Field{grid, u}, Field{grid, v}};
}

SGState sg_kink(const KinkParams& p, const Grid1D& grid, double t) {
    SGState s = sg_kink_profile(p, grid, t);
    const double lo = std::abs(s.u.samples[0]);
    const double hi = std::abs(s.u.samples[grid.n - 1] - kTwoPi);
    if (lo > 1e-10 || hi > 1e-10)
        throw DomainTooNarrow("kink tails do not fit the grid to 1e-10");
    return s;
}

double sg_energy(const SGState& s) {
    const Field ux = diff_x(s.u);
    // 1 - cos u written as 2 sin^2(u/2); exact cancellation near u = 2 pi k.
    const ArrayXd dens = 0.5 * s.v.samples.square() + 0.5 * ux.samples.square() +
                         2.0 * (0.5 * s.u.samples).sin().square();
    return trapezoid(Field{s.grid, dens});
}

SGState sg_step(const SGState& s, double dt) {
    const double dx = s.grid.dx;
    if (dt > 0.9 * dx * (1.0 + 1e-12))
        throw CFLViolation("time step exceeds 0.9 dx");
    const Index n = s.grid.n;
    const double inv2 = 1.0 / (dx * dx);

    ArrayXd u = s.u.samples;
    ArrayXd v = s.v.samples;
    // Drift-kick-drift with the boundary samples frozen.
    u.segment(1, n - 2) += (0.5 * dt) * v.segment(1, n - 2);
    ArrayXd acc = (u.segment(0, n - 2) - 2.0 * u.segment(1, n - 2) +
                   u.segment(2, n - 2)) *
                      inv2 -
                  u.segment(1, n - 2).sin();
    v.segment(1, n - 2) += dt * acc;
    u.segment(1, n - 2) += (0.5 * dt) * v.segment(1, n - 2);

    if (!u.allFinite() || !v.allFinite())
        throw Blowup("evolution produced non-finite samples");
    return SGState{s.grid, Field{s.grid, std::move(u)},
                   Field{s.grid, std::move(v)}};
}

std::vector<SgSample> sg_evolve(const SGState& s, double T, double dt,
                                int stride) {
    if (T < 0.0 || !(dt > 0.0)) throw InvalidValue("bad evolution horizon");
    if (stride < 1) throw InvalidValue("stride must be at least 1");
    std::vector<SgSample> out;
    out.push_back({0.0, s});
    if (T == 0.0) return out;

    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double h = T / static_cast<double>(steps);
    const int k_left = winding(s.u.samples[0]);
    const int k_right = winding(s.u.samples[s.grid.n - 1]);

    SGState cur = s;
    for (long k = 1; k <= steps; ++k) {
        cur = sg_step(cur, h);
        if (k % stride == 0 || k == steps) {
            if (std::abs(cur.u.samples[0] - kTwoPi * k_left) > 0.01 ||
                std::abs(cur.u.samples[cur.grid.n - 1] - kTwoPi * k_right) >
                    0.01)
                throw Blowup("boundary level drifted from its winding number");
            out.push_back({h * static_cast<double>(k), cur});
        }
    }
    return out;
}

std::pair<Field, Field> bt_residual(const SGState& x, const SGState& y,
                                    double a) {
    check_same_grid(x, y);
    check_parameter(a);
    const ArrayXd sp = (0.5 * (x.u.samples + y.u.samples)).sin();
    const ArrayXd sm = (0.5 * (x.u.samples - y.u.samples)).sin();
    const ArrayXd r1 =
        diff_x(x.u).samples + y.v.samples - a * sp - sm / a;
    const ArrayXd r2 =
        x.v.samples + diff_x(y.u).samples - sm / a + a * sp;
    return {Field{x.grid, r1}, Field{x.grid, r2}};
}

double bt_residual_sup(const SGState& x, const SGState& y, double a) {
    const auto [r1, r2] = bt_residual(x, y, a);
    return std::max(sup_norm(r1), sup_norm(r2));
}

namespace {

// RK4 over one grid cell for u' = rhs(u; drive values at cell nodes and the
// interpolated midpoint).
template <typename Rhs>
double rk4_cell_drive(double u, double h, Rhs&& rhs, double d0u, double d0v,
                      double dmu, double dmv, double d1u, double d1v) {
    const double k1 = rhs(u, d0u, d0v);
    const double k2 = rhs(u + 0.5 * h * k1, dmu, dmv);
    const double k3 = rhs(u + 0.5 * h * k2, dmu, dmv);
    const double k4 = rhs(u + h * k3, d1u, d1v);
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

SGState bt_forward(const SGState& y, double a, double delta) {
    check_parameter(a);
    const Grid1D& grid = y.grid;
    const Index n = grid.n;
    const double dx = grid.dx;
    const double gamma = 0.5 * (a + 1.0 / a);
    const ArrayXd& up = y.u.samples;
    const ArrayXd& vp = y.v.samples;
    const ArrayXd up_mid = cell_midpoints(up);
    const ArrayXd vp_mid = cell_midpoints(vp);

    const auto rhs = [a](double u, double upv, double vpv) {
        return a * std::sin(0.5 * (u + upv)) +
               std::sin(0.5 * (u - upv)) / a - vpv;
    };

    const Index m = n / 2;
    ArrayXd u(n);
    u[m] = up[m] + kink_angle(gamma * grid.x(m) + delta);
    for (Index i = m; i + 1 < n; ++i) {
        u[i + 1] = rk4_cell_drive(u[i], dx, rhs, up[i], vp[i], up_mid[i],
                                  vp_mid[i], up[i + 1], vp[i + 1]);
        if (std::abs(u[i + 1] - up[i + 1]) > 1e6 || !std::isfinite(u[i + 1]))
            throw Blowup("transform integration left the admissible range");
    }
    for (Index i = m; i > 0; --i) {
        u[i - 1] = rk4_cell_drive(u[i], -dx, rhs, up[i], vp[i], up_mid[i - 1],
                                  vp_mid[i - 1], up[i - 1], vp[i - 1]);
        if (std::abs(u[i - 1] - up[i - 1]) > 1e6 || !std::isfinite(u[i - 1]))
            throw Blowup("transform integration left the admissible range");
    }

    const ArrayXd sm = (0.5 * (u - up)).sin();
    const ArrayXd sp = (0.5 * (u + up)).sin();
    const ArrayXd v = -diff_x(y.u).samples + sm / a - a * sp;
    SGState x{grid, Field{grid, u}, Field{grid, v}};
    if (bt_residual_sup(x, y, a) >= 1e-6)
        throw ResidualTooLarge("constructed state fails the residual check");
    return x;
}

SgInverseResult sg_bt_inverse(const SGState& x, double a_guess) {
    const Grid1D& grid = x.grid;
    const Index n = grid.n;
    const double dx = grid.dx;
    const ArrayXd& u = x.u.samples;
    const ArrayXd& v = x.v.samples;
    const ArrayXd u_mid = cell_midpoints(u);
    const ArrayXd v_mid = cell_midpoints(v);
    const Index m = n / 2;
    // Index-lowered tail levels: same level on the left, one winding less on
    // the right.
    const double left0 = u[0];
    const double right0 = u[n - 1] - kTwoPi;

    // The second transform relation as an ODE for u', integrated inward from
    // each tail (its contracting direction); a is tuned until the two runs
    // meet at the anchor.
    ArrayXd upL(m + 1), upR(n - m);
    const auto shoot = [&](double a) {
        const auto rhs = [a](double upv, double uv, double vv) {
            return -vv + std::sin(0.5 * (uv - upv)) / a -
                   a * std::sin(0.5 * (uv + upv));
        };
        upL[0] = left0;
        for (Index i = 0; i < m; ++i) {
            const double k1 = rhs(upL[i], u[i], v[i]);
            const double k2 = rhs(upL[i] + 0.5 * dx * k1, u_mid[i], v_mid[i]);
            const double k3 = rhs(upL[i] + 0.5 * dx * k2, u_mid[i], v_mid[i]);
            const double k4 = rhs(upL[i] + dx * k3, u[i + 1], v[i + 1]);
            upL[i + 1] = upL[i] + (dx / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        upR[n - 1 - m] = right0;
        for (Index i = n - 1; i > m; --i) {
            const double uc = upR[i - m];
            const double k1 = rhs(uc, u[i], v[i]);
            const double k2 = rhs(uc - 0.5 * dx * k1, u_mid[i - 1], v_mid[i - 1]);
            const double k3 = rhs(uc - 0.5 * dx * k2, u_mid[i - 1], v_mid[i - 1]);
            const double k4 = rhs(uc - dx * k3, u[i - 1], v[i - 1]);
            upR[i - 1 - m] = uc - (dx / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        return upL[m] - upR[0];
    };

    const auto clamp_a = [](double a) {
        return std::min(0.98, std::max(0.02, a));
    };
    double a0 = clamp_a(a_guess);
    double a1 = clamp_a(a_guess + 0.01);
    if (a1 == a0) a1 = clamp_a(a_guess - 0.01);
    double g0 = shoot(a0);
    double g1 = shoot(a1);
    double a = a1;
    bool converged = std::abs(g1) < 1e-12;
    for (int it = 0; it < 50 && !converged; ++it) {
        const double denom = g1 - g0;
        if (denom == 0.0) break;
        double a2 = clamp_a(a1 - g1 * (a1 - a0) / denom);
        a0 = a1;
        g0 = g1;
        a1 = a2;
        g1 = shoot(a1);
        a = a1;
        converged = std::abs(g1) < 1e-12 || std::abs(a1 - a0) < 1e-14;
    }
    if (!converged)
        throw NoConvergence("secant iteration on the parameter did not settle");

    ArrayXd up(n);
    for (Index i = 0; i <= m; ++i) up[i] = upL[i];
    for (Index i = m + 1; i < n; ++i) up[i] = upR[i - m];
    const ArrayXd sm = (0.5 * (u - up)).sin();
    const ArrayXd sp = (0.5 * (u + up)).sin();
    const ArrayXd vp = -diff_x(x.u).samples + a * sp + sm / a;
    SGState y{grid, Field{grid, up}, Field{grid, vp}};
    if (bt_residual_sup(x, y, a) >= 1e-6)
        throw NoConvergence("input is outside the solvable neighborhood");
    return SgInverseResult{std::move(y), a};
}

CoefficientProfile sg_alpha(const SGState& x, const SGState& y, double a) {
    check_same_grid(x, y);
    check_parameter(a);
    const ArrayXd alpha = 0.5 * a * (0.5 * (x.u.samples + y.u.samples)).cos() +
                          (0.5 / a) * (0.5 * (x.u.samples - y.u.samples)).cos();
    const Index n = x.grid.n;
    const double am = alpha[0];
    const double ap = alpha[n - 1];
    Index anchor = n / 2;
    if ((am > 0.0) != (ap > 0.0)) {
        Index imin = 0;
        alpha.abs().minCoeff(&imin);
        anchor = imin;
    }
    return make_profile(Field{x.grid, alpha}, am, ap, anchor,
                        classify_continuous(am, ap));
}

std::pair<Field, Field> sg_kernel_element(const SGState& x, const SGState& y,
                                          double a) {
    if (bt_residual_sup(x, y, a) >= 1e-4)
        throw InvalidValue("pair is not an approximate zero of the transform");
    const CoefficientProfile prof = sg_alpha(x, y, a);
    // Kernel direction solves phi' = alpha phi: the adjoint construction
    // applied to -alpha, anchored at the kink midpoint.
    const CoefficientProfile neg = make_profile(
        Field{prof.alpha.grid, (-prof.alpha.samples).eval()}, -prof.alpha_minus,
        -prof.alpha_plus, prof.anchor, std::nullopt);
    Field phi = adjoint_solution(neg);
    const double scale = l2_norm(phi);
    if (!(scale > 0.0)) throw InvalidValue("degenerate kernel normalization");
    phi.samples /= scale;
    const ArrayXd cp = (0.5 * (x.u.samples + y.u.samples)).cos();
    const ArrayXd cm = (0.5 * (x.u.samples - y.u.samples)).cos();
    // psi = ((1/2a) cos((u+u')/2) - (a/2) cos((u-u')/2)) phi - phi', with
    // phi' = alpha phi exactly.
    const ArrayXd psi = ((0.5 / a) * cp - 0.5 * a * cm) * phi.samples -
                        prof.alpha.samples * phi.samples;
    return {phi, Field{x.grid, psi}};
}

double sg_nondegeneracy(const SGState& x, const SGState& y, double a) {
    if (bt_residual_sup(x, y, a) >= 1e-4)
        throw InvalidValue("pair is not an approximate zero of the transform");
    const CoefficientProfile prof = sg_alpha(x, y, a);
    const Grid1D& grid = x.grid;
    const Index n = grid.n;

    // log mu = +int alpha from the anchor; renormalize so mu = 1 at the kink
    // midpoint (interpolated level crossing of u), not at the nearest grid
    // point, so the value is invariant under phase shifts of the pair.
    ArrayXd log_mu = cumulative_integral(prof.alpha.samples, grid.dx, prof.anchor);
    const double level =
        0.5 * (x.u.samples[0] + x.u.samples[n - 1]); // midpoint level of u
    Index ic = prof.anchor;
    for (Index i = 0; i + 1 < n; ++i) {
        if ((x.u.samples[i] - level) * (x.u.samples[i + 1] - level) <= 0.0 &&
            x.u.samples[i] != x.u.samples[i + 1]) {
            ic = i;
            break;
        }
    }
    const double frac = (level - x.u.samples[ic]) /
                        (x.u.samples[ic + 1] - x.u.samples[ic]);
    double log_at_center;
    if (ic >= 1 && ic + 2 < n) {
        // Cubic interpolation of log mu at the fractional crossing.
        const double t = frac;
        const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        const double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        const double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        const double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        log_at_center = c0 * log_mu[ic - 1] + c1 * log_mu[ic] +
                        c2 * log_mu[ic + 1] + c3 * log_mu[ic + 2];
    } else {
        log_at_center = (1.0 - frac) * log_mu[ic] + frac * log_mu[ic + 1];
    }
    log_mu -= log_at_center;
    if (log_mu.maxCoeff() > 700.0)
        throw Overflow("pairing weight exceeds the representable range");
    const ArrayXd mu = log_mu.exp();

    const ArrayXd b = (0.5 * (x.u.samples - y.u.samples)).sin() / (a * a) +
                      (0.5 * (x.u.samples + y.u.samples)).sin();
    return trapezoid(Field{grid, (b * mu).eval()});
}

double sg_distance(const SGState& s1, const SGState& s2) {
    check_same_grid(s1, s2);
    const double du = h1_norm(Field{s1.grid, s1.u.samples - s2.u.samples});
    const double dv = l2_norm(Field{s1.grid, s1.v.samples - s2.v.samples});
    return std::sqrt(du * du + dv * dv);
}

} // namespace btlab
