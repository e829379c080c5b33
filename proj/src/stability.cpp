#include "btlab/stability.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "btlab/rng.hpp"

namespace btlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr Index kBoundaryPad = 10;

ArrayXd gaussian_bump(const ArrayXd& coords, double center, double width) {
    return (-(coords - center).square() / (2.0 * width * width)).exp();
}

void apply_mask(ArrayXd& delta) {
    const Index n = delta.size();
    if (n <= 2 * kBoundaryPad)
        throw InvalidValue("container too small to keep boundaries untouched");
    delta.head(kBoundaryPad).setZero();
    delta.tail(kBoundaryPad).setZero();
}

void check_spec(const PerturbationSpec& spec) {
    if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude))
        throw InvalidValue("perturbation amplitude must be >= 0");
    if (!(spec.width > 0.0)) throw InvalidValue("perturbation width must be > 0");
}

// Golden-section minimization on [lo, hi]; deterministic bracket shrink.
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol) {
    constexpr double invphi = 0.61803398874989484820;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

// One-dimensional scan + golden refinement with re-centering when the scan
// minimum lands on the box edge.
double scan_refine(const std::function<double(double)>& f, double center,
                   double half, double lo_cap, double hi_cap, int points,
                   int max_recenter, double tol) {
    for (int attempt = 0;; ++attempt) {
        const double lo = std::max(lo_cap, center - half);
        const double hi = std::min(hi_cap, center + half);
        const double step = (hi - lo) / static_cast<double>(points - 1);
        int best = 0;
        double fbest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < points; ++i) {
            const double v = f(lo + step * static_cast<double>(i));
            if (v < fbest) {
                fbest = v;
                best = i;
            }
        }
        const double xb = lo + step * static_cast<double>(best);
        const bool on_edge = (best == 0 && lo > lo_cap) ||
                             (best == points - 1 && hi < hi_cap);
        if (on_edge) {
            if (attempt >= max_recenter)
                throw NoConvergence("scan minimum stuck on the box boundary");
            center = xb;
            continue;
        }
        const double glo = std::max(lo_cap, xb - step);
        const double ghi = std::min(hi_cap, xb + step);
        return golden_min(f, glo, ghi, tol);
    }
}

} // namespace

SGState make_perturbation(const PerturbationSpec& spec, const SGState& target) {
    check_spec(spec);
    if (spec.amplitude == 0.0) return target;
    const Grid1D& g = target.grid;
    ArrayXd du = ArrayXd::Zero(g.n);
    ArrayXd dv = ArrayXd::Zero(g.n);
    switch (spec.kind) {
        case PerturbationKind::gaussian_u:
            du = gaussian_bump(g.xs(), spec.center, spec.width);
            break;
        case PerturbationKind::gaussian_v:
            dv = gaussian_bump(g.xs(), spec.center, spec.width);
            break;
        case PerturbationKind::seeded_noise: {
            SplitMix64 rng(spec.seed);
            for (Index i = 0; i < g.n; ++i) du[i] = rng.symmetric();
            for (Index i = 0; i < g.n; ++i) dv[i] = rng.symmetric();
            break;
        }
        default:
            throw InvalidValue("perturbation kind does not apply to a field state");
    }
    apply_mask(du);
    apply_mask(dv);
    const double nu = h1_norm(Field{g, du});
    const double nv = l2_norm(Field{g, dv});
    const double norm = std::sqrt(nu * nu + nv * nv);
    if (!(norm > 0.0)) throw InvalidValue("degenerate perturbation shape");
    const double scale = spec.amplitude / norm;
    return make_sg_state(Field{g, target.u.samples + scale * du},
                         Field{g, target.v.samples + scale * dv});
}

TodaState make_perturbation(const PerturbationSpec& spec,
                            const TodaState& target) {
    check_spec(spec);
    if (spec.amplitude == 0.0) return target;
    const LatticeWindow& w = target.window;
    ArrayXd sites(w.n);
    for (Index i = 0; i < w.n; ++i)
        sites[i] = static_cast<double>(w.j0 + static_cast<long>(i));
    ArrayXd dq = ArrayXd::Zero(w.n);
    ArrayXd dp = ArrayXd::Zero(w.n);
    switch (spec.kind) {
        case PerturbationKind::gaussian_q:
            dq = gaussian_bump(sites, spec.center, spec.width);
            break;
        case PerturbationKind::gaussian_p:
            dp = gaussian_bump(sites, spec.center, spec.width);
            break;
        case PerturbationKind::seeded_noise: {
            SplitMix64 rng(spec.seed);
            for (Index i = 0; i < w.n; ++i) dq[i] = rng.symmetric();
            for (Index i = 0; i < w.n; ++i) dp[i] = rng.symmetric();
            break;
        }
        default:
            throw InvalidValue("perturbation kind does not apply to a lattice state");
    }
    apply_mask(dq);
    apply_mask(dp);
    const double norm = std::sqrt(dq.square().sum() + dp.square().sum());
    if (!(norm > 0.0)) throw InvalidValue("degenerate perturbation shape");
    const double scale = spec.amplitude / norm;
    return make_toda_state(Seq{w, target.q.values + scale * dq},
                           Seq{w, target.p.values + scale * dp}, target.q_left,
                           target.q_right);
}

SgFitResult fit_modulation_sg(const SGState& s, const KinkParams& guess,
                              const FitOptions& opt) {
    const auto objective = [&s](double a, double delta) {
        if (!(a > 0.02 && a < 0.98)) return 1e100;
        return sg_distance(s, sg_kink_profile(KinkParams{a, delta}, s.grid));
    };

    // Joint coarse scan around the guess, re-centered while the minimum sits
    // on the box edge.
    double ca = std::min(0.95, std::max(0.05, guess.a));
    double cd = guess.delta;
    const int np = opt.scan_points;
    double step_a = 0.0, step_d = 0.0;
    for (int attempt = 0;; ++attempt) {
        const double lo_a = std::max(0.02, ca - opt.scan_half_param);
        const double hi_a = std::min(0.98, ca + opt.scan_half_param);
        const double lo_d = cd - opt.scan_half_phase;
        const double hi_d = cd + opt.scan_half_phase;
        step_a = (hi_a - lo_a) / static_cast<double>(np - 1);
        step_d = (hi_d - lo_d) / static_cast<double>(np - 1);
        int bi = 0, bk = 0;
        double fbest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < np; ++i) {
            for (int k = 0; k < np; ++k) {
                const double v = objective(lo_a + step_a * i, lo_d + step_d * k);
                if (v < fbest) {
                    fbest = v;
                    bi = i;
                    bk = k;
                }
            }
        }
        ca = lo_a + step_a * bi;
        cd = lo_d + step_d * bk;
        const bool edge_a = (bi == 0 && lo_a > 0.02) || (bi == np - 1 && hi_a < 0.98);
        const bool edge_d = bk == 0 || bk == np - 1;
        if (!edge_a && !edge_d) break;
        if (attempt >= opt.max_recenter)
            throw NoConvergence("scan minimum stuck on the box boundary");
    }

    // Alternating golden-section refinement.
    double ha = step_a, hd = step_d;
    for (int cycle = 0; cycle < opt.max_cycles; ++cycle) {
        const double a_new = golden_min(
            [&](double a) { return objective(a, cd); },
            std::max(0.02, ca - ha), std::min(0.98, ca + ha), opt.param_tol);
        const double d_new = golden_min(
            [&](double d) { return objective(a_new, d); }, cd - hd, cd + hd,
            opt.param_tol);
        const double moved = std::abs(a_new - ca) + std::abs(d_new - cd);
        ca = a_new;
        cd = d_new;
        ha = std::max(4.0 * opt.param_tol, 0.5 * ha);
        hd = std::max(4.0 * opt.param_tol, 0.5 * hd);
        if (moved < opt.param_tol) break;
    }
    return SgFitResult{KinkParams{ca, cd}, objective(ca, cd)};
}

TodaFitResult fit_modulation_toda(const TodaState& s,
                                  const std::vector<SolitonParams>& guess,
                                  const FitOptions& opt) {
    if (guess.empty()) throw InvalidValue("need at least one soliton to fit");
    const LatticeWindow& w = s.window;
    const auto build = [&](const std::vector<SolitonParams>& ps) -> TodaState {
        if (ps.size() == 1) return toda_soliton_profile(ps[0], w);
        return toda_multisoliton(ps, w);
    };
    const auto objective = [&](const std::vector<SolitonParams>& ps) {
        for (const auto& sp : ps)
            if (!(sp.kappa > 0.05 && sp.kappa < 5.0)) return 1e100;
        try {
            return toda_distance(s, build(ps));
        } catch (const Error&) {
            return 1e100;
        }
    };

    std::vector<SolitonParams> cur = guess;
    double fcur = objective(cur);
    double half_k = opt.scan_half_param;
    double half_g = opt.scan_half_phase;
    for (int cycle = 0; cycle < opt.max_cycles; ++cycle) {
        double moved = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            // Descend in kappa with the component's center -gamma/kappa held
            // fixed (gamma co-varied); kappa and gamma are strongly coupled
            // through the center, and the raw pair zigzags.
            const double ratio = cur[i].gamma_phase / cur[i].kappa;
            const double k_new = scan_refine(
                [&](double k) {
                    auto ps = cur;
                    ps[i].kappa = k;
                    ps[i].gamma_phase = ratio * k;
                    return objective(ps);
                },
                cur[i].kappa, half_k, 0.05, 5.0, opt.scan_points,
                opt.max_recenter, opt.param_tol);
            moved += std::abs(k_new - cur[i].kappa);
            cur[i].gamma_phase = ratio * k_new;
            cur[i].kappa = k_new;
            const double g_new = scan_refine(
                [&](double g) {
                    auto ps = cur;
                    ps[i].gamma_phase = g;
                    return objective(ps);
                },
                cur[i].gamma_phase, half_g,
                -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), opt.scan_points,
                opt.max_recenter, opt.param_tol);
            moved += std::abs(g_new - cur[i].gamma_phase);
            cur[i].gamma_phase = g_new;
        }
        const double fnew = objective(cur);
        const bool stalled = fcur - fnew < opt.cycle_tol;
        fcur = fnew;
        if (moved < 10.0 * opt.param_tol || (stalled && cycle > 0)) break;
        // Focus the scans around the shrinking step sizes.
        half_k = std::max(0.25 * half_k, std::min(half_k, 20.0 * moved));
        half_g = std::max(0.25 * half_g, std::min(half_g, 20.0 * moved));
        half_k = std::max(half_k, 1e4 * opt.param_tol);
        half_g = std::max(half_g, 1e4 * opt.param_tol);
    }

    // Coordinate descent zigzags badly when soliton components overlap (the
    // 2m parameters become strongly coupled mid-interaction), so finish with
    // a finite-difference Newton polish on the squared distance.
    const int dim = static_cast<int>(2 * cur.size());
    const auto pack = [&](const Eigen::VectorXd& th) {
        std::vector<SolitonParams> ps = cur;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            ps[i].kappa = th[2 * i];
            ps[i].gamma_phase = th[2 * i + 1];
        }
        return ps;
    };
    Eigen::VectorXd theta(dim);
    for (std::size_t i = 0; i < cur.size(); ++i) {
        theta[2 * i] = cur[i].kappa;
        theta[2 * i + 1] = cur[i].gamma_phase;
    }
    const auto value = [&](const Eigen::VectorXd& th) {
        const double d = objective(pack(th));
        return d * d;
    };
    const double h = 3e-6;
    double f0 = value(theta);
    for (int iter = 0; iter < 15; ++iter) {
        Eigen::VectorXd grad(dim);
        Eigen::MatrixXd hess(dim, dim);
        Eigen::VectorXd fp(dim), fm(dim);
        for (int k = 0; k < dim; ++k) {
            Eigen::VectorXd t = theta;
            t[k] = theta[k] + h;
            fp[k] = value(t);
            t[k] = theta[k] - h;
            fm[k] = value(t);
            grad[k] = (fp[k] - fm[k]) / (2.0 * h);
            hess(k, k) = (fp[k] - 2.0 * f0 + fm[k]) / (h * h);
        }
        for (int k = 0; k < dim; ++k) {
            for (int l = k + 1; l < dim; ++l) {
                Eigen::VectorXd t = theta;
                t[k] += h;
                t[l] += h;
                const double fpp = value(t);
                t[l] -= 2.0 * h;
                const double fpm = value(t);
                t[k] -= 2.0 * h;
                const double fmm = value(t);
                t[l] += 2.0 * h;
                const double fmp = value(t);
                hess(k, l) = hess(l, k) =
                    (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            }
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        if (ldlt.info() != Eigen::Success) break;
        const Eigen::VectorXd step = ldlt.solve(-grad);
        if (!step.allFinite() || step.dot(grad) >= 0.0) break;
        double alpha = 1.0;
        double f_new = value(theta + alpha * step);
        while (f_new >= f0 && alpha > 1.0 / 64.0) {
            alpha *= 0.5;
            f_new = value(theta + alpha * step);
        }
        if (f_new >= f0) break;
        theta += alpha * step;
        const double gain = f0 - f_new;
        f0 = f_new;
        if (gain < 1e-24 || step.norm() * alpha < 1e-11) break;
    }
    cur = pack(theta);
    return TodaFitResult{cur, objective(cur)};
}

std::vector<ResidualSample> conjugation_residual_series(const SGState& x0,
                                                        const SGState& y0,
                                                        double a, double T,
                                                        double dt, int stride) {
    if (stride < 1) throw InvalidValue("stride must be at least 1");
    std::vector<ResidualSample> out;
    out.push_back({0.0, bt_residual_sup(x0, y0, a)});
    if (T <= 0.0) return out;
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double h = T / static_cast<double>(steps);
    SGState x = x0, y = y0;
    for (long k = 1; k <= steps; ++k) {
        x = sg_step(x, h);
        y = sg_step(y, h);
        if (k % stride == 0 || k == steps)
            out.push_back({h * static_cast<double>(k), bt_residual_sup(x, y, a)});
    }
    return out;
}

std::vector<ResidualSample> conjugation_residual_series(const TodaState& x0,
                                                        const TodaState& y0,
                                                        double kappa, double T,
                                                        double dt, int stride) {
    if (stride < 1) throw InvalidValue("stride must be at least 1");
    std::vector<ResidualSample> out;
    out.push_back({0.0, toda_bt_residual_sup(x0, y0, kappa)});
    if (T <= 0.0) return out;
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double h = T / static_cast<double>(steps);
    TodaState x = x0, y = y0;
    for (long k = 1; k <= steps; ++k) {
        x = toda_step(x, h);
        y = toda_step(y, h);
        if (k % stride == 0 || k == steps)
            out.push_back(
                {h * static_cast<double>(k), toda_bt_residual_sup(x, y, kappa)});
    }
    return out;
}

namespace {

struct SummaryAccumulator {
    double sup_distance = 0.0;
    double max_residual = kNaN;
    double e0 = 0.0;
    double drift = 0.0;
    bool fits_ok = true;

    void add(const StabilityRow& row, bool first) {
        if (first) e0 = row.energy;
        drift = std::max(drift,
                         std::abs(row.energy - e0) / std::max(std::abs(e0), 1e-30));
        if (row.fit_ok)
            sup_distance = std::max(sup_distance, row.distance);
        else
            fits_ok = false;
        if (std::isfinite(row.conj_residual)) {
            max_residual = std::isnan(max_residual)
                               ? row.conj_residual
                               : std::max(max_residual, row.conj_residual);
        }
    }

    StabilityReport finish(std::vector<StabilityRow> rows, double amplitude,
                           double c_max) const {
        StabilityReport rep;
        rep.rows = std::move(rows);
        rep.sup_distance = sup_distance;
        rep.empirical_c = amplitude > 0.0 ? sup_distance / amplitude : kNaN;
        rep.energy_drift = drift;
        rep.max_residual = max_residual;
        rep.pass = fits_ok && sup_distance <= c_max * amplitude;
        return rep;
    }
};

} // namespace

StabilityReport run_stability_experiment(const SgExperimentConfig& cfg) {
    const SGState base = sg_kink(cfg.base, cfg.grid, 0.0);
    SGState x = make_perturbation(cfg.perturbation, base);

    bool have_conj = true;
    SGState y = sg_zero(cfg.grid);
    double lambda = cfg.base.a;
    try {
        SgInverseResult inv = sg_bt_inverse(x, cfg.base.a);
        y = std::move(inv.y);
        lambda = inv.a;
    } catch (const Error&) {
        have_conj = false;
    }

    const long steps =
        cfg.T > 0.0 ? static_cast<long>(std::ceil(cfg.T / cfg.dt - 1e-9)) : 0;
    const double h = steps > 0 ? cfg.T / static_cast<double>(steps) : 0.0;

    std::vector<StabilityRow> rows;
    SummaryAccumulator acc;
    KinkParams fit_guess = cfg.base;
    double t_prev_sample = 0.0;

    const auto sample = [&](double t) {
        StabilityRow row;
        row.t = t;
        row.energy = sg_energy(x);
        row.conj_residual = have_conj ? bt_residual_sup(x, y, lambda) : kNaN;
        // Predict the phase drift since the last sample before fitting.
        KinkParams g = fit_guess;
        g.delta -= g.gamma() * g.speed() * (t - t_prev_sample);
        try {
            const SgFitResult fit = fit_modulation_sg(x, g, cfg.fit);
            row.distance = fit.distance;
            row.params = {fit.params.a, fit.params.delta};
            fit_guess = fit.params;
        } catch (const Error&) {
            row.fit_ok = false;
            row.distance = kNaN;
            row.params = {kNaN, kNaN};
            fit_guess = g;
        }
        t_prev_sample = t;
        acc.add(row, rows.empty());
        rows.push_back(std::move(row));
    };

    sample(0.0);
    for (long k = 1; k <= steps; ++k) {
        x = sg_step(x, h);
        if (have_conj) y = sg_step(y, h);
        if (k % cfg.stride == 0 || k == steps)
            sample(h * static_cast<double>(k));
    }
    return acc.finish(std::move(rows), cfg.perturbation.amplitude, cfg.c_max);
}

StabilityReport run_stability_experiment(const TodaExperimentConfig& cfg) {
    const TodaState base = toda_multisoliton(cfg.base, cfg.window);
    TodaState x = make_perturbation(cfg.perturbation, base);

    bool have_conj = true;
    TodaState y = toda_vacuum(cfg.window);
    double lambda = cfg.base.empty() ? 1.0 : cfg.base.back().kappa;
    try {
        if (cfg.base.empty()) throw InvalidValue("no soliton to invert");
        TodaInverseResult inv = toda_bt_inverse(x, cfg.base.back().kappa);
        y = std::move(inv.y);
        lambda = inv.kappa;
    } catch (const Error&) {
        have_conj = false;
    }

    const long steps =
        cfg.T > 0.0 ? static_cast<long>(std::ceil(cfg.T / cfg.dt - 1e-9)) : 0;
    const double h = steps > 0 ? cfg.T / static_cast<double>(steps) : 0.0;

    std::vector<StabilityRow> rows;
    SummaryAccumulator acc;
    std::vector<SolitonParams> fit_guess = cfg.base;
    double t_prev_sample = 0.0;

    const auto sample = [&](double t) {
        StabilityRow row;
        row.t = t;
        row.energy = toda_energy(x);
        row.conj_residual =
            have_conj ? toda_bt_residual_sup(x, y, lambda) : kNaN;
        std::vector<SolitonParams> g = fit_guess;
        for (auto& sp : g)
            sp.gamma_phase -= std::sinh(sp.kappa) * (t - t_prev_sample);
        try {
            const TodaFitResult fit = fit_modulation_toda(x, g, cfg.fit);
            row.distance = fit.distance;
            for (const auto& sp : fit.params) {
                row.params.push_back(sp.kappa);
                row.params.push_back(sp.gamma_phase);
            }
            fit_guess = fit.params;
        } catch (const Error&) {
            row.fit_ok = false;
            row.distance = kNaN;
            row.params.assign(2 * cfg.base.size(), kNaN);
            fit_guess = g;
        }
        t_prev_sample = t;
        acc.add(row, rows.empty());
        rows.push_back(std::move(row));
    };

    sample(0.0);
    for (long k = 1; k <= steps; ++k) {
        x = toda_step(x, h);
        if (have_conj) y = toda_step(y, h);
        if (k % cfg.stride == 0 || k == steps)
            sample(h * static_cast<double>(k));
    }
    return acc.finish(std::move(rows), cfg.perturbation.amplitude, cfg.c_max);
}

} // namespace btlab
