#pragma once

#include <utility>
#include <vector>

#include "btlab/dichotomy.hpp"
#include "btlab/grid.hpp"

namespace btlab {

// Transform parameter kappa > 0 plus phase. The lattice soliton built from
// the vacuum has amplitude 2*kappa (total drop of q) and speed
// sinh(kappa)/kappa; the phase enters through cosh(kappa j + gamma).
struct SolitonParams {
    double kappa = 1.0;
    double gamma_phase = 0.0;

    double speed() const;
    double q_drop() const { return 2.0 * kappa; }
};

SolitonParams make_soliton_params(double kappa, double gamma_phase);

// Phase-space point (q, p) on a lattice window with declared asymptotic
// values of q on each side. Relative displacements r_j = q_j - q_{j+1} and
// momenta decay toward both window ends.
struct TodaState {
    LatticeWindow window;
    Seq q;
    Seq p;
    double q_left = 0.0;
    double q_right = 0.0;
};

TodaState make_toda_state(Seq q, Seq p, double q_left, double q_right);

TodaState toda_vacuum(const LatticeWindow& w);

// Closed-form soliton:
//   q_j = log cosh(kappa j + gamma) - log cosh(kappa (j+1) + gamma) - kappa
//   p_j = sinh(kappa)^2 / (cosh(kappa j + gamma) cosh(kappa (j+1) + gamma))
// The additive -kappa on q and the p form were fixed once by minimizing the
// transform residual against the vacuum; q runs from 0 on the left to
// -2*kappa on the right and the residual vanishes identically.
// toda_soliton enforces that both tails reach their limits to 1e-12
// (WindowTooNarrow otherwise); toda_soliton_profile skips the check.
TodaState toda_soliton(const SolitonParams& sp, const LatticeWindow& w);
TodaState toda_soliton_profile(const SolitonParams& sp, const LatticeWindow& w);

// Renormalized lattice energy sum p^2/2 + sum (e^r - 1 - r), r_j = q_j -
// q_{j+1}, with r = 0 beyond the window.
double toda_energy(const TodaState& s);

// Total momentum sum p_j (conserved by toda_step up to round-off).
double toda_momentum(const TodaState& s);

// One velocity-Verlet step (half-kick, drift, half-kick) of
//   dq_j/dt = p_j,  dp_j/dt = e^{q_{j-1}-q_j} - e^{q_j-q_{j+1}},
// boundary forces computed as if r = 0 beyond the window. Requires dt <= 0.1.
TodaState toda_step(const TodaState& s, double dt);

struct TodaSample {
    double t = 0.0;
    TodaState state;
};

std::vector<TodaSample> toda_evolve(const TodaState& s, double T, double dt,
                                    int stride);

// Components of F(x, y, kappa); off-window neighbours are filled with the
// declared asymptotic values.
std::pair<Seq, Seq> toda_bt_residual(const TodaState& x, const TodaState& y,
                                     double kappa);
double toda_bt_residual_sup(const TodaState& x, const TodaState& y,
                            double kappa);

// Apply the transform to y, adding one soliton. seed is the value of q at
// the anchor site (the free phase); the recursion runs from the anchor
// toward each window end, which is the contracting direction on each side.
// anchor_site < window start means "use the middle of the window".
TodaState toda_bt_forward(const TodaState& y, double kappa, double seed);
TodaState toda_bt_forward(const TodaState& y, double kappa, double seed,
                          long anchor_site);

// Closed-form q value of the soliton at a site, used to seed forward folds
// so that the phase convention matches toda_soliton.
double soliton_seed(const SolitonParams& sp, long site);

// Open interval of admissible anchor seeds for adding a kappa-component on
// top of y (bisection on the log-domain boundary of the recursion).
std::pair<double, double> toda_seed_basin(const TodaState& y, double kappa,
                                          long anchor_site);

// Add one soliton on top of y: anchor at the site nearest the incoming
// center, map the phase onto the actual admissible basin (which deforms
// when components overlap), and apply the forward transform. For a flat
// background this reduces to seeding with the closed form directly.
TodaState toda_add_soliton(const TodaState& y, const SolitonParams& sp);

// Solve F(x, y, kappa) = 0 for (y, kappa) given x near a soliton (or
// m-soliton): the first relation is a recursion for q', run inward from the
// two index-lowered tails, with a secant iteration on kappa closing the
// junction mismatch at the anchor.
struct TodaInverseResult {
    TodaState y;
    double kappa = 0.0;
};
TodaInverseResult toda_bt_inverse(const TodaState& x, double kappa_guess);

// Iterated transform from the vacuum, one application per parameter set.
TodaState toda_multisoliton(const std::vector<SolitonParams>& params,
                            const LatticeWindow& w);

// Coefficient of the linearization recursion,
// alpha_j = exp(-(2 q'_j - q_j - q_{j+1} - 2 kappa)),
// limits read off the window ends; e^{+-2 kappa} for a (soliton, vacuum)
// pair, which is the discrete case 1 pattern.
DiscreteCoefficientProfile toda_alpha(const TodaState& x, const TodaState& y,
                                      double kappa);

// l2 x l2 distance between two states on the same window.
double toda_distance(const TodaState& a, const TodaState& b);

// Relative displacements r_j = q_j - q_{j+1} (length n-1) and the pulse peak
// location in site units (parabolic refinement of the argmax of r).
ArrayXd toda_displacements(const TodaState& s);
double toda_peak_position(const TodaState& s);

} // namespace btlab
