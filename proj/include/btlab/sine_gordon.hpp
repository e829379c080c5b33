#pragma once

#include <utility>
#include <vector>

#include "btlab/dichotomy.hpp"
#include "btlab/grid.hpp"

namespace btlab {

// Transform parameter a in (0,1) plus phase. The kink built from the zero
// state with parameter a has spatial steepness gamma = (a + 1/a)/2 and
// travels with speed c = -(1 - a^2)/(1 + a^2); the sign was fixed once by
// requiring the traveling profile to zero both the transform residual and
// the evolution residual. gamma * sqrt(1 - c^2) = 1.
struct KinkParams {
    double a = 0.5;
    double delta = 0.0;

    double gamma() const { return 0.5 * (a + 1.0 / a); }
    double speed() const { return -(1.0 - a * a) / (1.0 + a * a); }
};

KinkParams make_kink_params(double a, double delta);

// Phase-space point (u, v = u_t) on a grid. Backgrounds are flat near the
// boundary with u approaching integer multiples of 2*pi on each side; the
// kink index is the difference of those winding numbers.
struct SGState {
    Grid1D grid;
    Field u;
    Field v;

    int kink_index() const;
};

SGState make_sg_state(Field u, Field v);

SGState sg_zero(const Grid1D& grid);

// Closed-form traveling kink at time t. Throws DomainTooNarrow unless u is
// within 1e-10 of its limits at both grid ends. sg_kink_profile is the same
// construction without the admissibility check (used by modulation fitting,
// which may probe parameters whose tails do not fit the grid).
SGState sg_kink(const KinkParams& p, const Grid1D& grid, double t = 0.0);
SGState sg_kink_profile(const KinkParams& p, const Grid1D& grid, double t = 0.0);

// Trapezoid quadrature of v^2/2 + u_x^2/2 + (1 - cos u).
double sg_energy(const SGState& s);

// One step of the explicit position-Verlet scheme for u_tt = u_xx - sin u,
// boundary samples held fixed. Requires dt <= 0.9 dx.
SGState sg_step(const SGState& s, double dt);

struct SgSample {
    double t = 0.0;
    SGState state;
};

// Repeated sg_step over [0, T] with samples every `stride` steps; the first
// and last samples are always included. dt is shortened to divide T evenly.
std::vector<SgSample> sg_evolve(const SGState& s, double T, double dt,
                                int stride);

// Components of F(x, y, a): the two transform relations evaluated with
// diff_x, zero exactly when x and y are conjugate with parameter a.
std::pair<Field, Field> bt_residual(const SGState& x, const SGState& y,
                                    double a);
double bt_residual_sup(const SGState& x, const SGState& y, double a);

// Apply the transform to y, raising the kink index by one. The free constant
// of integration is exposed as delta: the new component's phase matches the
// closed-form kink with that delta. Integrates outward from the grid
// midpoint (the contracting direction on each side).
SGState bt_forward(const SGState& y, double a, double delta);

// Solve F(x, y, a) = 0 for (y, a) given x near a 1-kink: the second relation
// is an ODE for u' integrated inward from the two index-lowered tails, and a
// secant iteration on a closes the junction mismatch at the anchor.
struct SgInverseResult {
    SGState y;
    double a = 0.0;
};
SgInverseResult sg_bt_inverse(const SGState& x, double a_guess);

// Coefficient of the linearization in the x-slot,
// alpha = (a/2) cos((u+u')/2) + (1/(2a)) cos((u-u')/2),
// with limits read off the grid ends. For a (kink, zero) pair the limits are
// -+(a/2 + 1/(2a)) and the profile claims case 1.
CoefficientProfile sg_alpha(const SGState& x, const SGState& y, double a);

// Kernel element (phi, psi) of the linearization at an approximate zero of
// F, with l2_norm(phi) = 1.
std::pair<Field, Field> sg_kernel_element(const SGState& x, const SGState& y,
                                          double a);

// Solvability pairing int b mu dx for the parameter direction, with mu
// normalized to 1 at the kink midpoint. Strictly positive for (kink, zero).
double sg_nondegeneracy(const SGState& x, const SGState& y, double a);

// H^1 x L^2 distance between two states on the same grid.
double sg_distance(const SGState& s1, const SGState& s2);

} // namespace btlab
