#pragma once

#include <cstdint>
#include <vector>

#include "btlab/sine_gordon.hpp"
#include "btlab/toda.hpp"

namespace btlab {

enum class PerturbationKind {
    gaussian_u,
    gaussian_v,
    gaussian_q,
    gaussian_p,
    seeded_noise
};

// Additive perturbation with an exactly rescaled norm (H^1 x L^2 for field
// states, l2 x l2 for lattice states). The outermost 10 samples/sites are
// left untouched so background invariants survive. seeded_noise draws from
// SplitMix64 and is bit-reproducible for a fixed seed.
struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::gaussian_v;
    double amplitude = 0.0;
    double width = 1.0;
    double center = 0.0;
    std::uint64_t seed = 0;
};

SGState make_perturbation(const PerturbationSpec& spec, const SGState& target);
TodaState make_perturbation(const PerturbationSpec& spec,
                            const TodaState& target);

// Derivative-free modulation fit: coarse scan around the guess followed by
// golden-section refinement, coordinates cycled until the improvement stalls.
struct FitOptions {
    int scan_points = 11;
    double scan_half_param = 0.05; // half-width for a / kappa
    double scan_half_phase = 0.5;  // half-width for delta / gamma
    double param_tol = 1e-9;
    int max_recenter = 3;
    int max_cycles = 40;
    double cycle_tol = 1e-10;
};

struct SgFitResult {
    KinkParams params;
    double distance = 0.0;
};
SgFitResult fit_modulation_sg(const SGState& s, const KinkParams& guess,
                              const FitOptions& opt = {});

struct TodaFitResult {
    std::vector<SolitonParams> params;
    double distance = 0.0;
};
TodaFitResult fit_modulation_toda(const TodaState& s,
                                  const std::vector<SolitonParams>& guess,
                                  const FitOptions& opt = {});

// Residual of F along the simultaneous evolution of both trajectories; zero
// in exact arithmetic when (x0, y0, lambda) starts on the zero set.
struct ResidualSample {
    double t = 0.0;
    double residual = 0.0;
};
std::vector<ResidualSample> conjugation_residual_series(const SGState& x0,
                                                        const SGState& y0,
                                                        double a, double T,
                                                        double dt, int stride);
std::vector<ResidualSample> conjugation_residual_series(const TodaState& x0,
                                                        const TodaState& y0,
                                                        double kappa, double T,
                                                        double dt, int stride);

struct StabilityRow {
    double t = 0.0;
    double distance = 0.0;
    std::vector<double> params; // fitted (a, delta) or (kappa_i, gamma_i)*
    double energy = 0.0;
    double conj_residual = 0.0; // NaN when no conjugate pair is tracked
    bool fit_ok = true;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    double sup_distance = 0.0;
    double empirical_c = 0.0; // sup_distance / amplitude; NaN for amplitude 0
    double energy_drift = 0.0;
    double max_residual = 0.0; // sup of the conjugation column; NaN if absent
    bool pass = false;
};

struct SgExperimentConfig {
    Grid1D grid;
    KinkParams base;
    PerturbationSpec perturbation;
    double T = 50.0;
    double dt = 0.009;
    int stride = 50;
    double c_max = 5.0;
    FitOptions fit;
};

struct TodaExperimentConfig {
    LatticeWindow window;
    std::vector<SolitonParams> base;
    PerturbationSpec perturbation;
    double T = 50.0;
    double dt = 0.01;
    int stride = 50;
    double c_max = 5.0;
    FitOptions fit;
};

// Build the base state, perturb, evolve, fit the modulation parameters at
// every sample and assemble the report. At t = 0 the inverse transform is
// solved once and the conjugate trajectory co-evolved, so the rows carry the
// conjugation residual as well. A failed fit marks its row and the report
// as failed instead of aborting. pass = sup distance <= c_max * amplitude.
StabilityReport run_stability_experiment(const SgExperimentConfig& cfg);
StabilityReport run_stability_experiment(const TodaExperimentConfig& cfg);

} // namespace btlab
