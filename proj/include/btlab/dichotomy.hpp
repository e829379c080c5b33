#pragma once

#include <optional>

#include "btlab/grid.hpp"

namespace btlab {

// Sign/magnitude pattern of the limiting coefficients that decides how a
// first-order linear problem u' - alpha(x) u = f (or u_{n+1} - alpha_n u_n
// = f_n) can be solved:
//   case1 - decay away from the anchor on both sides, solvable for all data;
//   case2 - one-codimension solvability, data must be orthogonal to the
//           adjoint solution.
enum class DichotomyCase { case1, case2 };

// Sampled coefficient alpha with its declared limits. The continuous case1
// pattern is alpha_- > 0 > alpha_+, case2 the reverse; the discrete pattern
// compares |alpha_±| against 1. Limits exactly on the boundary of the two
// cases are rejected.
struct CoefficientProfile {
    Field alpha;
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    Index anchor = 0;
    std::optional<DichotomyCase> claimed;
};

struct DiscreteCoefficientProfile {
    Seq alpha;
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    Index anchor = 0; // offset inside the window
    std::optional<DichotomyCase> claimed;
};

CoefficientProfile make_profile(Field alpha, double alpha_minus,
                                double alpha_plus, Index anchor,
                                std::optional<DichotomyCase> claimed);
DiscreteCoefficientProfile make_profile(Seq alpha, double alpha_minus,
                                        double alpha_plus, Index anchor,
                                        std::optional<DichotomyCase> claimed);

// Classification from the limits alone (nullopt when the pattern matches
// neither case, e.g. both limits on the same side).
std::optional<DichotomyCase> classify_continuous(double alpha_minus,
                                                 double alpha_plus);
std::optional<DichotomyCase> classify_discrete(double alpha_minus,
                                               double alpha_plus);

// Tail deviation of alpha from its limits, integrated/summed on each side of
// the anchor. Finiteness of these is what the solvability bounds depend on.
double tail_deviation_minus(const CoefficientProfile& cp);
double tail_deviation_plus(const CoefficientProfile& cp);
double tail_deviation_minus(const DiscreteCoefficientProfile& cp);
double tail_deviation_plus(const DiscreteCoefficientProfile& cp);

// mu(x) = exp(-int_{x0}^{x} alpha), accumulated in log space and
// exponentiated at the end; mu(anchor) = 1. Throws Overflow when the log
// exceeds 700 anywhere. Discrete analogue solves phi_{n-1} = alpha_n phi_n
// (requires alpha_n > 0).
Field adjoint_solution(const CoefficientProfile& cp);
Seq adjoint_solution(const DiscreteCoefficientProfile& cp);

// Case 1: unique solution with u(anchor) = 0, integrated outward from the
// anchor in the decaying direction on each side.
Field solve_case1(const CoefficientProfile& cp, const Field& f);
Seq solve_case1(const DiscreteCoefficientProfile& cp, const Seq& f);

// Case 2: the unique bounded solution, defined when f is orthogonal to the
// adjoint solution (NotOrthogonal otherwise). u0 is the value at the anchor.
struct Case2Solution {
    Field u;
    double u0 = 0.0;
};
struct DiscreteCase2Solution {
    Seq u;
    double u0 = 0.0;
};
Case2Solution solve_case2(const CoefficientProfile& cp, const Field& f);
DiscreteCase2Solution solve_case2(const DiscreteCoefficientProfile& cp,
                                  const Seq& f);

// Trapezoid integral (fields) or plain sum (sequences) of the product.
double pairing(const Field& b, const Field& mu);
double pairing(const Seq& b, const Seq& mu);

} // namespace btlab
