#pragma once

#include <array>
#include <vector>

#include "mixesd/types.hpp"

namespace mixesd {

// Closed-form reference laws. These are deliberately independent of the
// fixed-point solver: the only shared machinery is complex arithmetic.

struct MpLaw {
    double gamma;
    double support_lo;   // (1 - sqrt(gamma))^2
    double support_hi;   // (1 + sqrt(gamma))^2
    double atom_at_zero; // 1 - 1/gamma for gamma > 1, else 0

    explicit MpLaw(double gamma);
};

/// Continuous part of the Marcenko-Pastur density; the gamma>1 atom at zero
/// is not included.
double mp_density(double x, double gamma);

/// CDF of the continuous part, by quadrature with the edge singularities
/// substituted away. Excludes the atom at zero.
double mp_cdf(double x, double gamma);

/// Roots of a x^3 + b x^2 + c x + d = 0 via the Cardano form in complex
/// arithmetic. a must be nonzero.
std::array<cplx, 3> solve_cubic(cplx a, cplx b, cplx c, cplx d);

// Two-point population spectrum: the aux-function fixed point clears to a
// cubic in u = 1 + gamma*e; the admissible root is the one whose
// reconstructed Stieltjes value has positive imaginary part.
double two_delta_density(double x, double gamma,
                         const std::array<double, 2>& lambdas,
                         const std::array<double, 2>& weights);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Support components located by scanning the cubic discriminant sign and
// bisecting each transition.
std::vector<Interval> two_delta_support(double gamma,
                                        const std::array<double, 2>& lambdas,
                                        const std::array<double, 2>& weights);

} // namespace mixesd
