#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mixesd/types.hpp"

namespace mixesd {

// Tunable constants of the whole pipeline. Defaults follow the reference
// parameterization; every field is overridable from the CLI config.
struct SolverConfig {
    double epsilon = 1e-5;       // target accuracy
    double xi0 = 1.0;            // initial imaginary parameter
    double beta = 10.0;          // homotopy division factor
    int q_cap = 2;               // Anderson history cap, Q_i = min(q_cap, i-1)
    double damping_scale = 0.1;  // multiplier in the Anderson damping parameter

    double t = 1.001;            // dispersion-interval safety margin
    int m_outer = 3;             // minimum grid points per pooled eigenvalue
    int m_inner = 15;            // minimum grid points per segment
    int m_min = 100;             // minimum discretization dimension M^(m)

    int levels = 1;                          // regrid rounds L
    std::vector<double> regrid_ratios = {1.0}; // R_l, last value repeated if short

    std::size_t max_iters = 0;   // per-point cap; 0 = 10*ceil(1/epsilon), at most 1e6
    int workers = 0;             // worker pool size; 0 = hardware concurrency
    bool warm_start = true;      // neighbor warm starts (chunk-chained, deterministic)

    std::size_t effective_max_iters() const {
        if (max_iters > 0) return max_iters;
        const double cap = 10.0 * std::ceil(1.0 / epsilon);
        return static_cast<std::size_t>(std::min(cap, 1e6));
    }

    double regrid_ratio(int level) const {
        if (regrid_ratios.empty()) return 1.0;
        const std::size_t i = static_cast<std::size_t>(level);
        return i < regrid_ratios.size() ? regrid_ratios[i] : regrid_ratios.back();
    }

    void validate() const {
        if (!(epsilon > 0.0)) throw InvalidProblem("epsilon must be positive");
        if (!(xi0 >= epsilon)) throw InvalidProblem("xi0 must be at least epsilon");
        if (!(beta > 1.0)) throw InvalidProblem("beta must exceed 1");
        if (q_cap < 0) throw InvalidProblem("q_cap must be nonnegative");
        if (!(t > 1.0)) throw InvalidProblem("t must exceed 1");
        if (m_outer < 1 || m_inner < m_outer)
            throw InvalidProblem("grid point bounds need 1 <= m_outer <= m_inner");
        if (m_min < 1) throw InvalidProblem("m_min must be positive");
        if (levels < 0) throw InvalidProblem("levels must be nonnegative");
        for (double r : regrid_ratios)
            if (!(r > 0.0)) throw InvalidProblem("regrid ratios must be positive");
    }
};

} // namespace mixesd
