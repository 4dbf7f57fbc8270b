#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mixesd/grid.hpp"
#include "mixesd/models.hpp"
#include "mixesd/solver.hpp"
#include "mixesd/solver_config.hpp"

namespace mixesd {

struct EstimateDiagnostics {
    std::size_t total_iterations = 0;
    std::size_t max_point_iterations = 0;
    std::vector<std::size_t> non_converged; // grid indices, interpolated over
    double expected_mass = 1.0;             // min(1, 1/gamma)
    bool mass_warning = false;              // deficit beyond 5e-3
};

// The principal output: grid, per-point solutions, and the integrated mass.
struct DensityEstimate {
    SpectralGrid grid;
    std::vector<PointSolution> solutions; // aligned with grid.points
    double gamma = 0.0;
    double mass = 0.0;
    EstimateDiagnostics diagnostics;

    const std::vector<SupportSegment>& segments() const { return grid.segments; }
};

// Full run: pooled eigenvalues -> dispersion segments -> initial grid ->
// parallel point solves -> L regrid rounds (only new points solved, warm
// started from the nearest earlier point) -> assembled estimate.
DensityEstimate compute_esd(const PopulationMixture& mixture, const SolverConfig& config);

// Piecewise-linear density values; zero outside the gridded segments and in
// inter-segment gaps.
std::vector<double> interpolate_density(const DensityEstimate& estimate,
                                        const std::vector<double>& queries);

/// Trapezoidal mass, segments integrated independently.
double integrate_density(const DensityEstimate& estimate);

// Shared worker pool helper: runs fn(i) for i in [0, n) on `workers` threads
// (0 = hardware concurrency). Results must be written to disjoint slots.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

} // namespace mixesd
