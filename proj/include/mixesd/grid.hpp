#pragma once

#include <cstddef>
#include <vector>

#include "mixesd/closedform.hpp"
#include "mixesd/solver_config.hpp"
#include "mixesd/types.hpp"

namespace mixesd {

struct SupportSegment {
    double lo = 0.0;
    double hi = 0.0;
    int eig_count = 0; // pooled eigenvalues inducing the segment
};

// Ordered evaluation abscissae partitioned into disjoint support segments.
struct SpectralGrid {
    std::vector<double> points;      // strictly ascending
    std::vector<int> segment_of;     // per-point segment index
    std::vector<SupportSegment> segments;

    std::size_t size() const { return points.size(); }
};

// Widest spread each pooled eigenvalue can induce, with safety margin t:
// [lambda (1-sqrt(gamma))^2 / t, lambda (1+sqrt(gamma))^2 t].
// Zero eigenvalues produce no interval.
std::vector<Interval> dispersion_intervals(const std::vector<double>& lambdas,
                                           double gamma, double t);

// Merge overlapping dispersion intervals; a gap opens where b_p < a_{p+1}.
std::vector<SupportSegment> partition_segments(const std::vector<Interval>& intervals);

// Log-uniform points per segment: max(m_outer * P_i, m_inner) including both
// endpoints.
SpectralGrid initial_grid(const std::vector<SupportSegment>& segments,
                          const SolverConfig& config);

struct RegridResult {
    SpectralGrid grid;
    std::vector<std::size_t> added_indices; // positions of new points in grid
};

// Add n_add points inside existing segments. Cells are weighted by
// log-width * (sqrt(x |f''|) + 0.05 * max sqrt(x |f''|)); counts follow
// largest-remainder rounding and new points are placed log-uniformly
// inside their cell. Segments with fewer than 3 points fall back to pure
// log-width weighting.
RegridResult regrid(const SpectralGrid& grid, const std::vector<double>& density,
                    std::size_t n_add);

/// Ratio form: adds ceil(ratio * grid.size()) points.
RegridResult regrid(const SpectralGrid& grid, const std::vector<double>& density,
                    double ratio);

} // namespace mixesd
