#include "mixesd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mixesd {

std::vector<Interval> dispersion_intervals(const std::vector<double>& lambdas,
                                           double gamma, double t) {
    if (!(t > 1.0)) throw InvalidProblem("safety margin t must exceed 1");
    const double root = std::sqrt(gamma);
    const double lo_coef = (1.0 - root) * (1.0 - root) / t;
    const double hi_coef = (1.0 + root) * (1.0 + root) * t;
    std::vector<Interval> intervals;
    intervals.reserve(lambdas.size());
    for (double lambda : lambdas) {
        if (lambda <= 0.0) continue;
        intervals.push_back({lo_coef * lambda, hi_coef * lambda});
    }
    return intervals;
}

std::vector<SupportSegment> partition_segments(const std::vector<Interval>& intervals) {
    if (intervals.empty())
        throw InvalidProblem("degenerate spectrum: no positive eigenvalues to grid");
    std::vector<SupportSegment> segments;
    SupportSegment current{intervals[0].lo, intervals[0].hi, 1};
    for (std::size_t p = 1; p < intervals.size(); ++p) {
        if (current.hi < intervals[p].lo) {
            segments.push_back(current);
            current = {intervals[p].lo, intervals[p].hi, 1};
        } else {
            current.hi = std::max(current.hi, intervals[p].hi);
            ++current.eig_count;
        }
    }
    segments.push_back(current);
    return segments;
}

namespace {

// Log-uniform placement with both endpoints pinned exactly. Spacing is built
// from the hi/lo ratio so scaling the segment scales every point.
void append_log_points(double lo, double hi, int count, int segment_index,
                       SpectralGrid& grid) {
    if (lo <= 0.0) lo = 1e-12 * hi;
    grid.points.push_back(lo);
    grid.segment_of.push_back(segment_index);
    if (count < 2) return;
    const double step = std::log(hi / lo) / (count - 1);
    for (int k = 1; k + 1 < count; ++k) {
        grid.points.push_back(lo * std::exp(k * step));
        grid.segment_of.push_back(segment_index);
    }
    grid.points.push_back(hi);
    grid.segment_of.push_back(segment_index);
}

} // namespace

SpectralGrid initial_grid(const std::vector<SupportSegment>& segments,
                          const SolverConfig& config) {
    config.validate();
    SpectralGrid grid;
    grid.segments = segments;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const int count = std::max(config.m_outer * segments[s].eig_count, config.m_inner);
        append_log_points(segments[s].lo, segments[s].hi, count, static_cast<int>(s), grid);
    }
    return grid;
}

namespace {

// Three-point second derivative on nonuniform spacing, per segment;
// endpoints copy their neighbor. Estimates below the round-off floor of the
// divided difference are zeroed so a flat density reports zero curvature.
std::vector<double> curvature_estimate(const SpectralGrid& grid,
                                       const std::vector<double>& density) {
    const std::size_t n = grid.size();
    double f_scale = 0.0;
    for (double f : density) f_scale = std::max(f_scale, std::abs(f));
    std::vector<double> f2(n, 0.0);
    std::size_t start = 0;
    while (start < n) {
        std::size_t stop = start;
        while (stop + 1 < n && grid.segment_of[stop + 1] == grid.segment_of[start]) ++stop;
        const std::size_t len = stop - start + 1;
        if (len >= 3) {
            for (std::size_t i = start + 1; i < stop; ++i) {
                const double h1 = grid.points[i] - grid.points[i - 1];
                const double h2 = grid.points[i + 1] - grid.points[i];
                const double value =
                    2.0 * (h1 * density[i + 1] - (h1 + h2) * density[i] + h2 * density[i - 1]) /
                    (h1 * h2 * (h1 + h2));
                const double noise_floor =
                    32.0 * std::numeric_limits<double>::epsilon() * f_scale / (h1 * h2);
                f2[i] = std::abs(value) < noise_floor ? 0.0 : value;
            }
            f2[start] = f2[start + 1];
            f2[stop] = f2[stop - 1];
        }
        start = stop + 1;
    }
    return f2;
}

} // namespace

RegridResult regrid(const SpectralGrid& grid, const std::vector<double>& density,
                    std::size_t n_add) {
    if (density.size() != grid.size())
        throw InvalidProblem("density values do not cover the grid");

    struct Cell {
        std::size_t left;     // index of the left grid point
        double log_width;
        double strength;      // sqrt(x |f''|) at the cell midpoint
    };
    const auto f2 = curvature_estimate(grid, density);
    std::vector<Cell> cells;
    cells.reserve(grid.size());
    double max_strength = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid.segment_of[i] != grid.segment_of[i + 1]) continue;
        const double mid = 0.5 * (grid.points[i] + grid.points[i + 1]);
        const double curv = 0.5 * (std::abs(f2[i]) + std::abs(f2[i + 1]));
        Cell cell{i, std::log(grid.points[i + 1] / grid.points[i]), std::sqrt(mid * curv)};
        max_strength = std::max(max_strength, cell.strength);
        cells.push_back(cell);
    }

    std::vector<double> weight(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
        weight[c] = max_strength > 0.0
                        ? cells[c].log_width * (cells[c].strength + 0.05 * max_strength)
                        : cells[c].log_width;
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);

    // Largest-remainder allocation of n_add points across cells.
    std::vector<std::size_t> counts(cells.size(), 0);
    if (total > 0.0 && n_add > 0) {
        std::vector<std::pair<double, std::size_t>> remainders(cells.size());
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double quota = static_cast<double>(n_add) * weight[c] / total;
            counts[c] = static_cast<std::size_t>(std::floor(quota));
            assigned += counts[c];
            remainders[c] = {quota - std::floor(quota), c};
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t r = 0; assigned < n_add && r < remainders.size(); ++r, ++assigned)
            ++counts[remainders[r].second];
        // n_add can exceed the remainder pool; spill round-robin.
        std::size_t c = 0;
        while (assigned < n_add) {
            ++counts[c % counts.size()];
            ++c;
            ++assigned;
        }
    }

    struct Tagged {
        double x;
        int segment;
        bool added;
    };
    std::vector<Tagged> merged;
    merged.reserve(grid.size() + n_add);
    for (std::size_t i = 0; i < grid.size(); ++i)
        merged.push_back({grid.points[i], grid.segment_of[i], false});
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::size_t i = cells[c].left;
        const double lo = grid.points[i];
        const std::size_t m = counts[c];
        for (std::size_t k = 1; k <= m; ++k) {
            const double frac = static_cast<double>(k) / static_cast<double>(m + 1);
            merged.push_back({lo * std::exp(frac * cells[c].log_width), grid.segment_of[i], true});
        }
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const Tagged& a, const Tagged& b) { return a.x < b.x; });

    RegridResult result;
    result.grid.segments = grid.segments;
    result.grid.points.reserve(merged.size());
    result.grid.segment_of.reserve(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        // Log placement cannot collide with existing points except by exact tie.
        if (!result.grid.points.empty() && merged[i].x == result.grid.points.back()) continue;
        result.grid.points.push_back(merged[i].x);
        result.grid.segment_of.push_back(merged[i].segment);
        if (merged[i].added) result.added_indices.push_back(result.grid.points.size() - 1);
    }
    return result;
}

RegridResult regrid(const SpectralGrid& grid, const std::vector<double>& density,
                    double ratio) {
    if (!(ratio > 0.0)) throw InvalidProblem("regrid ratio must be positive");
    const auto n_add = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(grid.size())));
    return regrid(grid, density, n_add);
}

} // namespace mixesd
