#include "mixesd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

namespace mixesd {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned int pool = workers > 0 ? static_cast<unsigned int>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
    pool = std::min<unsigned int>(pool, static_cast<unsigned int>(n));
    if (pool <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned int w = 0; w < pool; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

// Chunk size for chained warm starts. Fixed so results do not depend on the
// worker count: each chunk is solved left to right, seeding every point with
// its predecessor's converged auxiliary vector.
constexpr std::size_t kChainChunk = 64;

void solve_initial_points(const PopulationMixture& mixture, const SolverConfig& config,
                          const SpectralGrid& grid, std::vector<PointSolution>& solutions) {
    const std::size_t n = grid.size();
    solutions.resize(n);
    if (!config.warm_start) {
        parallel_for(n, config.workers, [&](std::size_t i) {
            solutions[i] = solve_point(grid.points[i], mixture, config);
        });
        return;
    }
    const std::size_t chunks = (n + kChainChunk - 1) / kChainChunk;
    parallel_for(chunks, config.workers, [&](std::size_t c) {
        const std::size_t begin = c * kChainChunk;
        const std::size_t end = std::min(n, begin + kChainChunk);
        std::optional<CVector> carry;
        for (std::size_t i = begin; i < end; ++i) {
            solutions[i] = solve_point(grid.points[i], mixture, config, carry);
            carry = solutions[i].converged ? std::optional<CVector>(solutions[i].e)
                                           : std::nullopt;
        }
    });
}

std::size_t nearest_index(const std::vector<double>& xs, double x) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return 0;
    if (it == xs.end()) return xs.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    return (x - xs[hi - 1] <= xs[hi] - x) ? hi - 1 : hi;
}

// Replace non-converged values by linear interpolation between the nearest
// converged neighbors of the same segment; the indices stay flagged.
void patch_non_converged(DensityEstimate& estimate) {
    auto& sol = estimate.solutions;
    const auto& grid = estimate.grid;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        if (sol[i].converged) continue;
        estimate.diagnostics.non_converged.push_back(i);
        std::ptrdiff_t left = static_cast<std::ptrdiff_t>(i) - 1;
        while (left >= 0 &&
               (!sol[static_cast<std::size_t>(left)].converged ||
                grid.segment_of[static_cast<std::size_t>(left)] != grid.segment_of[i]))
            --left;
        std::size_t right = i + 1;
        while (right < sol.size() &&
               (!sol[right].converged || grid.segment_of[right] != grid.segment_of[i]))
            ++right;
        const bool has_left = left >= 0;
        const bool has_right = right < sol.size();
        if (has_left && has_right) {
            const auto l = static_cast<std::size_t>(left);
            const double w = (grid.points[i] - grid.points[l]) /
                             (grid.points[right] - grid.points[l]);
            sol[i].f = (1.0 - w) * sol[l].f + w * sol[right].f;
        } else if (has_left) {
            sol[i].f = sol[static_cast<std::size_t>(left)].f;
        } else if (has_right) {
            sol[i].f = sol[right].f;
        }
    }
}

} // namespace

double integrate_density(const DensityEstimate& estimate) {
    const auto& grid = estimate.grid;
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid.segment_of[i] != grid.segment_of[i + 1]) continue;
        mass += 0.5 * (estimate.solutions[i].f + estimate.solutions[i + 1].f) *
                (grid.points[i + 1] - grid.points[i]);
    }
    return mass;
}

DensityEstimate compute_esd(const PopulationMixture& mixture, const SolverConfig& config) {
    config.validate();
    const auto pool = eigenvalue_pool(mixture);
    const auto intervals = dispersion_intervals(pool, mixture.gamma(), config.t);
    const auto segments = partition_segments(intervals);

    DensityEstimate estimate;
    estimate.gamma = mixture.gamma();
    estimate.grid = initial_grid(segments, config);
    solve_initial_points(mixture, config, estimate.grid, estimate.solutions);
    const std::size_t initial_size = estimate.grid.size();

    for (int level = 0; level < config.levels; ++level) {
        std::vector<double> density(estimate.grid.size());
        for (std::size_t i = 0; i < density.size(); ++i) density[i] = estimate.solutions[i].f;
        const auto n_add = static_cast<std::size_t>(
            std::ceil(config.regrid_ratio(level) * static_cast<double>(initial_size)));
        auto refined = regrid(estimate.grid, density, n_add);

        std::vector<PointSolution> merged(refined.grid.size());
        std::vector<bool> is_new(refined.grid.size(), false);
        for (std::size_t idx : refined.added_indices) is_new[idx] = true;
        std::size_t old_i = 0;
        for (std::size_t i = 0; i < refined.grid.size(); ++i)
            if (!is_new[i]) merged[i] = estimate.solutions[old_i++];

        const auto& old_points = estimate.grid.points;
        const auto& old_solutions = estimate.solutions;
        parallel_for(refined.added_indices.size(), config.workers, [&](std::size_t j) {
            const std::size_t idx = refined.added_indices[j];
            const double x = refined.grid.points[idx];
            std::optional<CVector> seed;
            if (config.warm_start) {
                const auto& near = old_solutions[nearest_index(old_points, x)];
                if (near.converged) seed = near.e;
            }
            merged[idx] = solve_point(x, mixture, config, seed);
        });
        estimate.grid = std::move(refined.grid);
        estimate.solutions = std::move(merged);
    }

    for (const auto& s : estimate.solutions) {
        estimate.diagnostics.total_iterations += s.iterations;
        estimate.diagnostics.max_point_iterations =
            std::max(estimate.diagnostics.max_point_iterations, s.iterations);
    }
    patch_non_converged(estimate);
    estimate.mass = integrate_density(estimate);
    estimate.diagnostics.expected_mass = std::min(1.0, 1.0 / mixture.gamma());
    estimate.diagnostics.mass_warning =
        estimate.diagnostics.expected_mass - estimate.mass > 5e-3;
    return estimate;
}

std::vector<double> interpolate_density(const DensityEstimate& estimate,
                                        const std::vector<double>& queries) {
    const auto& grid = estimate.grid;
    std::vector<double> values(queries.size(), 0.0);
    if (grid.size() == 0) return values;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const double x = queries[q];
        const auto it = std::lower_bound(grid.points.begin(), grid.points.end(), x);
        if (it == grid.points.end()) continue;
        const std::size_t hi = static_cast<std::size_t>(it - grid.points.begin());
        if (grid.points[hi] == x) {
            values[q] = estimate.solutions[hi].f;
            continue;
        }
        if (hi == 0) continue;
        const std::size_t lo = hi - 1;
        if (grid.segment_of[lo] != grid.segment_of[hi]) continue; // inter-segment gap
        const double w = (x - grid.points[lo]) / (grid.points[hi] - grid.points[lo]);
        values[q] = (1.0 - w) * estimate.solutions[lo].f + w * estimate.solutions[hi].f;
    }
    return values;
}

} // namespace mixesd
