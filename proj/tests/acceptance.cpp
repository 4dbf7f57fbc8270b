// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier runs print their measured values so regressions are easy
// to read off the ctest log.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mixesd/closedform.hpp"
#include "mixesd/linalg.hpp"
#include "mixesd/montecarlo.hpp"
#include "mixesd/pipeline.hpp"
#include "mixesd/runspec.hpp"
#include "mixesd/solver.hpp"

#include <Eigen/QR>

using namespace mixesd;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %-28s %s\n", pass ? "PASS" : "FAIL", criterion,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buffer[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

PopulationMixture mp_mixture(double gamma) {
    TestProblem spec;
    spec.kind = ProblemKind::Mp;
    spec.gamma = gamma;
    return build_test_problem(spec);
}

PopulationMixture two_delta_mixture(double gamma, std::vector<double> lambdas,
                                    std::vector<double> weights) {
    TestProblem spec;
    spec.kind = ProblemKind::TwoDelta;
    spec.gamma = gamma;
    spec.lambdas = std::move(lambdas);
    spec.weights = std::move(weights);
    return build_test_problem(spec);
}

std::vector<double> midpoint_queries(double lo, double hi, int n) {
    std::vector<double> queries(static_cast<std::size_t>(n));
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) queries[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h;
    return queries;
}

double mean_abs_error(const DensityEstimate& estimate, const std::vector<double>& queries,
                      const std::function<double(double)>& oracle) {
    const auto values = interpolate_density(estimate, queries);
    double total = 0.0;
    for (std::size_t i = 0; i < queries.size(); ++i)
        total += std::abs(values[i] - oracle(queries[i]));
    return total / static_cast<double>(queries.size());
}

// Support edges read off the computed density: threshold crossing refined by
// extrapolating f^2 (linear near a sqrt edge) to zero.
struct DensityRun {
    double lo;
    double hi;
};

std::vector<DensityRun> density_support_runs(const DensityEstimate& estimate,
                                             double rel_threshold = 1e-3) {
    const auto& grid = estimate.grid;
    double peak = 0.0;
    for (const auto& s : estimate.solutions) peak = std::max(peak, s.f);
    const double threshold = rel_threshold * peak;

    std::vector<DensityRun> runs;
    const std::size_t n = grid.size();
    std::size_t i = 0;
    const auto above = [&](std::size_t j) { return estimate.solutions[j].f > threshold; };
    const auto same_segment = [&](std::size_t a, std::size_t b) {
        return grid.segment_of[a] == grid.segment_of[b];
    };
    while (i < n) {
        if (!above(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && same_segment(j, j + 1) && above(j + 1)) ++j;
        const auto edge = [&](std::size_t a, std::size_t b) {
            // f^2 is linear in x near the edge; extrapolate through (x_a, f_a^2),
            // (x_b, f_b^2) to f^2 = 0.
            const double fa = estimate.solutions[a].f, fb = estimate.solutions[b].f;
            const double ya = fa * fa, yb = fb * fb;
            if (yb == ya) return grid.points[a];
            const double x0 =
                grid.points[a] - ya * (grid.points[b] - grid.points[a]) / (yb - ya);
            return x0;
        };
        DensityRun run;
        run.lo = (i + 1 <= j) ? std::max(grid.points[i] == grid.points.front()
                                             ? grid.points[i]
                                             : edge(i, i + 1),
                                         grid.segments[grid.segment_of[i]].lo)
                              : grid.points[i];
        run.hi = (j >= 1 && j - 1 >= i) ? std::min(edge(j, j - 1),
                                                   grid.segments[grid.segment_of[j]].hi)
                                        : grid.points[j];
        runs.push_back(run);
        i = j + 1;
    }
    return runs;
}

void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    SolverConfig config;
    config.workers = 1;
    const auto estimate = compute_esd(mp_mixture(0.5), config);
    const MpLaw law(0.5);
    const double err = mean_abs_error(
        estimate, midpoint_queries(law.support_lo, law.support_hi, 10000),
        [](double x) { return mp_density(x, 0.5); });
    const double elapsed = seconds_since(start);
    report(1, "mp oracle accuracy", err <= 1e-4 && elapsed <= 60.0,
           fmt("mean|df|=%.3g (<=1e-4)  runtime=%.1fs (<=60s single worker)", err, elapsed));
}

void criterion_2() {
    std::vector<double> gammas;
    for (int i = 0; i < 10; ++i) gammas.push_back(0.05 + 0.1 * i);
    gammas.push_back(1.0 - 2e-9); // the gamma=1 entry, nudged per the singularity guard
    for (int i = 0; i < 10; ++i) gammas.push_back(1.0 / (0.05 + 0.1 * i));

    bool pass = true;
    double worst_err = 0.0, worst_mass = 0.0, worst_err_gamma = 0.0, worst_mass_gamma = 0.0;
    for (double gamma : gammas) {
        const auto estimate = compute_esd(mp_mixture(gamma), SolverConfig{});
        const MpLaw law(gamma);
        const double err = mean_abs_error(
            estimate, midpoint_queries(law.support_lo, law.support_hi, 10000),
            [gamma](double x) { return mp_density(x, gamma); });
        const double mass_err = std::abs(estimate.mass - std::min(1.0, 1.0 / gamma));
        if (err > worst_err) {
            worst_err = err;
            worst_err_gamma = gamma;
        }
        if (mass_err > worst_mass) {
            worst_mass = mass_err;
            worst_mass_gamma = gamma;
        }
        pass = pass && err <= 1e-4 && mass_err <= 2e-3;
    }
    report(2, "gamma sweep", pass,
           fmt("21 ratios; worst mean|df|=%.3g at gamma=%.3g (<=1e-4), worst |mass err|=%.3g "
               "at gamma=%.3g (<=2e-3)",
               worst_err, worst_err_gamma, worst_mass, worst_mass_gamma));
}

void criterion_3() {
    const std::array<double, 2> lambdas{1.0, 8.0};
    const std::array<double, 2> weights{0.5, 0.5};

    const auto mid = compute_esd(two_delta_mixture(0.5, {1.0, 8.0}, {0.5, 0.5}),
                                 SolverConfig{});
    const auto support = two_delta_support(0.5, lambdas, weights);
    const double err = mean_abs_error(
        mid, midpoint_queries(support.front().lo, support.back().hi, 10000),
        [&](double x) { return two_delta_density(x, 0.5, lambdas, weights); });

    const auto split = compute_esd(two_delta_mixture(0.05, {1.0, 8.0}, {0.5, 0.5}),
                                   SolverConfig{});
    const auto oracle_runs = two_delta_support(0.05, lambdas, weights);
    const auto found_runs = density_support_runs(split);
    bool edges_ok = split.segments().size() == 2 && found_runs.size() == oracle_runs.size();
    double worst_edge = 0.0;
    if (edges_ok) {
        for (std::size_t i = 0; i < oracle_runs.size(); ++i) {
            const double lo_err =
                std::abs(found_runs[i].lo - oracle_runs[i].lo) / oracle_runs[i].lo;
            const double hi_err =
                std::abs(found_runs[i].hi - oracle_runs[i].hi) / oracle_runs[i].hi;
            worst_edge = std::max({worst_edge, lo_err, hi_err});
        }
        edges_ok = worst_edge <= 0.01;
    }
    report(3, "two-delta oracle", err <= 1e-4 && edges_ok,
           fmt("gamma=0.5 mean|df|=%.3g (<=1e-4); gamma=0.05 segments=%zu/%zu, worst edge "
               "err=%.3g (<=0.01)",
               err, split.segments().size(), oracle_runs.size(), worst_edge));
}

void criterion_4() {
    bool pass = true;
    std::string detail;
    for (const auto& weights :
         std::vector<std::array<double, 2>>{{0.99, 0.01}, {0.01, 0.99}}) {
        const std::array<double, 2> lambdas{1.0, 100.0};
        const auto mixture =
            two_delta_mixture(0.5, {1.0, 100.0}, {weights[0], weights[1]});
        const auto estimate = compute_esd(mixture, SolverConfig{});
        const auto oracle_runs = two_delta_support(0.5, lambdas, weights);
        const auto found_runs = density_support_runs(estimate);
        const double mass_err = std::abs(estimate.mass - 1.0);
        const double err = mean_abs_error(
            estimate, midpoint_queries(oracle_runs.front().lo, oracle_runs.back().hi, 10000),
            [&](double x) { return two_delta_density(x, 0.5, lambdas, weights); });
        const bool ok = found_runs.size() == oracle_runs.size() && mass_err <= 2e-3 &&
                        err <= 1e-3;
        pass = pass && ok;
        detail += fmt("w1=%.2f: runs=%zu/%zu mass_err=%.2g err=%.3g  ", weights[0],
                      found_runs.size(), oracle_runs.size(), mass_err, err);
    }
    report(4, "skewed support detection", pass, detail + "(mass<=2e-3, err<=1e-3)");
}

void criterion_5() {
    const std::array<double, 2> lambdas{1.0, 8.0};
    const std::array<double, 2> weights{0.5, 0.5};
    const auto dd = two_delta_mixture(0.5, {1.0, 8.0}, {0.5, 0.5});
    SolverConfig config;

    // Letter of the criterion: x=2.2 sits in the oracle's spectral gap, so the
    // homotopy solver must match the (zero) oracle value.
    const double oracle_gap = two_delta_density(2.2, 0.5, lambdas, weights);
    const auto with_homotopy = solve_point(2.2, dd, config);
    const bool gap_ok =
        with_homotopy.converged && std::abs(with_homotopy.f - oracle_gap) <= 1e-4;

    // Spirit of the criterion: reproduce the spurious attractor where the true
    // density is positive. The mp problem at x=2.2 (and the upper two-delta
    // component at x=3) both expose it once continuation is disabled.
    const auto mp = mp_mixture(0.5);
    const double mp_truth = mp_density(2.2, 0.5);
    const auto mp_solved = solve_point(2.2, mp, config);
    const bool mp_ok = mp_solved.converged && std::abs(mp_solved.f - mp_truth) <= 1e-4;

    SolverConfig no_continuation = config;
    no_continuation.xi0 = no_continuation.epsilon; // schedule starts (and stays) at epsilon
    const std::vector<cplx> adversarial{
        cplx(-0.9, 1e-6), cplx(0.3, 1e-6), cplx(0.0, 1e-4), cplx(-1.4, -0.2),
        cplx(0.8, -1e-3),
    };
    int spurious = 0;
    for (const cplx& start : adversarial) {
        CVector e(1);
        e[0] = start;
        const auto attempt = solve_point(2.2, mp, no_continuation, e);
        if (!attempt.converged || attempt.f <= 1e-3) ++spurious;
    }
    const bool attractor_shown = spurious > 0;

    report(5, "homotopy necessity", gap_ok && mp_ok && attractor_shown,
           fmt("dd x=2.2: |f-oracle|=%.2g (<=1e-4, oracle=0 in gap); mp x=2.2: |f-f*|=%.2g; "
               "spurious starts without continuation: %d/%zu (need >=1, true f=%.3f)",
               std::abs(with_homotopy.f - oracle_gap), std::abs(mp_solved.f - mp_truth),
               spurious, adversarial.size(), mp_truth));
}

void criterion_6() {
    const auto mp = mp_mixture(0.5);
    const MpLaw law(0.5);
    const auto queries = midpoint_queries(law.support_lo, law.support_hi, 10000);
    const auto oracle = [](double x) { return mp_density(x, 0.5); };

    SolverConfig accelerated;
    accelerated.max_iters = static_cast<std::size_t>(std::ceil(1.0 / accelerated.epsilon));
    accelerated.warm_start = false; // identical cold schedules for both runs
    SolverConfig plain = accelerated;
    plain.q_cap = 0;

    const auto fast = compute_esd(mp, accelerated);
    const auto slow = compute_esd(mp, plain);
    const double fast_err = mean_abs_error(fast, queries, oracle);
    const double slow_err = mean_abs_error(slow, queries, oracle);
    const auto fast_iters = fast.diagnostics.total_iterations;
    const auto slow_iters = slow.diagnostics.total_iterations;

    const bool pass = fast_err <= 1e-4 && slow_err > 1e-4 && slow_iters >= 5 * fast_iters;
    report(6, "anderson necessity", pass,
           fmt("q=2: err=%.3g iters=%zu; q=0: err=%.3g (must exceed 1e-4) iters=%zu "
               "(ratio %.1fx, need >=5x)",
               fast_err, fast_iters, slow_err, slow_iters,
               static_cast<double>(slow_iters) / static_cast<double>(fast_iters)));
}

void criterion_7() {
    bool pass = true;
    std::string detail;
    for (double gamma : {0.025, 0.5, 0.975}) {
        TestProblem spec;
        spec.kind = ProblemKind::Comb;
        spec.gamma = gamma;
        spec.dim = 200; // replicated discretization shared with the simulation
        const auto mixture = build_test_problem(spec);
        const auto estimate = compute_esd(mixture, SolverConfig{});

        double min_raw = 0.0;
        for (const auto& s : estimate.solutions)
            min_raw = std::min(min_raw, s.m.imag() / kPi);
        const bool nonnegative = min_raw >= -10.0 * SolverConfig{}.epsilon;
        const double mass_err = std::abs(estimate.mass - 1.0);

        const int samples = static_cast<int>(std::lround(200.0 / gamma));
        const auto spectrum = sample_spectrum(mixture, samples, 20, 71717);
        const double ks = ks_distance(spectrum, estimate);

        bool ok = nonnegative && mass_err <= 5e-3 && ks <= 0.03;
        if (gamma == 0.025) ok = ok && estimate.segments().size() > 1;
        pass = pass && ok;
        detail += fmt("g=%.3f: segs=%zu mass_err=%.2g ks=%.3f  ", gamma,
                      estimate.segments().size(), mass_err, ks);
    }
    report(7, "comb problem", pass, detail + "(mass<=5e-3, ks<=0.03)");
}

void criterion_8() {
    const auto start = std::chrono::steady_clock::now();
    SolverConfig config;
    config.workers = 8;

    TestProblem diag;
    diag.kind = ProblemKind::Diag;
    diag.gamma = 0.5;
    diag.population_count = 6;
    diag.dim = 120;
    const auto diag_mixture = build_test_problem(diag);
    const auto diag_estimate = compute_esd(diag_mixture, config);
    const auto diag_sample = sample_spectrum(diag_mixture, 240, 20, 20240801, config.workers);
    const double diag_ks = ks_distance(diag_sample, diag_estimate);

    TestProblem corr = diag;
    corr.kind = ProblemKind::Corr;
    corr.rho = 0.2;
    corr.ell = 0.25;
    const auto corr_mixture = build_test_problem(corr);
    const auto corr_estimate = compute_esd(corr_mixture, config);
    const auto corr_sample = sample_spectrum(corr_mixture, 240, 20, 20240801, config.workers);
    const double corr_ks = ks_distance(corr_sample, corr_estimate);

    const double elapsed = seconds_since(start);
    const bool pass = diag_ks <= 0.03 && corr_ks <= 0.03 && elapsed <= 600.0;
    report(8, "mixture vs simulation", pass,
           fmt("diag ks=%.3f, corr ks=%.3f (<=0.03), runtime=%.0fs (<=600s, 8 workers)",
               diag_ks, corr_ks, elapsed));
}

void criterion_9() {
    bool pass = true;
    std::string detail;

    { // dense/scalar equivalence under a shared unitary rotation
        std::mt19937_64 rng(2024);
        std::normal_distribution<double> normal;
        Matrix a(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) a(i, j) = cplx(normal(rng), normal(rng));
        const Matrix u = Eigen::HouseholderQR<Matrix>(a).householderQ();
        Matrix diag = Matrix::Zero(6, 6);
        const std::vector<double> values{0.5, 1.0, 1.0, 2.5, 4.0, 8.0};
        for (int i = 0; i < 6; ++i) diag(i, i) = values[static_cast<std::size_t>(i)];
        Matrix dense = u * diag * u.adjoint();
        dense = 0.5 * (dense + dense.adjoint().eval());
        PopulationMixture diag_mix({diag}, {1.0}, 0.5);
        PopulationMixture dense_mix({dense}, {1.0}, 0.5);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            CVector e(1);
            e[0] = cplx(normal(rng), std::abs(normal(rng)) + 0.1);
            const cplx z(normal(rng), 0.3 + std::abs(normal(rng)));
            const auto lhs = resolvent_traces(e, z, diag_mix);
            const auto rhs = resolvent_traces(e, z, dense_mix);
            worst = std::max(worst, (lhs.e_out - rhs.e_out).cwiseAbs().maxCoeff());
            worst = std::max(worst, std::abs(lhs.m_out - rhs.m_out));
        }
        pass = pass && worst < 1e-12;
        detail += fmt("k1 paths agree to %.1e; ", worst);
    }

    { // grid scaling homogeneity at s = 2
        SolverConfig config;
        const std::vector<double> pool{0.25, 1.0, 3.0, 50.0};
        std::vector<double> doubled;
        for (double v : pool) doubled.push_back(2.0 * v);
        const auto base =
            initial_grid(partition_segments(dispersion_intervals(pool, 0.2, config.t)), config);
        const auto scaled = initial_grid(
            partition_segments(dispersion_intervals(doubled, 0.2, config.t)), config);
        bool exact = base.size() == scaled.size();
        for (std::size_t i = 0; exact && i < base.size(); ++i)
            exact = scaled.points[i] == 2.0 * base.points[i];
        pass = pass && exact;
        detail += fmt("grid scaling exact=%d; ", exact ? 1 : 0);
    }

    { // fixed-point consistency of converged solutions
        const auto dd = two_delta_mixture(0.5, {1.0, 8.0}, {0.5, 0.5});
        SolverConfig config;
        double worst = 0.0;
        for (double x : {0.3, 0.9, 1.5, 3.1, 9.0, 15.0}) {
            const auto solution = solve_point(x, dd, config);
            if (!solution.converged) {
                pass = false;
                continue;
            }
            const auto traces =
                resolvent_traces(solution.e, cplx(x, config.epsilon * config.epsilon), dd);
            worst = std::max(worst, (traces.e_out - solution.e).cwiseAbs().maxCoeff());
        }
        pass = pass && worst < 2.0 * SolverConfig{}.epsilon;
        detail += fmt("fixed-point residual=%.2g (<2eps); ", worst);
    }

    { // determinism of compute_esd and sample_spectrum
        const auto mix = two_delta_mixture(0.05, {1.0, 8.0}, {0.5, 0.5});
        SolverConfig config;
        config.workers = 2;
        const auto e1 = compute_esd(mix, config);
        const auto e2 = compute_esd(mix, config);
        bool same = e1.grid.size() == e2.grid.size() && e1.mass == e2.mass;
        for (std::size_t i = 0; same && i < e1.grid.size(); ++i)
            same = e1.solutions[i].f == e2.solutions[i].f && e1.solutions[i].m == e2.solutions[i].m;
        const auto s1 = sample_spectrum(mix, 200, 4, 5150);
        const auto s2 = sample_spectrum(mix, 200, 4, 5150);
        same = same && s1.eigenvalues == s2.eigenvalues;
        pass = pass && same;
        detail += fmt("determinism=%d; ", same ? 1 : 0);
    }

    { // anderson scalar hand example, bit exact
        AndersonHistory history(2);
        CVector g_prev(1), e_prev(1), g_now(1), e_now(1);
        g_prev[0] = cplx(0.2, 0.0);
        e_prev[0] = cplx(0.0, 0.0);
        history.push(g_prev, e_prev);
        g_now[0] = cplx(0.1, 0.0);
        e_now[0] = cplx(0.0, 0.0);
        const CVector next = anderson_update(history, g_now, e_now);
        const bool exact = next[0].real() == 0.05 && next[0].imag() == 0.0;
        pass = pass && exact;
        detail += fmt("anderson hand example exact=%d", exact ? 1 : 0);
    }

    report(9, "invariant suites", pass, detail);
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("%s: %d criterion(s) failed, total runtime %.0fs\n",
                failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures,
                seconds_since(start));
    return failures == 0 ? 0 : 1;
}
