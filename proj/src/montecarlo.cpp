#include "mixesd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

#include "mixesd/linalg.hpp"

namespace mixesd {

namespace {

std::vector<int> population_row_counts(const PopulationMixture& mixture, int samples) {
    const int k_count = mixture.population_count();
    std::vector<int> counts(static_cast<std::size_t>(k_count));
    std::vector<std::pair<double, int>> remainders(static_cast<std::size_t>(k_count));
    int assigned = 0;
    for (int k = 0; k < k_count; ++k) {
        const double quota = mixture.weight(k) * samples;
        counts[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(quota));
        assigned += counts[static_cast<std::size_t>(k)];
        remainders[static_cast<std::size_t>(k)] = {quota - std::floor(quota), k};
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < samples; ++r, ++assigned)
        ++counts[static_cast<std::size_t>(remainders[r % remainders.size()].second)];
    for (int k = 0; k < k_count; ++k)
        if (counts[static_cast<std::size_t>(k)] == 0)
            throw InvalidProblem("population " + std::to_string(k) +
                                 " unsampled at this N; increase the sample count");
    return counts;
}

Matrix hermitian_sqrt(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw NumericBreakdown("eigendecomposition failed while forming a covariance root");
    Eigen::VectorXd evals = solver.eigenvalues().cwiseMax(0.0);
    return solver.eigenvectors() * evals.cwiseSqrt().asDiagonal() *
           solver.eigenvectors().adjoint();
}

} // namespace

EmpiricalSpectrum sample_spectrum(const PopulationMixture& mixture, int samples,
                                  int trials, std::uint64_t seed, int workers) {
    if (trials < 0) throw InvalidProblem("trial count must be nonnegative");
    EmpiricalSpectrum spectrum;
    spectrum.dim = mixture.dim();
    spectrum.samples = samples;
    spectrum.trials = trials;
    spectrum.seed = seed;
    if (trials == 0) return spectrum;
    if (samples < 1) throw InvalidProblem("sample count must be positive");

    const int m_dim = mixture.dim();
    const int k_count = mixture.population_count();
    const auto counts = population_row_counts(mixture, samples);

    std::vector<Matrix> roots(static_cast<std::size_t>(k_count));
    for (int k = 0; k < k_count; ++k)
        roots[static_cast<std::size_t>(k)] = hermitian_sqrt(mixture.population(k));

    std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t trial) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(trial)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

        Matrix x(samples, m_dim);
        CVector g(m_dim);
        int row = 0;
        for (int k = 0; k < k_count; ++k) {
            for (int r = 0; r < counts[static_cast<std::size_t>(k)]; ++r, ++row) {
                for (int m = 0; m < m_dim; ++m)
                    g[m] = cplx(normal(rng) * inv_sqrt2, normal(rng) * inv_sqrt2);
                x.row(row) = (roots[static_cast<std::size_t>(k)] * g).transpose();
            }
        }
        const Matrix y = (x.adjoint() * x) / static_cast<double>(samples);
        auto evals = hermitian_eigenvalues(y);
        for (double& v : evals) {
            if (v < -1e-8)
                throw NumericBreakdown("sample covariance produced a large negative eigenvalue");
            if (v < 0.0) v = 0.0;
        }
        per_trial[trial] = std::move(evals);
    });

    for (auto& evals : per_trial)
        spectrum.eigenvalues.insert(spectrum.eigenvalues.end(), evals.begin(), evals.end());
    std::sort(spectrum.eigenvalues.begin(), spectrum.eigenvalues.end());
    return spectrum;
}

double estimate_cdf(const DensityEstimate& estimate, double x) {
    const auto& grid = estimate.grid;
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid.segment_of[i] != grid.segment_of[i + 1]) continue;
        const double x0 = grid.points[i];
        const double x1 = grid.points[i + 1];
        if (x <= x0) break;
        const double f0 = estimate.solutions[i].f;
        const double f1 = estimate.solutions[i + 1].f;
        if (x >= x1) {
            mass += 0.5 * (f0 + f1) * (x1 - x0);
        } else {
            const double w = (x - x0) / (x1 - x0);
            const double fx = (1.0 - w) * f0 + w * f1;
            mass += 0.5 * (f0 + fx) * (x - x0);
            break;
        }
    }
    return mass;
}

double ks_distance(const EmpiricalSpectrum& empirical, const DensityEstimate& estimate) {
    if (empirical.eigenvalues.empty() || estimate.grid.size() == 0)
        throw InvalidProblem("ks_distance needs a non-empty spectrum and estimate");

    const double zero_floor = 1e-10 * std::max(1.0, empirical.eigenvalues.back());
    std::vector<double> values;
    values.reserve(empirical.eigenvalues.size());
    for (double v : empirical.eigenvalues)
        if (v > zero_floor) values.push_back(v);
    if (values.empty()) throw InvalidProblem("empirical spectrum has only zero eigenvalues");

    const double total_mass = integrate_density(estimate);
    if (!(total_mass > 0.0)) throw InvalidProblem("estimate carries no mass");

    const double n = static_cast<double>(values.size());
    double distance = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double model = estimate_cdf(estimate, values[i]) / total_mass;
        const double below = static_cast<double>(i) / n;
        const double above = static_cast<double>(i + 1) / n;
        distance = std::max({distance, std::abs(model - below), std::abs(model - above)});
    }
    return distance;
}

void write_eigenvalues(const EmpiricalSpectrum& spectrum, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidProblem("cannot open " + path + " for writing");
    char buffer[64];
    for (double v : spectrum.eigenvalues) {
        std::snprintf(buffer, sizeof(buffer), "%.17g\n", v);
        out << buffer;
    }
}

} // namespace mixesd
