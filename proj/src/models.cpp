#include "mixesd/models.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Eigenvalues>

#include "mixesd/linalg.hpp"

namespace mixesd {

namespace {

bool is_diagonal(const Matrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && a(i, j) != cplx(0.0, 0.0)) return false;
    return true;
}

} // namespace

PopulationMixture::PopulationMixture(std::vector<Matrix> populations,
                                     std::vector<double> weights,
                                     double gamma)
    : populations_(std::move(populations)), weights_(std::move(weights)), gamma_(gamma) {
    const std::size_t k_count = populations_.size();
    if (k_count == 0) throw InvalidProblem("mixture needs at least one population");
    if (weights_.size() != k_count)
        throw InvalidProblem("weight count does not match population count");

    double weight_sum = 0.0;
    for (double a : weights_) {
        if (!(a > 0.0)) throw InvalidProblem("mixture weights must be positive");
        weight_sum += a;
    }
    if (std::abs(weight_sum - 1.0) > 1e-12)
        throw InvalidProblem("mixture weights must sum to 1 within 1e-12");

    if (!(gamma_ > 0.0)) throw InvalidProblem("aspect ratio gamma must be positive");
    if (std::abs(gamma_ - 1.0) < 1e-9)
        throw InvalidProblem("aspect ratio gamma must satisfy |gamma - 1| >= 1e-9");

    dim_ = static_cast<int>(populations_[0].rows());
    if (dim_ < 1) throw InvalidProblem("population dimension must be positive");

    diagonal_ = true;
    for (std::size_t k = 0; k < k_count; ++k) {
        const Matrix& a = populations_[k];
        if (a.rows() != dim_ || a.cols() != dim_)
            throw InvalidProblem("population " + std::to_string(k) +
                                 " does not match the mixture dimension");
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw InvalidProblem("population " + std::to_string(k) +
                                 " is not Hermitian within 1e-12");
        diagonal_ = diagonal_ && is_diagonal(a);
    }

    eigenvalues_.resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        std::vector<double> evals;
        try {
            evals = hermitian_eigenvalues(populations_[k]);
        } catch (const NumericBreakdown& e) {
            throw InvalidProblem("eigendecomposition failed for population " +
                                 std::to_string(k) + ": " + e.what());
        }
        if (evals.front() < -1e-10)
            throw InvalidProblem("population " + std::to_string(k) +
                                 " has a negative eigenvalue beyond round-off");
        for (double& v : evals)
            if (v < 0.0) v = 0.0;
        eigenvalues_[k] = std::move(evals);
    }

    if (diagonal_) {
        // Group coordinates sharing the same per-population diagonal tuple so the
        // scalar evaluation path sums over distinct profiles only.
        std::vector<std::pair<std::vector<double>, int>> groups;
        for (int m = 0; m < dim_; ++m) {
            std::vector<double> tuple(k_count);
            for (std::size_t k = 0; k < k_count; ++k)
                tuple[k] = populations_[k](m, m).real();
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const auto& g) { return g.first == tuple; });
            if (it == groups.end())
                groups.emplace_back(std::move(tuple), 1);
            else
                ++it->second;
        }
        profiles_.reserve(groups.size());
        for (auto& g : groups)
            profiles_.push_back({std::move(g.first), g.second});
    }
}

Matrix average_covariance(const PopulationMixture& mixture) {
    Matrix avg = Matrix::Zero(mixture.dim(), mixture.dim());
    for (int k = 0; k < mixture.population_count(); ++k)
        avg += mixture.weight(k) * mixture.population(k);
    return avg;
}

std::vector<double> eigenvalue_pool(const PopulationMixture& mixture) {
    std::vector<double> pool;
    pool.reserve(static_cast<std::size_t>(mixture.dim()) *
                 static_cast<std::size_t>(mixture.population_count() + 1));
    for (int k = 0; k < mixture.population_count(); ++k) {
        const auto& evals = mixture.population_eigenvalues(k);
        pool.insert(pool.end(), evals.begin(), evals.end());
    }
    std::vector<double> avg_evals;
    try {
        avg_evals = hermitian_eigenvalues(average_covariance(mixture));
    } catch (const NumericBreakdown& e) {
        throw InvalidProblem(std::string("eigendecomposition failed for the average covariance: ") +
                             e.what());
    }
    for (double v : avg_evals)
        pool.push_back(v < 0.0 ? 0.0 : v);
    std::sort(pool.begin(), pool.end());
    return pool;
}

int multiplicity_denominator(const std::vector<double>& weights) {
    constexpr int kSearchCap = 1000000;
    for (int u = 1; u <= kSearchCap; ++u) {
        bool ok = true;
        for (double w : weights) {
            const double scaled = w * u;
            if (std::abs(scaled - std::round(scaled)) > 1e-9 || std::round(scaled) < 1.0) {
                ok = false;
                break;
            }
        }
        if (ok) return u;
    }
    return 0;
}

namespace {

// Diagonal covariance realizing a discrete spectrum with integer multiplicities.
PopulationMixture discrete_spectrum_mixture(const TestProblem& spec) {
    if (spec.lambdas.empty()) throw InvalidProblem("discrete spectrum needs eigenvalues");
    if (spec.lambdas.size() != spec.weights.size())
        throw InvalidProblem("eigenvalue and weight counts differ");
    double wsum = 0.0;
    for (double w : spec.weights) {
        if (!(w > 0.0)) throw InvalidProblem("spectrum weights must be positive");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw InvalidProblem("spectrum weights must sum to 1");
    for (double l : spec.lambdas)
        if (!(l > 0.0)) throw InvalidProblem("spectrum eigenvalues must be positive");

    const int unit = multiplicity_denominator(spec.weights);
    if (unit == 0)
        throw InvalidProblem("weights are not representable as integer multiplicities; "
                             "adjust the weights or pass an explicit M");

    int m_dim = spec.dim;
    if (m_dim == 0) {
        // Smallest multiple of the total multiplicity reaching m_min.
        const int s = (spec.m_min + unit - 1) / unit;
        m_dim = std::max(1, s) * unit;
    } else if (m_dim % unit != 0) {
        throw InvalidProblem("M=" + std::to_string(m_dim) +
                             " cannot realize the weights exactly; use a multiple of " +
                             std::to_string(unit));
    }

    Matrix cov = Matrix::Zero(m_dim, m_dim);
    int row = 0;
    for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
        const int count = static_cast<int>(std::round(spec.weights[i] * m_dim));
        for (int c = 0; c < count; ++c) cov(row + c, row + c) = spec.lambdas[i];
        row += count;
    }
    if (row != m_dim) throw InvalidProblem("internal multiplicity accounting error");
    return PopulationMixture({std::move(cov)}, {1.0}, spec.gamma);
}

double diag_entry(int m, int k, int k_count) {
    return static_cast<double>((m + k) % k_count + 1);
}

PopulationMixture structured_mixture(const TestProblem& spec) {
    const int k_count = spec.population_count;
    if (k_count < 1) throw InvalidProblem("population count must be at least 1");
    const int m_dim = spec.dim > 0 ? spec.dim : spec.m_min;
    if (m_dim < 1) throw InvalidProblem("dimension must be positive");

    std::vector<Matrix> covs;
    covs.reserve(static_cast<std::size_t>(k_count));
    for (int k = 1; k <= k_count; ++k) {
        Matrix cov = Matrix::Zero(m_dim, m_dim);
        for (int m = 0; m < m_dim; ++m) cov(m, m) = diag_entry(m, k, k_count);
        if (spec.kind == ProblemKind::Corr) {
            if (!(spec.rho > 0.0 && spec.rho < 1.0))
                throw InvalidProblem("correlation base rho must lie in (0,1)");
            if (!(spec.ell > 0.0)) throw InvalidProblem("correlation exponent must be positive");
            for (int m = 0; m < m_dim; ++m)
                for (int n = 0; n < m_dim; ++n) {
                    if (m == n) continue;
                    const double d = std::pow(std::abs(m - n), spec.ell);
                    cov(m, n) = std::pow(spec.rho, d) *
                                std::sqrt(diag_entry(m, k, k_count) * diag_entry(n, k, k_count));
                }
        }
        covs.push_back(std::move(cov));
    }
    std::vector<double> alphas(static_cast<std::size_t>(k_count), 1.0 / k_count);
    // Equal weights can miss sum(alpha)=1 by an ulp for some K; renormalize the last.
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < alphas.size(); ++i) partial += alphas[i];
    alphas.back() = 1.0 - partial;
    return PopulationMixture(std::move(covs), std::move(alphas), spec.gamma);
}

} // namespace

PopulationMixture build_test_problem(const TestProblem& spec) {
    switch (spec.kind) {
        case ProblemKind::Mp: {
            TestProblem mp = spec;
            mp.lambdas = {1.0};
            mp.weights = {1.0};
            return discrete_spectrum_mixture(mp);
        }
        case ProblemKind::TwoDelta: {
            if (spec.lambdas.size() != 2)
                throw InvalidProblem("two-delta spectrum needs exactly two eigenvalues");
            return discrete_spectrum_mixture(spec);
        }
        case ProblemKind::Comb: {
            TestProblem comb = spec;
            if (comb.lambdas.empty()) {
                // Canonical instance: 100 equiprobable masses evenly spread on [0.1, 10].
                const int n = 100;
                comb.lambdas.resize(n);
                comb.weights.assign(n, 1.0 / n);
                for (int i = 0; i < n; ++i)
                    comb.lambdas[static_cast<std::size_t>(i)] = 0.1 + 9.9 * i / (n - 1);
            }
            return discrete_spectrum_mixture(comb);
        }
        case ProblemKind::Diag:
        case ProblemKind::Corr:
            return structured_mixture(spec);
    }
    throw InvalidProblem("unknown test problem kind");
}

} // namespace mixesd
