#include "mixesd/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace mixesd {

std::vector<double> hermitian_eigenvalues(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericBreakdown("Hermitian eigenvalue iteration did not converge");
    const auto& evals = solver.eigenvalues();
    return std::vector<double>(evals.data(), evals.data() + evals.size());
}

namespace {

ResolventTraces diagonal_traces(const CVector& e, cplx z, const PopulationMixture& mixture) {
    const int k_count = mixture.population_count();
    CVector u(k_count);
    for (int k = 0; k < k_count; ++k) {
        u[k] = 1.0 + mixture.gamma() * e[k];
        if (std::abs(u[k]) < 1e-300)
            throw NumericBreakdown("1 + gamma*e vanished on the diagonal path");
    }
    CVector e_out = CVector::Zero(k_count);
    cplx m_out(0.0, 0.0);
    for (const auto& profile : mixture.diagonal_profiles()) {
        cplx denom = -z;
        for (int k = 0; k < k_count; ++k)
            denom += mixture.weight(k) * profile.values[static_cast<std::size_t>(k)] / u[k];
        const cplx inv = static_cast<double>(profile.count) / denom;
        for (int k = 0; k < k_count; ++k)
            e_out[k] += profile.values[static_cast<std::size_t>(k)] * inv;
        m_out += inv;
    }
    const double m_dim = static_cast<double>(mixture.dim());
    e_out /= m_dim;
    m_out /= m_dim;
    for (int k = 0; k < k_count; ++k)
        if (!std::isfinite(e_out[k].real()) || !std::isfinite(e_out[k].imag()))
            throw NumericBreakdown("diagonal resolvent evaluation overflowed");
    if (!std::isfinite(m_out.real()) || !std::isfinite(m_out.imag()))
        throw NumericBreakdown("diagonal resolvent evaluation overflowed");
    return {std::move(e_out), m_out};
}

ResolventTraces dense_traces(const CVector& e, cplx z, const PopulationMixture& mixture) {
    const int k_count = mixture.population_count();
    const int m_dim = mixture.dim();

    Matrix b = Matrix::Zero(m_dim, m_dim);
    for (int k = 0; k < k_count; ++k) {
        const cplx u = 1.0 + mixture.gamma() * e[k];
        if (std::abs(u) < 1e-300)
            throw NumericBreakdown("1 + gamma*e vanished on the dense path");
        b += (mixture.weight(k) / u) * mixture.population(k);
    }
    b.diagonal().array() -= z;

    Eigen::PartialPivLU<Matrix> lu(b);
    const Matrix b_inv = lu.inverse();
    if (!b_inv.allFinite())
        throw NumericBreakdown("resolvent matrix is numerically singular");

    CVector e_out(k_count);
    for (int k = 0; k < k_count; ++k)
        e_out[k] = mixture.population(k).cwiseProduct(b_inv.transpose()).sum() /
                   static_cast<double>(m_dim);
    const cplx m_out = b_inv.trace() / static_cast<double>(m_dim);
    return {std::move(e_out), m_out};
}

} // namespace

ResolventTraces resolvent_traces(const CVector& e, cplx z, const PopulationMixture& mixture) {
    if (e.size() != mixture.population_count())
        throw InvalidProblem("auxiliary vector length does not match the population count");
    if (mixture.diagonal()) return diagonal_traces(e, z, mixture);
    return dense_traces(e, z, mixture);
}

} // namespace mixesd
