#pragma once

#include <vector>

#include "mixesd/models.hpp"
#include "mixesd/types.hpp"

namespace mixesd {

/// Eigenvalues of a Hermitian matrix, ascending.
std::vector<double> hermitian_eigenvalues(const Matrix& a);

// Right-hand sides of the coupled trace equations at (e, z):
//   e_out[j] = tr(Lambda_j B^-1) / M,  m_out = tr(B^-1) / M,
// with B = sum_k alpha_k Lambda_k / (1 + gamma e_k) - z I.
struct ResolventTraces {
    CVector e_out;
    cplx m_out;
};

// One factorization per call on the dense path; diagonal mixtures are
// evaluated coordinate-wise over the distinct diagonal profiles instead.
// Throws NumericBreakdown when B is numerically singular (near-real-axis
// evaluation); the homotopy layer backs off and retries.
ResolventTraces resolvent_traces(const CVector& e, cplx z, const PopulationMixture& mixture);

} // namespace mixesd
