#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixesd/models.hpp"
#include "mixesd/pipeline.hpp"

namespace mixesd {

struct EmpiricalSpectrum {
    std::vector<double> eigenvalues; // pooled over trials, ascending
    int dim = 0;
    int samples = 0;
    int trials = 0;
    std::uint64_t seed = 0;
};

// Draws `trials` data matrices with round(alpha_k N) rows per population
// (largest-remainder adjusted), row n of population k as Lambda_k^{1/2} g
// with g a standard complex Gaussian vector, and pools the eigenvalues of
// Y = X^H X / N. Deterministic for a fixed seed: each trial uses a derived
// mt19937_64 stream, so trials can run in parallel.
EmpiricalSpectrum sample_spectrum(const PopulationMixture& mixture, int samples,
                                  int trials, std::uint64_t seed, int workers = 0);

// Sup distance between the empirical CDF and the estimate's trapezoidal CDF.
// Exact zeros (rank deficiency when gamma > 1) are dropped and both sides
// renormalized to the continuous mass before comparison.
double ks_distance(const EmpiricalSpectrum& empirical, const DensityEstimate& estimate);

/// Trapezoidal CDF of the estimate at x, not renormalized.
double estimate_cdf(const DensityEstimate& estimate, double x);

/// One eigenvalue per line, full precision.
void write_eigenvalues(const EmpiricalSpectrum& spectrum, const std::string& path);

} // namespace mixesd
