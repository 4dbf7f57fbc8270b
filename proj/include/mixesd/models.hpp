#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixesd/types.hpp"

namespace mixesd {

// A mixture of K Hermitian PSD population covariances with proportions
// alpha_k and aspect ratio gamma = M/N. Immutable after construction;
// safe to share across worker threads.
class PopulationMixture {
public:
    PopulationMixture(std::vector<Matrix> populations,
                      std::vector<double> weights,
                      double gamma);

    int dim() const { return dim_; }
    int population_count() const { return static_cast<int>(populations_.size()); }
    double gamma() const { return gamma_; }
    bool diagonal() const { return diagonal_; }

    const Matrix& population(int k) const { return populations_[static_cast<std::size_t>(k)]; }
    double weight(int k) const { return weights_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& weights() const { return weights_; }

    // Ascending eigenvalues of population k, clamped at 0 (round-off floor -1e-10).
    const std::vector<double>& population_eigenvalues(int k) const {
        return eigenvalues_[static_cast<std::size_t>(k)];
    }

    // Distinct diagonal profiles for the eigenvalue-only evaluation path.
    // Entry j holds the K diagonal values shared by `count` coordinates.
    struct DiagonalProfile {
        std::vector<double> values; // one per population
        int count = 0;
    };
    // Empty unless diagonal().
    const std::vector<DiagonalProfile>& diagonal_profiles() const { return profiles_; }

private:
    std::vector<Matrix> populations_;
    std::vector<double> weights_;
    double gamma_;
    int dim_;
    bool diagonal_;
    std::vector<std::vector<double>> eigenvalues_;
    std::vector<DiagonalProfile> profiles_;
};

enum class ProblemKind { Mp, TwoDelta, Comb, Diag, Corr };

// Built-in test-problem generator inputs. Discrete spectra (Mp/TwoDelta/Comb)
// carry eigenvalues with multiplicity weights; Diag/Corr carry an explicit
// dimension and population count.
struct TestProblem {
    ProblemKind kind = ProblemKind::Mp;
    double gamma = 0.5;
    std::vector<double> lambdas;  // discrete spectra
    std::vector<double> weights;  // multiplicity weights, sum to 1
    int population_count = 1;     // Diag/Corr
    int dim = 0;                  // explicit M; 0 = derive from m_min
    int m_min = 100;              // minimum discretization M^(m)
    double rho = 0.2;             // Corr correlation base, in (0,1)
    double ell = 0.25;            // Corr exponent, > 0
};

Matrix average_covariance(const PopulationMixture& mixture);

// All eigenvalues of every population plus those of the average covariance,
// ascending; P = M(K+1) values.
std::vector<double> eigenvalue_pool(const PopulationMixture& mixture);

PopulationMixture build_test_problem(const TestProblem& spec);

// Smallest multiplicity denominator U such that every weight*U is integral,
// or 0 when none exists below the search cap.
int multiplicity_denominator(const std::vector<double>& weights);

} // namespace mixesd
