#pragma once

#include <optional>
#include <vector>

#include "mixesd/linalg.hpp"
#include "mixesd/models.hpp"
#include "mixesd/solver_config.hpp"
#include "mixesd/types.hpp"

namespace mixesd {

// Recent fixed-point updates h = g(e) - e and the matching g values,
// newest last; at most q_cap entries, enough to form Q_i differences
// against the incoming iterate.
class AndersonHistory {
public:
    explicit AndersonHistory(int q_cap) : q_cap_(q_cap) {}

    void push(const CVector& g_val, const CVector& e_prev) {
        if (q_cap_ == 0) return;
        h_.push_back(g_val - e_prev);
        g_.push_back(g_val);
        if (h_.size() > static_cast<std::size_t>(q_cap_)) {
            h_.erase(h_.begin());
            g_.erase(g_.begin());
        }
    }

    void clear() {
        h_.clear();
        g_.clear();
    }

    std::size_t depth() const { return h_.size(); }
    const CVector& h(std::size_t i) const { return h_[i]; }
    const CVector& g(std::size_t i) const { return g_[i]; }

private:
    int q_cap_;
    std::vector<CVector> h_;
    std::vector<CVector> g_;
};

// Damped Anderson step: solve (dH^H dH + lambda I) nu = dH^H h by the
// normal equations (Q <= q_cap keeps this a tiny complex solve), then
// extrapolate g_val with the matching g differences. Empty history returns
// g_val unchanged.
CVector anderson_update(const AndersonHistory& history, const CVector& g_val,
                        const CVector& e_prev, double damping_scale = 0.1);

struct PointSolution {
    double x = 0.0;
    CVector e;          // auxiliary vector at z = x + i eps^2
    cplx m;             // Stieltjes value
    double f = 0.0;     // Im(m)/pi, clamped at 0
    std::size_t iterations = 0;
    bool converged = false;
    double final_xi = 0.0;
};

// Optional per-solve instrumentation; xi_trace records the parameter at
// every iteration.
struct SolveTrace {
    std::vector<double> xi_trace;
    int backoffs = 0;
};

// Damped Anderson iteration on the resolvent traces wrapped in the homotopy
// schedule: xi shrinks by beta whenever the residual max_k|e_k^i - e_k^{i-1}|
// is non-increasing, the history resets at each xi change, and the point is
// converged once xi == epsilon and the residual drops below epsilon.
PointSolution solve_point(double x, const PopulationMixture& mixture,
                          const SolverConfig& config,
                          const std::optional<CVector>& warm_start = std::nullopt,
                          SolveTrace* trace = nullptr);

/// Companion transform of the flipped-product spectrum:
/// m_tilde = gamma m + (gamma - 1)/z. Diagnostic only.
cplx stieltjes_companion(cplx m, cplx z, double gamma);

} // namespace mixesd
