#include "mixesd/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace mixesd {

CVector anderson_update(const AndersonHistory& history, const CVector& g_val,
                        const CVector& e_prev, double damping_scale) {
    const std::size_t q = history.depth();
    if (q == 0) return g_val;

    const CVector h_now = g_val - e_prev;
    const auto k = g_val.size();
    Matrix dh(k, static_cast<Eigen::Index>(q));
    Matrix dg(k, static_cast<Eigen::Index>(q));
    for (std::size_t j = 0; j < q; ++j) {
        const CVector& h_hi = (j + 1 < q) ? history.h(j + 1) : h_now;
        const CVector& g_hi = (j + 1 < q) ? history.g(j + 1) : g_val;
        dh.col(static_cast<Eigen::Index>(j)) = h_hi - history.h(j);
        dg.col(static_cast<Eigen::Index>(j)) = g_hi - history.g(j);
    }

    const double damping = damping_scale * dh.cwiseAbs().maxCoeff();
    Matrix normal = dh.adjoint() * dh;
    normal.diagonal().array() += damping;
    const CVector rhs = dh.adjoint() * h_now;

    if (damping == 0.0 && normal.cwiseAbs().maxCoeff() == 0.0) return g_val;
    CVector nu;
    if (q == 1)
        nu = rhs / normal(0, 0); // keeps the scalar case a single exact division
    else
        nu = normal.llt().solve(rhs);
    if (!nu.allFinite()) return g_val;
    return g_val - dg * nu;
}

PointSolution solve_point(double x, const PopulationMixture& mixture,
                          const SolverConfig& config,
                          const std::optional<CVector>& warm_start,
                          SolveTrace* trace) {
    config.validate();
    const int k_count = mixture.population_count();
    const double eps = config.epsilon;
    const std::size_t max_iters = config.effective_max_iters();

    CVector e = warm_start ? *warm_start : CVector::Constant(k_count, cplx(0.0, 1.0));
    double xi = config.xi0;
    double res_prev = -1.0; // sentinel: no residual yet
    bool have_res_prev = false;
    int backoffs = 0;
    AndersonHistory history(config.q_cap);

    PointSolution out;
    out.x = x;
    std::size_t it = 0;
    while (it < max_iters) {
        ++it;
        if (trace) trace->xi_trace.push_back(xi);
        const cplx z(x, xi * xi);
        ResolventTraces traces;
        try {
            traces = resolvent_traces(e, z, mixture);
        } catch (const NumericBreakdown&) {
            if (backoffs >= 3) break;
            ++backoffs;
            if (trace) ++trace->backoffs;
            xi = std::min(xi * config.beta, config.xi0);
            history.clear();
            have_res_prev = false;
            e = CVector::Constant(k_count, cplx(0.0, 1.0));
            continue;
        }
        const CVector e_next = anderson_update(history, traces.e_out, e, config.damping_scale);
        const double res = (e_next - e).cwiseAbs().maxCoeff();
        history.push(traces.e_out, e);
        e = e_next;

        if (xi <= eps && have_res_prev && res < eps) {
            out.converged = true;
            break;
        }
        if (have_res_prev && res <= res_prev && xi > eps) {
            xi = std::max(xi / config.beta, eps);
            history.clear(); // the fixed-point map changed with xi
        }
        res_prev = res;
        have_res_prev = true;
    }

    out.iterations = it;
    out.final_xi = xi;
    out.e = e;
    const cplx z_final(x, eps * eps);
    try {
        out.m = resolvent_traces(e, z_final, mixture).m_out;
    } catch (const NumericBreakdown&) {
        out.m = cplx(0.0, 0.0);
        out.converged = false;
    }
    out.f = std::max(0.0, out.m.imag() / kPi);
    return out;
}

cplx stieltjes_companion(cplx m, cplx z, double gamma) {
    if (std::abs(z) == 0.0) throw InvalidProblem("companion transform undefined at z = 0");
    return gamma * m + (gamma - 1.0) / z;
}

} // namespace mixesd
