#include "mixesd/closedform.hpp"

#include <algorithm>
#include <cmath>

namespace mixesd {

MpLaw::MpLaw(double g) : gamma(g) {
    const double root = std::sqrt(gamma);
    support_lo = (1.0 - root) * (1.0 - root);
    support_hi = (1.0 + root) * (1.0 + root);
    atom_at_zero = gamma > 1.0 ? 1.0 - 1.0 / gamma : 0.0;
}

double mp_density(double x, double gamma) {
    const MpLaw law(gamma);
    if (x <= law.support_lo || x >= law.support_hi) return 0.0;
    return std::sqrt((law.support_hi - x) * (x - law.support_lo)) / (2.0 * kPi * gamma * x);
}

namespace {

// 64-node Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::array<double, 64> nodes{};
    std::array<double, 64> weights{};

    GaussLegendre() {
        // Newton iteration on Legendre P_64 from the Chebyshev initial guess.
        const int n = 64;
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[static_cast<std::size_t>(i)] = -x;
            nodes[static_cast<std::size_t>(n - 1 - i)] = x;
            const double w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[static_cast<std::size_t>(i)] = w;
            weights[static_cast<std::size_t>(n - 1 - i)] = w;
        }
    }
};

const GaussLegendre& gauss_rule() {
    static const GaussLegendre rule;
    return rule;
}

} // namespace

double mp_cdf(double x, double gamma) {
    const MpLaw law(gamma);
    if (x <= law.support_lo) return 0.0;
    const double continuous_mass = std::min(1.0, 1.0 / gamma);
    if (x >= law.support_hi) return continuous_mass;

    // x = c + r sin(theta) turns the sqrt edge factors into r cos(theta),
    // leaving a smooth integrand over theta.
    const double c = 0.5 * (law.support_lo + law.support_hi);
    const double r = 0.5 * (law.support_hi - law.support_lo);
    const double theta_hi = std::asin(std::clamp((x - c) / r, -1.0, 1.0));
    const double a = -0.5 * kPi;
    const double half = 0.5 * (theta_hi - a);
    const double mid = 0.5 * (theta_hi + a);
    const auto& rule = gauss_rule();
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double theta = mid + half * rule.nodes[i];
        const double ct = std::cos(theta);
        const double xi = c + r * std::sin(theta);
        sum += rule.weights[i] * (r * r * ct * ct) / (2.0 * kPi * gamma * xi);
    }
    return std::clamp(sum * half, 0.0, continuous_mass);
}

std::array<cplx, 3> solve_cubic(cplx a, cplx b, cplx c, cplx d) {
    if (std::abs(a) == 0.0) throw InvalidProblem("leading cubic coefficient is zero");
    // Depress: x = t - b/(3a), t^3 + p t + q = 0.
    const cplx shift = b / (3.0 * a);
    const cplx p = c / a - shift * shift * 3.0;
    const cplx q = 2.0 * shift * shift * shift - shift * (c / a) + d / a;

    const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    cplx u = -q / 2.0 + disc;
    if (std::abs(u) < std::abs(-q / 2.0 - disc)) u = -q / 2.0 - disc;
    u = std::pow(u, 1.0 / 3.0);

    std::array<cplx, 3> roots;
    const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
    if (std::abs(u) == 0.0) {
        const cplx t = std::pow(-q, 1.0 / 3.0);
        roots = {t, t * omega, t * std::conj(omega)};
    } else {
        cplx w = u;
        for (int k = 0; k < 3; ++k) {
            roots[static_cast<std::size_t>(k)] = w - p / (3.0 * w);
            w *= omega;
        }
    }
    for (auto& r : roots) r -= shift;
    return roots;
}

namespace {

cplx stieltjes_from_u(cplx u, double x,
                      const std::array<double, 2>& lambdas,
                      const std::array<double, 2>& weights) {
    return weights[0] * u / (lambdas[0] - x * u) + weights[1] * u / (lambdas[1] - x * u);
}

// Coefficients of the cubic in u = 1 + gamma*e obtained by clearing the
// denominators of the two-point fixed-point identity at z = x.
std::array<double, 4> two_delta_cubic(double x, double gamma,
                                      const std::array<double, 2>& lambdas,
                                      const std::array<double, 2>& weights) {
    const double l1 = lambdas[0], l2 = lambdas[1];
    const double mean = weights[0] * l1 + weights[1] * l2;
    return {x * x,
            -x * (l1 + l2) - x * x + gamma * x * mean,
            l1 * l2 + x * (l1 + l2) - gamma * l1 * l2,
            -l1 * l2};
}

double cubic_discriminant(const std::array<double, 4>& k) {
    const double a = k[0], b = k[1], c = k[2], d = k[3];
    return 18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c -
           4.0 * a * c * c * c - 27.0 * a * a * d * d;
}

} // namespace

double two_delta_density(double x, double gamma,
                         const std::array<double, 2>& lambdas,
                         const std::array<double, 2>& weights) {
    if (!(lambdas[0] > 0.0 && lambdas[1] > 0.0))
        throw InvalidProblem("two-delta eigenvalues must be positive");
    if (std::abs(weights[0] + weights[1] - 1.0) > 1e-12)
        throw InvalidProblem("two-delta weights must sum to 1");
    if (lambdas[0] == lambdas[1])
        return mp_density(x / lambdas[0], gamma) / lambdas[0];
    if (x <= 0.0) return 0.0;

    // Three distinct real roots (positive discriminant) mean a real Stieltjes
    // limit: outside the support. A negative discriminant leaves one real root
    // plus a conjugate pair, one of which reconstructs Im(m) > 0.
    const auto k = two_delta_cubic(x, gamma, lambdas, weights);
    if (cubic_discriminant(k) >= 0.0) return 0.0;
    const auto roots = solve_cubic(k[0], k[1], k[2], k[3]);
    double best = 0.0;
    for (const cplx& u : roots)
        best = std::max(best, stieltjes_from_u(u, x, lambdas, weights).imag());
    return std::max(best, 0.0) / kPi;
}

std::vector<Interval> two_delta_support(double gamma,
                                        const std::array<double, 2>& lambdas,
                                        const std::array<double, 2>& weights) {
    const double l_min = std::min(lambdas[0], lambdas[1]);
    const double l_max = std::max(lambdas[0], lambdas[1]);
    const double root = std::sqrt(gamma);
    double lo = (1.0 - root) * (1.0 - root) * l_min;
    const double hi = (1.0 + root) * (1.0 + root) * l_max * 1.0000001;
    lo = std::max(lo * 0.9999999, 1e-12 * hi);

    const auto inside = [&](double x) {
        if (lambdas[0] == lambdas[1]) return mp_density(x / lambdas[0], gamma) > 0.0;
        return cubic_discriminant(two_delta_cubic(x, gamma, lambdas, weights)) < 0.0;
    };
    const auto refine = [&](double a, double b) {
        // keeps the invariant inside(a) != inside(b)
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (a + b);
            if (inside(mid) == inside(a))
                a = mid;
            else
                b = mid;
            if (b - a <= 1e-15 * b) break;
        }
        return 0.5 * (a + b);
    };

    const int n = 20000;
    const double step = std::log(hi / lo) / (n - 1);
    std::vector<Interval> components;
    bool was_inside = false;
    double prev = lo;
    double open = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = lo * std::exp(i * step);
        const bool now = inside(x);
        if (now && !was_inside)
            open = (i == 0) ? x : refine(prev, x);
        else if (!now && was_inside)
            components.push_back({open, refine(prev, x)});
        was_inside = now;
        prev = x;
    }
    if (was_inside) components.push_back({open, hi});
    return components;
}

} // namespace mixesd
