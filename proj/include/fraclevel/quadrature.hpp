#ifndef FRACLEVEL_QUADRATURE_HPP
#define FRACLEVEL_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "fraclevel/errors.hpp"

namespace fraclevel {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
    std::vector<double> nodes, weights;
};

/// n-point Gauss-Legendre rule on [0, 1], memoized.
inline const GaussRule& gauss_legendre(std::size_t n) {
    if (n < 1) throw UsageError("gauss_legendre: need at least one node");
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (slot) return *slot;
    auto rule = std::make_unique<GaussRule>();
    rule->nodes.resize(n);
    rule->weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule->nodes[i] = 0.5 * (1.0 - x);
        rule->nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule->weights[i] = rule->weights[n - 1 - i] = 0.5 * w;
    }
    slot = std::move(rule);
    return *slot;
}

/// Composite Gauss-Legendre integral over [a, b] with `panels` equal panels.
inline double integrate_gauss(const std::function<double(double)>& f, double a, double b, std::size_t order,
                              std::size_t panels = 1) {
    const GaussRule& g = gauss_legendre(order);
    const double w = (b - a) / static_cast<double>(panels);
    double s = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        double lo = a + w * static_cast<double>(p);
        for (std::size_t i = 0; i < order; ++i) s += g.weights[i] * f(lo + w * g.nodes[i]);
    }
    return s * w;
}

/// Result of a double-exponential quadrature: value and an error estimate.
struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// int_0^inf f(t) dt by the exp-sinh substitution t = exp(pi/2 sinh u),
/// halving the step until two levels agree. Suited to integrands with an
/// integrable power singularity at 0 and exponential decay.
inline QuadResult integrate_exp_sinh(const std::function<double(double)>& f, double rel_tol = 1e-14) {
    const double half_pi = std::numbers::pi / 2.0;
    auto g = [&](double u) {
        double t = std::exp(half_pi * std::sinh(u));
        if (t == 0.0 || !std::isfinite(t)) return 0.0;
        double v = f(t) * t * half_pi * std::cosh(u);
        return std::isfinite(v) ? v : 0.0;
    };
    // Find where the transformed integrand is negligible on either side.
    double peak = 0.0;
    for (double u = -6.0; u <= 6.0; u += 0.125) peak = std::max(peak, std::abs(g(u)));
    double lo = -6.0, hi = 6.0;
    while (lo < -0.5 && std::abs(g(lo)) < 1e-20 * peak && std::abs(g(lo + 0.125)) < 1e-20 * peak) lo += 0.125;
    while (hi > 0.5 && std::abs(g(hi)) < 1e-20 * peak && std::abs(g(hi - 0.125)) < 1e-20 * peak) hi -= 0.125;

    double h = 0.5;
    double sum = 0.0;
    for (double u = lo; u <= hi + 1e-12; u += h) sum += g(u);
    double prev = sum * h;
    QuadResult r{prev, std::abs(prev)};
    for (int level = 0; level < 10; ++level) {
        for (double u = lo + h / 2.0; u < hi; u += h) sum += g(u);
        h /= 2.0;
        double cur = sum * h;
        r = {cur, std::abs(cur - prev)};
        if (level >= 2 && r.error <= rel_tol * std::abs(cur)) break;
        prev = cur;
    }
    return r;
}

} // namespace fraclevel

#endif
