#ifndef FRACLEVEL_GRID_CALCULUS_HPP
#define FRACLEVEL_GRID_CALCULUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fraclevel/errors.hpp"
#include "fraclevel/special_functions.hpp"

namespace fraclevel {

/// Samples of a function on the uniform grid t_j = j * t_max / (n - 1).
/// samples[0] may be +-inf to mark an integrable singularity at the origin;
/// all other samples are finite.
struct GridFn {
    std::vector<double> samples;
    double t_max = 1.0;

    GridFn() = default;
    GridFn(std::vector<double> s, double tmax) : samples(std::move(s)), t_max(tmax) { validate(); }

    std::size_t size() const { return samples.size(); }
    double step() const { return t_max / static_cast<double>(samples.size() - 1); }
    double node(std::size_t j) const {
        return j + 1 == samples.size() ? t_max : t_max * static_cast<double>(j) / static_cast<double>(samples.size() - 1);
    }
    double operator[](std::size_t j) const { return samples[j]; }
    bool singular_at_origin() const { return !std::isfinite(samples.front()); }

    void validate() const {
        if (samples.size() < 2) throw UsageError("grid needs at least 2 nodes");
        if (!(t_max > 0.0) || !std::isfinite(t_max)) throw UsageError("grid t_max must be positive");
        if (std::isnan(samples[0])) throw DomainError("grid sample 0 is NaN");
        for (std::size_t j = 1; j < samples.size(); ++j)
            if (!std::isfinite(samples[j])) throw DomainError("grid sample " + std::to_string(j) + " is not finite");
    }
};

/// Samples fn at the nodes. A non-finite value at t = 0 is kept as a singularity marker.
inline GridFn sample(const std::function<double(double)>& fn, double t_max, std::size_t n) {
    if (n < 2) throw UsageError("grid needs at least 2 nodes");
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) {
        double t = j + 1 == n ? t_max : t_max * static_cast<double>(j) / static_cast<double>(n - 1);
        s[j] = fn(t);
    }
    if (std::isnan(s[0])) s[0] = std::numeric_limits<double>::infinity();
    return GridFn(std::move(s), t_max);
}

inline void require_same_grid(const GridFn& a, const GridFn& b) {
    if (a.size() != b.size() || std::abs(a.t_max - b.t_max) > 1e-12 * a.t_max)
        throw UsageError("grid functions live on different grids");
}

namespace detail {

// Power-law model A t^sigma + B of a sampled function near a singular origin.
struct SingularModel {
    double amplitude = 0.0;
    double exponent = 0.0;
    double offset = 0.0;
};

inline SingularModel fit_singular_origin(const GridFn& f) {
    const double h = f.step();
    if (f.size() >= 5) {
        double d1 = f[2] - f[1], d2 = f[4] - f[2];
        if (d1 != 0.0) {
            double r = d2 / d1;
            if (r > 0.0 && r < 1.0) {
                double s = std::log2(r);
                double a = d1 / (std::pow(h, s) * (r - 1.0));
                double b = f[1] - a * std::pow(h, s);
                if (s > -1.0) return {a, s, b};
            }
        }
    }
    if (f.size() >= 3 && f[1] != 0.0 && f[2] / f[1] > 0.0) {
        double s = std::log2(f[2] / f[1]);
        if (s > -1.0 && s < 0.0) return {f[1] / std::pow(h, s), s, 0.0};
    }
    throw DomainError("cannot resolve a locally integrable singularity at the origin from the samples");
}

// (m+1)^p - 2 m^p + (m-1)^p for m >= 1.
inline double second_difference_power(double m, double p) {
    if (m < 10.0) return std::pow(m + 1.0, p) - 2.0 * std::pow(m, p) + std::pow(m - 1.0, p);
    double u = 1.0 / m, u2 = u * u, c = p * (p - 1.0) / 2.0, term = c * u2, s = 0.0;
    for (int k = 2; k < 60 && std::abs(term) > 1e-18 * std::abs(s); k += 2) {
        s += term;
        c *= (p - k) * (p - k - 1.0) / ((k + 1.0) * (k + 2.0));
        term = c * std::pow(u, k + 2);
    }
    return 2.0 * std::pow(m, p) * s;
}

// (j-1)^p - (j-p) j^(p-1) for j >= 1.
inline double first_weight_power(double j, double p) {
    if (j < 10.0) return std::pow(j - 1.0, p) - (j - p) * std::pow(j, p - 1.0);
    double u = 1.0 / j, c = p * (p - 1.0) / 2.0, s = 0.0, uk = u * u;
    for (int k = 2; k < 80; ++k) {
        double term = ((k % 2) ? -c : c) * uk;
        s += term;
        if (std::abs(term) <= 1e-18 * std::abs(s)) break;
        c *= (p - k) / (k + 1.0);
        uk *= u;
    }
    return std::pow(j, p) * s;
}

// Product-integration J^order of the piecewise-linear interpolant of finite samples.
inline std::vector<double> integrate_linear(const std::vector<double>& f, double h, double order) {
    const std::size_t n = f.size();
    const double p = order + 1.0;
    const double scale = std::pow(h, order) * rgamma(order + 2.0);
    std::vector<double> b(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) b[m] = second_difference_power(static_cast<double>(m), p);
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double s = first_weight_power(static_cast<double>(j), p) * f[0] + f[j];
        for (std::size_t k = 1; k < j; ++k) s += b[j - k] * f[k];
        out[j] = scale * s;
    }
    return out;
}

} // namespace detail

/// Riemann-Liouville integral of order rho > 0 by product integration of the
/// piecewise-linear interpolant (second order for smooth data). A singular
/// origin is split off as a fitted power law and integrated exactly.
inline GridFn rl_integral_grid(const GridFn& f, double rho) {
    if (!(rho > 0.0)) throw DomainError("rl_integral_grid: order must be positive");
    f.validate();
    const double h = f.step();
    if (!f.singular_at_origin()) return GridFn(detail::integrate_linear(f.samples, h, rho), f.t_max);

    auto model = detail::fit_singular_origin(f);
    std::vector<double> rest(f.samples);
    rest[0] = model.offset;
    for (std::size_t j = 1; j < rest.size(); ++j) rest[j] -= model.amplitude * std::pow(f.node(j), model.exponent);
    std::vector<double> out = detail::integrate_linear(rest, h, rho);
    const double e = model.exponent + rho;
    const double c = model.amplitude * gamma_fn(model.exponent + 1.0) * rgamma(e + 1.0);
    for (std::size_t j = 1; j < out.size(); ++j) out[j] += c * std::pow(f.node(j), e);
    if (e < 0.0) out[0] = std::copysign(std::numeric_limits<double>::infinity(), c);
    else if (e == 0.0) out[0] = c;
    return GridFn(std::move(out), f.t_max);
}

/// Second-order differentiation of sampled data. Node 0 uses a one-sided
/// formula; it is skipped when the origin is singular.
inline GridFn differentiate_grid(const GridFn& g) {
    const std::size_t n = g.size();
    if (n < 3) throw UsageError("differentiation needs at least 3 nodes");
    const double h = g.step();
    std::vector<double> d(n);
    const bool sing = g.singular_at_origin();
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (g[j + 1] - g[j - 1]) / (2.0 * h);
    if (sing) {
        if (n < 4) throw UsageError("differentiation of singular data needs at least 4 nodes");
        d[1] = (-3.0 * g[1] + 4.0 * g[2] - g[3]) / (2.0 * h);
        d[0] = g[0];
    } else {
        d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * h);
    return GridFn(std::move(d), g.t_max);
}

/// Riemann-Liouville derivative of order rho in (0, 1]: J^{1-rho} on the grid,
/// then central differences. The origin value is +-inf whenever f(0) != 0.
inline GridFn rl_derivative_grid(const GridFn& f, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rl_derivative_grid: order must lie in (0, 1]");
    GridFn g = rho >= 1.0 ? f : rl_integral_grid(f, 1.0 - rho);
    GridFn d = differentiate_grid(g);
    const double inf = std::numeric_limits<double>::infinity();
    if (!std::isfinite(f[0])) d.samples[0] = std::copysign(inf, f[0]);
    else if (f[0] != 0.0 && rho < 1.0) d.samples[0] = std::copysign(inf, f[0]);
    return d;
}

/// Estimate of lim_{t->0+} q(t) from samples q[1..] assuming
/// q(t) = a + b t^sigma + ... with sigma > 0. When sigma is not given it is
/// fitted from three nodes. Estimates from node triples (m, 2m, 4m) are
/// compared; disagreement or a non-decaying model is a numerical failure.
inline double extrapolate_to_origin(const GridFn& q, std::optional<double> sigma = std::nullopt,
                                    double tol = 1e-3) {
    const std::size_t n = q.size();
    if (n < 9) throw UsageError("extrapolation needs at least 9 nodes");
    double scale = 0.0;
    for (std::size_t j = 1; j < n; ++j) scale = std::max(scale, std::abs(q[j]));
    const double flat = 1e-13 * std::max(scale, 1e-300);

    auto estimate = [&](std::size_t m) -> std::optional<double> {
        double v1 = q[m], v2 = q[2 * m], v4 = q[4 * m];
        double d1 = v2 - v1;
        if (sigma) {
            if (!(*sigma > 0.0)) throw DomainError("extrapolation exponent must be positive");
            return v1 - d1 / (std::exp2(*sigma) - 1.0);
        }
        double d2 = v4 - v2;
        if (std::abs(d1) <= flat && std::abs(d2) <= flat) return v1;
        if (d1 == 0.0) return std::nullopt;
        double r = d2 / d1;
        if (!(r > 1.0 + 1e-9)) return std::nullopt; // diverging or oscillating
        return v1 - d1 / (r - 1.0);
    };

    std::vector<double> est;
    for (std::size_t m = 1; 4 * m < n && est.size() < 3; m *= 2) {
        auto e = estimate(m);
        if (!e) {
            double ratio = std::abs(q[4 * m] - q[2 * m]) / std::max(std::abs(q[2 * m] - q[m]), 1e-300);
            throw NumericalFailure("boundary extrapolation diverges near the origin", ratio);
        }
        est.push_back(*e);
    }
    double spread = 0.0;
    for (double e : est) spread = std::max(spread, std::abs(e - est.back()));
    double mag = std::max({std::abs(est.back()), scale * 1e-6, 1e-300});
    if (spread > tol * std::max(1.0, mag) && spread > tol * mag)
        throw NumericalFailure("boundary extrapolation did not settle", spread);
    return est.back();
}

/// lim_{t->0+} (J^mu f)(t) for mu in (0, 1], estimated by extrapolation.
inline double boundary_functional(const GridFn& f, double mu, std::optional<double> sigma = std::nullopt) {
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("boundary_functional: order must lie in (0, 1]");
    return extrapolate_to_origin(rl_integral_grid(f, mu), sigma);
}

// ------------------------------------------------------------- convolution

/// A kernel g on the grid described by its cell moments
/// w0[j] = int_{cell j} g and w1[j] = int_{cell j} g(tau) (tau - t_j)/h,
/// plus node values (values[0] may be +-inf).
struct ConvolutionKernel {
    std::vector<double> w0, w1, values;
    double t_max = 1.0;

    std::size_t size() const { return values.size(); }
};

/// Kernel whose samples are interpolated linearly (a singular origin is
/// handled by a power-law fit on the first cell).
inline ConvolutionKernel kernel_from_samples(const GridFn& g) {
    g.validate();
    const std::size_t n = g.size();
    const double h = g.step();
    ConvolutionKernel k{std::vector<double>(n - 1), std::vector<double>(n - 1), g.samples, g.t_max};
    for (std::size_t j = 0; j + 1 < n; ++j) {
        k.w0[j] = h * (g[j] + g[j + 1]) / 2.0;
        k.w1[j] = h * (g[j] / 6.0 + g[j + 1] / 3.0);
    }
    if (g.singular_at_origin()) {
        auto m = detail::fit_singular_origin(g);
        double s = m.exponent;
        k.w0[0] = m.amplitude * std::pow(h, s + 1.0) / (s + 1.0) + m.offset * h;
        k.w1[0] = m.amplitude * std::pow(h, s + 1.0) / (s + 2.0) + m.offset * h / 2.0;
    }
    return k;
}

/// Kernel tau^sigma * s(tau) with s interpolated linearly and the weak
/// singularity integrated exactly (sigma > -1).
inline ConvolutionKernel kernel_weakly_singular(const GridFn& s, double sigma) {
    if (!(sigma > -1.0)) throw DomainError("kernel exponent must exceed -1");
    s.validate();
    if (s.singular_at_origin()) throw DomainError("regular factor of a weakly singular kernel must be finite");
    const std::size_t n = s.size();
    const double h = s.step();
    ConvolutionKernel k{std::vector<double>(n - 1), std::vector<double>(n - 1), std::vector<double>(n), s.t_max};
    // Moments of tau^sigma on [a, b] in the local variable u = (tau - a)/h.
    auto mom = [&](double a, double b, int p) {
        double e = sigma + p + 1.0;
        return (std::pow(b, e) - std::pow(a, e)) / e;
    };
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double a = s.node(j), b = s.node(j + 1);
        double m0 = mom(a, b, 0), m1 = mom(a, b, 1), m2 = mom(a, b, 2);
        // int tau^sigma u, int tau^sigma u^2 with u = (tau - a)/h
        double u1 = (m1 - a * m0) / h;
        double u2 = (m2 - 2.0 * a * m1 + a * a * m0) / (h * h);
        double sa = s[j], sb = s[j + 1];
        k.w0[j] = sa * (m0 - u1) + sb * u1;
        k.w1[j] = sa * (u1 - u2) + sb * u2;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double t = s.node(j);
        k.values[j] = t == 0.0 ? (sigma < 0.0 ? std::copysign(std::numeric_limits<double>::infinity(), s[0])
                                              : (sigma == 0.0 ? s[0] : 0.0))
                               : std::pow(t, sigma) * s[j];
    }
    return k;
}

/// Kernel given by its running moments M0(t) = int_0^t g and
/// M1(t) = int_0^t tau g(tau) at the nodes.
inline ConvolutionKernel kernel_from_primitives(const std::vector<double>& m0, const std::vector<double>& m1,
                                                std::vector<double> values, double t_max) {
    const std::size_t n = values.size();
    if (m0.size() != n || m1.size() != n || n < 2) throw UsageError("kernel primitive arrays disagree in size");
    const double h = t_max / static_cast<double>(n - 1);
    ConvolutionKernel k{std::vector<double>(n - 1), std::vector<double>(n - 1), std::move(values), t_max};
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double a = t_max * static_cast<double>(j) / static_cast<double>(n - 1);
        k.w0[j] = m0[j + 1] - m0[j];
        k.w1[j] = (m1[j + 1] - m1[j] - a * k.w0[j]) / h;
    }
    return k;
}

/// (f * g)(t_n) = int_0^{t_n} f(t_n - tau) g(tau) dtau with f interpolated
/// linearly against the kernel's exact cell moments. A singular f(0) is
/// treated by a power-law fit on the last cell.
inline GridFn convolve(const GridFn& f, const ConvolutionKernel& g) {
    f.validate();
    const std::size_t n = f.size();
    if (g.size() != n || std::abs(g.t_max - f.t_max) > 1e-12 * f.t_max)
        throw UsageError("convolution operands live on different grids");
    const double h = f.step();
    std::optional<detail::SingularModel> fm;
    if (f.singular_at_origin()) fm = detail::fit_singular_origin(f);
    std::vector<double> out(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        double s = 0.0;
        std::size_t last = fm ? m - 1 : m;
        for (std::size_t j = 0; j < last; ++j) {
            // on cell j, f(t_m - tau) runs from f[m-j] to f[m-j-1]
            double fa = f[m - j], fb = f[m - j - 1];
            s += fa * (g.w0[j] - g.w1[j]) + fb * g.w1[j];
        }
        if (fm) {
            double sg = fm->exponent;
            double hp = fm->amplitude * std::pow(h, sg + 1.0);
            double tail;
            if (m == 1 || !std::isfinite(g.values[m - 1])) {
                tail = (hp / (sg + 1.0) + fm->offset * h) * g.w0[m - 1] / h;
            } else {
                // s = t_m - tau in [0, h]; g(t_m - s) linear between g[m] and g[m-1]
                tail = hp * (g.values[m] * (1.0 / (sg + 1.0) - 1.0 / (sg + 2.0)) + g.values[m - 1] / (sg + 2.0)) +
                       fm->offset * (g.w0[m - 1]);
            }
            s += tail;
        }
        out[m] = s;
    }
    return GridFn(std::move(out), f.t_max);
}

inline GridFn convolve(const GridFn& f, const GridFn& g) {
    require_same_grid(f, g);
    return convolve(f, kernel_from_samples(g));
}

// --------------------------------------------------------------------- CSV

/// Writes "t,value" rows with 17 significant digits.
inline void write_csv(std::ostream& os, const GridFn& f) {
    os << "t,value\n";
    char buf[96];
    for (std::size_t j = 0; j < f.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.node(j), f[j]);
        os << buf;
    }
}

/// Reads "t,value" rows; the nodes must form a uniform grid starting at 0.
inline GridFn read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw UsageError("empty grid CSV");
    std::vector<double> t, v;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw UsageError("grid CSV row without comma: " + line);
        try {
            t.push_back(std::stod(line.substr(0, comma)));
            v.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw UsageError("malformed grid CSV row: " + line);
        }
    }
    if (t.size() < 2) throw UsageError("grid CSV needs at least 2 rows");
    if (t.front() != 0.0) throw UsageError("grid CSV must start at t = 0");
    const double h = t.back() / static_cast<double>(t.size() - 1);
    for (std::size_t j = 0; j < t.size(); ++j)
        if (std::abs(t[j] - h * static_cast<double>(j)) > 1e-9 * t.back())
            throw UsageError("grid CSV nodes are not uniform");
    return GridFn(std::move(v), t.back());
}

} // namespace fraclevel

#endif
