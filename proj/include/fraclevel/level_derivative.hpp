#ifndef FRACLEVEL_LEVEL_DERIVATIVE_HPP
#define FRACLEVEL_LEVEL_DERIVATIVE_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraclevel/errors.hpp"
#include "fraclevel/grid_calculus.hpp"
#include "fraclevel/power_calculus.hpp"
#include "fraclevel/quadrature.hpp"
#include "fraclevel/special_functions.hpp"

namespace fraclevel {

/// Tolerance used for every admissibility comparison.
inline constexpr double admissibility_tol = 1e-12;

/// strict: every chain order lies in (0, 1]. closure: orders may touch 0,
/// which is where the classical derivatives sit (values within the tolerance
/// are snapped to exactly 0 or 1).
enum class Admissibility { strict, closure };

namespace detail {

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Order rho and level parameters nu_1..nu_n of the nth level derivative
///   J^{nu_1} d/dt J^{nu_2} d/dt ... J^{nu_n} d/dt J^{n - rho - r_n} f,
/// with partial sums r_k = nu_1 + ... + nu_k and chain orders
///   xi_1 = rho + r_n - (n - 1), xi_i = 1 - nu_{n-i+2} (i >= 2).
class LevelParams {
public:
    LevelParams(double rho, std::vector<double> nus, Admissibility mode = Admissibility::strict)
        : rho_(rho), nus_(std::move(nus)), mode_(mode) {
        const double tol = admissibility_tol;
        if (nus_.empty()) throw AdmissibilityError("at least one level parameter is required");
        if (!(rho > 0.0 && rho <= 1.0 + tol)) throw AdmissibilityError("0 < rho <= 1 violated");
        rho_ = std::min(rho_, 1.0);
        double r = 0.0;
        for (std::size_t k = 0; k < nus_.size(); ++k) {
            const std::string idx = std::to_string(k + 1);
            if (!std::isfinite(nus_[k]) || nus_[k] < -tol) throw AdmissibilityError("nu_" + idx + " >= 0 violated");
            nus_[k] = std::max(nus_[k], 0.0);
            r += nus_[k];
            if (rho_ + r > static_cast<double>(k + 1) + tol)
                throw AdmissibilityError("rho + r_" + idx + " <= " + idx + " violated");
            partial_.push_back(r);
        }
        const std::size_t n = nus_.size();
        xis_.push_back(rho_ + partial_.back() - static_cast<double>(n - 1));
        for (std::size_t i = 2; i <= n; ++i) xis_.push_back(1.0 - nus_[n - i + 1]);
        for (std::size_t i = 0; i < n; ++i) {
            double& x = xis_[i];
            const std::string name = "xi_" + std::to_string(i + 1);
            if (x > 1.0 + tol) throw AdmissibilityError(name + " <= 1 violated");
            if (std::abs(x - 1.0) <= tol) x = 1.0;
            if (mode_ == Admissibility::strict) {
                if (!(x > tol)) throw AdmissibilityError(name + " > 0 violated");
            } else {
                if (x < -tol) throw AdmissibilityError(name + " >= 0 violated");
                if (std::abs(x) <= tol) x = 0.0;
            }
        }
    }

    double rho() const { return rho_; }
    std::size_t levels() const { return nus_.size(); }
    std::span<const double> nus() const { return nus_; }
    double nu(std::size_t k) const { return nus_.at(k - 1); }           // 1-based
    double partial_sum(std::size_t k) const { return partial_.at(k - 1); } // r_k, 1-based
    std::span<const double> partial_sums() const { return partial_; }
    std::span<const double> xis() const { return xis_; }
    double xi(std::size_t i) const { return xis_.at(i - 1); } // 1-based
    Admissibility mode() const { return mode_; }

    /// Order of the innermost integral, 1 - xi_1.
    double leading_order() const { return std::max(0.0, 1.0 - xis_.front()); }

    /// Exponent of the kth correction monomial, rho + r_k - k.
    double correction_exponent(std::size_t k) const { return rho_ + partial_sum(k) - static_cast<double>(k); }

private:
    double rho_;
    std::vector<double> nus_, partial_, xis_;
    Admissibility mode_;
};

/// Chain orders for strictly admissible parameters (throws the named violation).
inline std::vector<double> xi_chain(double rho, std::span<const double> nus) {
    LevelParams p(rho, std::vector<double>(nus.begin(), nus.end()));
    return {p.xis().begin(), p.xis().end()};
}

/// Parameters reproducing the classical derivatives (closure mode).
inline LevelParams riemann_liouville_params(double rho) { return {rho, {0.0, 1.0}, Admissibility::closure}; }
inline LevelParams caputo_params(double rho) { return {rho, {1.0 - rho, 0.0}, Admissibility::closure}; }
inline LevelParams hilfer_params(double rho, double type) {
    return {rho, {type * (1.0 - rho), 1.0}, Admissibility::closure};
}

namespace detail {

// Stage values G_n = J^{1-xi_1} f, G_k = J^{nu_{k+1}} d/dt G_{k+1}; index k-1.
inline std::vector<MonomialSum> lfd_stages(const MonomialSum& f, const LevelParams& p) {
    const std::size_t n = p.levels();
    std::vector<MonomialSum> g(n);
    g[n - 1] = integral_any(f, p.leading_order());
    for (std::size_t k = n - 1; k >= 1; --k) {
        try {
            g[k - 1] = integral_any(derivative(g[k]), p.nu(k + 1));
        } catch (const DomainError& e) {
            throw DomainError("stage " + std::to_string(n - k) + " (d/dt before J^nu_" + std::to_string(k + 1) +
                              "): " + e.what());
        }
    }
    return g;
}

} // namespace detail

/// The nth level derivative, applied stage by stage.
inline MonomialSum lfd_composed(const MonomialSum& f, const LevelParams& p) {
    auto g = detail::lfd_stages(f, p);
    try {
        return detail::integral_any(derivative(g.front()), p.nu(1));
    } catch (const DomainError& e) {
        throw DomainError("stage " + std::to_string(p.levels()) + " (d/dt before J^nu_1): " + e.what());
    }
}

/// Boundary functionals C_1..C_n: C_1 = (J^{1-xi_1} f)(0+),
/// C_j = (J^{nu_{n-j+2}} d/dt ... J^{1-xi_1} f)(0+). Divergent values are +-inf.
struct BoundaryConstants {
    std::vector<double> values; // values[j-1] = C_j

    double operator[](std::size_t j) const { return values.at(j - 1); } // 1-based
    std::size_t size() const { return values.size(); }
    bool finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }
    bool vanish(double tol = 1e-14) const {
        return std::all_of(values.begin(), values.end(), [&](double v) { return std::abs(v) <= tol; });
    }
};

inline BoundaryConstants lfd_boundary_constants(const MonomialSum& f, const LevelParams& p) {
    auto g = detail::lfd_stages(f, p);
    BoundaryConstants c;
    for (std::size_t j = 1; j <= p.levels(); ++j) c.values.push_back(limit_at_origin(g[p.levels() - j]));
    return c;
}

/// sum_k G_k(0) / Gamma(rho + r_k - k + 1) t^{rho + r_k - k}, where
/// G_k(0) = C_{n-k+1}.
inline MonomialSum lfd_corrections(const BoundaryConstants& c, const LevelParams& p) {
    if (!c.finite()) throw DomainError("boundary functional diverges; the representation does not apply");
    const std::size_t n = p.levels();
    std::vector<Monomial> terms;
    for (std::size_t k = 1; k <= n; ++k) {
        double e = p.correction_exponent(k);
        double coef = c[n - k + 1] * rgamma(e + 1.0);
        if (coef == 0.0) continue;
        if (!(e > -1.0)) throw DomainError("correction exponent " + std::to_string(e) + " is not integrable");
        terms.push_back({coef, e});
    }
    return MonomialSum(std::move(terms));
}

/// The nth level derivative through the Riemann-Liouville derivative of f
/// minus its correction monomials.
inline MonomialSum lfd_rl_form(const MonomialSum& f, const LevelParams& p) {
    auto c = lfd_boundary_constants(f, p);
    return detail::derivative_any(f - lfd_corrections(c, p), p.rho());
}

/// Grid version for n <= 3: boundary functionals by extrapolation, the
/// correction monomials removed analytically, then the grid RL derivative.
inline GridFn lfd_grid(const GridFn& f, const LevelParams& p) {
    const std::size_t n = p.levels();
    if (n > 3) throw UsageError("lfd_grid supports at most 3 levels");
    f.validate();
    if (f.size() < 33) throw UsageError("lfd_grid needs at least 33 nodes");
    // G_k(0) = lim Gamma(m+1) [J^{n-rho-r_k} f - sum_{j>k} G_j(0) t^{e_jk}/Gamma(e_jk+1)] / t^m, m = n - k.
    std::vector<double> stage0(n + 1, 0.0);
    for (std::size_t k = n; k >= 1; --k) {
        const double order = static_cast<double>(n) - p.rho() - p.partial_sum(k);
        GridFn h = order > admissibility_tol ? rl_integral_grid(f, order) : f;
        const double m = static_cast<double>(n - k);
        std::vector<double> q(f.size());
        for (std::size_t i = 1; i < f.size(); ++i) {
            double t = f.node(i);
            double v = h[i], mag = std::abs(h[i]);
            for (std::size_t j = k + 1; j <= n; ++j) {
                double e = static_cast<double>(n - j) + p.partial_sum(j) - p.partial_sum(k);
                double sub = stage0[j] * std::pow(t, e) * rgamma(e + 1.0);
                v -= sub;
                mag += std::abs(sub);
            }
            // a difference at the rounding level of its parts is zero
            q[i] = std::abs(v) <= 1e-12 * mag ? 0.0 : gamma_fn(m + 1.0) * v / std::pow(t, m);
        }
        q[0] = q[1];
        double qmax = 0.0;
        for (double v : q) qmax = std::max(qmax, std::abs(v));
        // dividing by t^m amplifies the grid error at the first nodes, so
        // higher stages extrapolate from a coarser subgrid
        // and a misfit of singular samples on the first cell is retried
        // further from the origin
        double est = 0.0;
        for (std::size_t stride = std::size_t{1} << (2 * (n - k));; stride *= 2) {
            std::vector<double> coarse;
            for (std::size_t i = 0; i < q.size(); i += stride) coarse.push_back(q[i]);
            if (coarse.size() < 9) throw UsageError("lfd_grid: too few nodes for the boundary functionals");
            const double t_coarse = f.step() * static_cast<double>(stride * (coarse.size() - 1));
            try {
                est = extrapolate_to_origin(GridFn(std::move(coarse), t_coarse));
                break;
            } catch (const NumericalFailure&) {
                if ((q.size() - 1) / (2 * stride) < 16) throw;
            }
        }
        // below the extrapolation accuracy a leftover would be amplified by t^-m at the next stage
        stage0[k] = std::abs(est) <= 1e-4 * std::max(1.0, qmax) ? 0.0 : est;
    }
    std::vector<Monomial> corr;
    for (std::size_t k = 1; k <= n; ++k) {
        double e = p.correction_exponent(k);
        double coef = stage0[k] * rgamma(e + 1.0);
        if (coef != 0.0) corr.push_back({coef, e});
    }
    GridFn d = rl_derivative_grid(f, p.rho());
    for (std::size_t i = 1; i < d.size(); ++i) {
        double t = d.node(i);
        for (const auto& m : corr)
            d.samples[i] -= m.coeff * gamma_fn(m.alpha + 1.0) * rgamma(m.alpha - p.rho() + 1.0) *
                            std::pow(t, m.alpha - p.rho());
    }
    if (!corr.empty() || !std::isfinite(d[0])) d.samples[0] = 2.0 * d[1] - d[2]; // origin value is only an estimate
    return d;
}

// ----------------------------------------------------------------- checks

/// Outcome of the fundamental-theorem checks.
struct FundamentalReport {
    /// J^rho (L f) against f minus the correction monomials.
    double corrected_discrepancy = 0.0;
    /// f has vanishing boundary functionals (both inverse identities apply).
    bool vanishing_class = false;
    /// J^rho (L f) against f.
    double left_inverse_discrepancy = 0.0;
    /// L (J^rho f) against f; +inf when J^rho f leaves the domain.
    double right_inverse_discrepancy = 0.0;
    BoundaryConstants constants;

    double max_discrepancy() const {
        double d = corrected_discrepancy;
        if (vanishing_class) d = std::max({d, left_inverse_discrepancy, right_inverse_discrepancy});
        return d;
    }
};

inline FundamentalReport fundamental_check(const MonomialSum& f, const LevelParams& p) {
    FundamentalReport r;
    r.constants = lfd_boundary_constants(f, p);
    const double scale = std::max(1.0, f.max_abs_coeff());
    r.vanishing_class = r.constants.vanish(1e-13 * scale);
    MonomialSum lf = lfd_composed(f, p);
    MonomialSum back = detail::integral_any(lf, p.rho());
    r.corrected_discrepancy = relative_discrepancy(back, f - lfd_corrections(r.constants, p));
    r.left_inverse_discrepancy = relative_discrepancy(back, f);
    try {
        r.right_inverse_discrepancy = relative_discrepancy(lfd_composed(rl_integral(f, p.rho()), p), f);
    } catch (const DomainError&) {
        r.right_inverse_discrepancy = std::numeric_limits<double>::infinity();
    }
    return r;
}

/// Laplace transform of a power sum, sum c Gamma(a+1) / s^(a+1).
inline double laplace_transform(const MonomialSum& f, double s) {
    if (!(s > 0.0)) throw DomainError("laplace transform needs s > 0");
    double v = 0.0;
    for (const auto& m : f.terms()) v += m.coeff * gamma_fn(m.alpha + 1.0) * std::pow(s, -m.alpha - 1.0);
    return v;
}

struct LaplaceSample {
    double s = 0.0;
    double numeric = 0.0;  // quadrature of e^{-st} (L f)(t)
    double formula = 0.0;  // s^rho F(s) - s^{1-nu1-nu2} C_1 - s^{-nu1} C_2
    double quad_error = 0.0;
    double rel_discrepancy = 0.0;
};

struct LaplaceReport {
    std::vector<LaplaceSample> samples;
    double max_rel_discrepancy() const {
        double m = 0.0;
        for (const auto& s : samples) m = std::max(m, s.rel_discrepancy);
        return m;
    }
};

/// Compares a quadrature of the transform of L f with the closed form. The
/// relative discrepancy is measured against the largest term of the formula
/// so that vanishing transforms are compared absolutely.
inline LaplaceReport laplace_spot_check(const MonomialSum& f, const LevelParams& p, std::span<const double> s_values) {
    if (p.levels() != 2) throw UsageError("laplace_spot_check is defined for two levels");
    auto c = lfd_boundary_constants(f, p);
    if (!c.finite()) throw DomainError("boundary functional diverges");
    MonomialSum lf = lfd_composed(f, p);
    LaplaceReport rep;
    for (double s : s_values) {
        if (!(s > 0.0)) throw DomainError("laplace_spot_check: s must be positive");
        LaplaceSample x;
        x.s = s;
        auto q = integrate_exp_sinh([&](double t) { return std::exp(-s * t) * eval(lf, t); });
        x.numeric = q.value;
        x.quad_error = q.error;
        const double nu1 = p.nu(1), nu2 = p.nu(2);
        const double a = std::pow(s, p.rho()) * laplace_transform(f, s);
        const double b = std::pow(s, 1.0 - nu1 - nu2) * c[1];
        const double d = std::pow(s, -nu1) * c[2];
        x.formula = a - b - d;
        const double scale = std::max({std::abs(a), std::abs(b), std::abs(d), std::abs(x.numeric), 1e-300});
        x.rel_discrepancy = std::abs(x.numeric - x.formula) / scale;
        rep.samples.push_back(x);
    }
    return rep;
}

} // namespace fraclevel

#endif
