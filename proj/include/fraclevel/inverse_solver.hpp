#ifndef FRACLEVEL_INVERSE_SOLVER_HPP
#define FRACLEVEL_INVERSE_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fraclevel/errors.hpp"
#include "fraclevel/grid_calculus.hpp"
#include "fraclevel/level_derivative.hpp"
#include "fraclevel/mittag_leffler.hpp"
#include "fraclevel/parallel.hpp"
#include "fraclevel/special_functions.hpp"
#include "fraclevel/spectral.hpp"

// Inverse source problem on (0,1) x (0,T]:
//   L u - u_xx = f(x),  u(1,t) = 0,  u_x(0,t) = u_x(1,t),
//   J^{nu_2} d/dt J^{1-xi_1} u |_{t=0} = phi,  J^{1-xi_1} u |_{t=0} = psi,
//   u(x,T) = final data,
// with L the second level derivative. Expanding in the X family, every mode
// solves L U + l^2 U = g and the (2,k) modes are driven by 2 l U_{1k}.

namespace fraclevel {

/// A function of x on [0,1] given either pointwise or by its coefficients
/// in the X family.
class SpatialData {
public:
    SpatialData() = default;
    static SpatialData zero() { return {}; }
    static SpatialData function(std::function<double(double)> fn, std::string label = "function") {
        SpatialData d;
        d.fn_ = std::move(fn);
        d.label_ = std::move(label);
        return d;
    }
    static SpatialData spectral(SpectralCoeffs c) {
        c.validate();
        SpatialData d;
        d.coeffs_ = std::move(c);
        d.label_ = "spectral";
        return d;
    }

    bool is_zero() const { return !fn_ && !coeffs_; }
    const std::string& label() const { return label_; }

    double operator()(double x) const {
        if (coeffs_) return reconstruct(*coeffs_, x);
        return fn_ ? fn_(x) : 0.0;
    }

    /// Coefficients up to K (given coefficients are truncated or padded).
    SpectralCoeffs project(std::size_t K) const {
        if (coeffs_) {
            SpectralCoeffs c(K);
            c.a0 = coeffs_->a0;
            for (std::size_t k = 0; k < std::min(K, coeffs_->K()); ++k) {
                c.a1[k] = coeffs_->a1[k];
                c.a2[k] = coeffs_->a2[k];
            }
            return c;
        }
        if (fn_) return fraclevel::project(fn_, K);
        return SpectralCoeffs(K);
    }

private:
    std::function<double(double)> fn_;
    std::optional<SpectralCoeffs> coeffs_;
    std::string label_ = "zero";
};

struct InverseProblemSpec {
    LevelParams params{0.5, {0.25, 0.5}};
    double T = 1.0;
    SpatialData phi, psi, final_data;
    std::size_t K = 8;
    std::size_t n_t = 1025;
    /// Scale of the 2 l U_{1k} coupling; 0 decouples the (2,k) modes.
    double coupling = 1.0;

    void validate() const {
        if (params.levels() != 2) throw UsageError("the inverse problem uses two level parameters");
        if (!(T > 0.0) || !std::isfinite(T)) throw UsageError("T > 0 violated");
        if (K < 1) throw UsageError("K >= 1 violated");
        if (n_t < 65) throw UsageError("n_t >= 65 violated");
        if (!std::isfinite(coupling)) throw UsageError("coupling must be finite");
    }
};

namespace detail {

// E_{rho,nu}(z) for any real nu, through E_{rho,nu} = 1/Gamma(nu) + z E_{rho,nu+rho}.
inline double ml_any(double rho, double nu, double z) {
    if (nu > 0.0) return ml_eval(rho, nu, z);
    return rgamma(nu) + z * ml_any(rho, nu + rho, z);
}

// t^{nu-1} E_{rho,nu}(a t^rho), t > 0.
inline double ml_power(double rho, double nu, double a, double t) {
    if (t == 0.0) {
        if (nu > 1.0) return 0.0;
        if (nu == 1.0) return 1.0;
        double c = rgamma(nu);
        return c == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c);
    }
    return std::pow(t, nu - 1.0) * ml_any(rho, nu, a * std::pow(t, rho));
}

// Exponents of the three time terms: phi, psi and source.
struct TermExponents {
    double phi, psi, source;
};

inline TermExponents term_exponents(const LevelParams& p) {
    return {p.rho() + p.nu(1), p.rho() + p.nu(1) + p.nu(2) - 1.0, p.rho() + 1.0};
}

// dE_{rho,nu}/dz: the series sum (k+1) z^k / Gamma(rho(k+1) + nu) near the
// origin, otherwise [E_{rho,nu-1}(z) - (nu-1) E_{rho,nu}(z)] / (rho z).
inline double ml_derivative(double rho, double nu, double z) {
    if (std::abs(z) < 0.5) {
        double s = 0.0, zk = 1.0;
        for (int k = 0; k < 200; ++k) {
            double term = (k + 1) * zk * rgamma(rho * (k + 1) + nu);
            s += term;
            if (k > 4 && std::abs(term) < 1e-17 * std::abs(s)) break;
            zk *= z;
        }
        return s;
    }
    return (ml_any(rho, nu - 1.0, z) - (nu - 1.0) * ml_any(rho, nu, z)) / (rho * z);
}

// (w_beta * w_rho)(t) on the grid, w_nu = t^{nu-1} E_{rho,nu}(a t^rho),
// a = -lambda_sq, and its RL derivative of order rho, both in closed form:
//   w_beta * w_rho = t^{beta+rho-1} E'_{rho,beta}(a t^rho),
//   D^rho (w_beta * w_rho) = t^{beta-1} E'_{rho,beta-rho}(a t^rho).
struct CouplingBasis {
    GridFn conv, conv_derivative;
};

inline CouplingBasis coupling_basis(double rho, double beta, double lambda_sq, double T, std::size_t n) {
    const double a = -lambda_sq;
    std::vector<double> conv(n, 0.0), dconv(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        const double t = m + 1 == n ? T : T * static_cast<double>(m) / static_cast<double>(n - 1);
        const double z = a * std::pow(t, rho);
        conv[m] = std::pow(t, beta + rho - 1.0) * ml_derivative(rho, beta, z);
        dconv[m] = std::pow(t, beta - 1.0) * ml_derivative(rho, beta - rho, z);
    }
    const double e = beta + rho - 1.0;
    conv[0] = e > 0.0 ? 0.0 : e == 0.0 ? rgamma(beta + rho) : std::numeric_limits<double>::infinity();
    dconv[0] = 0.0; // not used; the derivative is only sampled at interior nodes
    return {GridFn(std::move(conv), T), GridFn(std::move(dconv), T)};
}

inline double grid_node(const InverseProblemSpec& s, std::size_t i) {
    return s.T * static_cast<double>(i) / static_cast<double>(s.n_t - 1);
}

} // namespace detail

/// Data of one time coefficient: the two initial functionals and the source.
struct ModeData {
    double phi = 0.0, psi = 0.0, source = 0.0;
    bool zero() const { return phi == 0.0 && psi == 0.0 && source == 0.0; }
};

namespace detail {

// phi w_{b_phi} + psi w_{b_psi} + source w_{rho+1}, w_nu(t) = t^{nu-1} E(-l^2 t^rho).
inline double ml_mode(const LevelParams& p, double lambda_sq, const ModeData& d, double t) {
    if (t < 0.0) throw DomainError("time must be nonnegative");
    auto e = term_exponents(p);
    double v = 0.0;
    auto add = [&](double c, double beta) {
        if (c == 0.0) return;
        double w = ml_power(p.rho(), beta, -lambda_sq, t);
        if (!std::isfinite(w)) throw DomainError("time coefficient is singular at t = 0");
        v += c * w;
    };
    add(d.phi, e.phi);
    add(d.psi, e.psi);
    add(d.source, e.source);
    return v;
}

// L U for the closed-form part, through the RL form with the prescribed constants:
// D^rho (c w_beta - c t^{beta-1}/Gamma(beta)) = c (w_{beta-rho} - t^{beta-rho-1}/Gamma(beta-rho)).
inline double ml_mode_level_derivative(const LevelParams& p, double lambda_sq, const ModeData& d, double t) {
    auto e = term_exponents(p);
    const double rho = p.rho();
    double v = 0.0;
    for (auto [c, beta] : {std::pair{d.phi, e.phi}, std::pair{d.psi, e.psi}}) {
        if (c == 0.0) continue;
        v += c * (ml_power(rho, beta - rho, -lambda_sq, t) - std::pow(t, beta - rho - 1.0) * rgamma(beta - rho));
    }
    if (d.source != 0.0) v += d.source * ml_power(rho, 1.0, -lambda_sq, t);
    return v;
}

} // namespace detail

/// U_0(t) = phi0 t^{rho+nu1-1}/Gamma(rho+nu1) + psi0 t^{rho+nu1+nu2-2}/Gamma(rho+nu1+nu2-1) + f0 t^rho/Gamma(rho+1).
inline double time_coeff_U0(const InverseProblemSpec& s, double phi0, double psi0, double f0, double t) {
    return detail::ml_mode(s.params, 0.0, {phi0, psi0, f0}, t);
}

/// U_{1k}(t): the same three terms with Mittag-Leffler factors E(-l_k^2 t^rho).
inline double time_coeff_U1k(const InverseProblemSpec& s, int k, double phi1, double psi1, double f1, double t) {
    const double l = eigenvalue(k);
    return detail::ml_mode(s.params, l * l, {phi1, psi1, f1}, t);
}

/// 2 l_k (U_{1k} * t^{rho-1} E_{rho,rho}(-l_k^2 t^rho)) on the time grid, and its RL derivative.
inline detail::CouplingBasis coupling_term(const InverseProblemSpec& s, int k, const ModeData& first) {
    const double l = eigenvalue(k), l2 = l * l;
    const auto e = detail::term_exponents(s.params);
    std::vector<double> c(s.n_t, 0.0), d(s.n_t, 0.0);
    const double scale = 2.0 * l * s.coupling;
    for (auto [coef, beta] : {std::pair{first.phi, e.phi}, std::pair{first.psi, e.psi}, std::pair{first.source, e.source}}) {
        if (coef == 0.0 || scale == 0.0) continue;
        auto b = detail::coupling_basis(s.params.rho(), beta, l2, s.T, s.n_t);
        for (std::size_t i = 0; i < s.n_t; ++i) {
            c[i] += scale * coef * b.conv[i];
            d[i] += scale * coef * b.conv_derivative[i];
        }
    }
    return {GridFn(std::move(c), s.T), GridFn(std::move(d), s.T)};
}

/// U_{2k} on the time grid: closed-form terms plus the coupling convolution.
inline GridFn time_coeff_U2k(const InverseProblemSpec& s, int k, const ModeData& second, const ModeData& first) {
    const double l = eigenvalue(k);
    auto conv = coupling_term(s, k, first).conv;
    std::vector<double> u(s.n_t);
    for (std::size_t i = 0; i < s.n_t; ++i) {
        double t = detail::grid_node(s, i);
        double closed = 0.0;
        try {
            closed = detail::ml_mode(s.params, l * l, second, t);
        } catch (const DomainError&) {
            closed = std::numeric_limits<double>::infinity();
        }
        u[i] = closed + conv[i];
    }
    return GridFn(std::move(u), s.T);
}

/// U_{2k} from a sampled U_{1k}: the coupling 2 l_k (U_{1k} * t^{rho-1} E_{rho,rho}(-l_k^2 t^rho))
/// by product integration against the kernel's exact cell moments.
inline GridFn time_coeff_U2k(const InverseProblemSpec& s, int k, const ModeData& second, const GridFn& first) {
    if (first.size() != s.n_t || std::abs(first.t_max - s.T) > 1e-12 * s.T)
        throw UsageError("U_1k samples must live on the spec's time grid");
    const double l = eigenvalue(k);
    GridFn conv = convolve(first, ml_convolution_kernel(s.params.rho(), s.params.rho(), l * l, s.T, s.n_t));
    std::vector<double> u(s.n_t);
    for (std::size_t i = 0; i < s.n_t; ++i) {
        double t = detail::grid_node(s, i);
        double closed = 0.0;
        try {
            closed = detail::ml_mode(s.params, l * l, second, t);
        } catch (const DomainError&) {
            closed = std::numeric_limits<double>::infinity();
        }
        u[i] = closed + 2.0 * l * s.coupling * conv[i];
    }
    return GridFn(std::move(u), s.T);
}

// ----------------------------------------------------------------- solution

struct ModeSolution {
    int k = 0;
    double lambda = 0.0;
    ModeData first, second;       // (1,k) and (2,k) data with recovered sources
    double final_first = 0.0, final_second = 0.0;
    double denominator = 0.0;     // T^rho E_{rho,rho+1}(-l^2 T^rho)
    GridFn coupling, coupling_derivative;
};

struct InverseDiagnostics {
    double final_residual = 0.0;   // max |u(x,T) - final data| on 101 points
    double pde_residual = 0.0;     // max |L u - u_xx - f| at interior collocation points
    double pde_scale = 0.0;        // max |f| at the same points
    double boundary_value_residual = 0.0; // max |u(1,t)|
    double boundary_flux_residual = 0.0;  // max |u_x(0,t) - u_x(1,t)|
    double initial_trace = 0.0;    // max |J^{1-rho} u(x,0+)|, +inf if singular
    std::vector<double> collocation_times;
};

class InverseSolution {
public:
    InverseProblemSpec spec;
    SpectralCoeffs phi, psi, final_data, source;
    ModeData zero_mode;
    std::vector<ModeSolution> modes;
    InverseDiagnostics diagnostics;

    double source_at(double x) const { return reconstruct(source, x); }

    /// Time coefficients at grid node i (U_0, U_1k, U_2k).
    double U0(double t) const { return detail::ml_mode(spec.params, 0.0, zero_mode, t); }
    double U1(std::size_t k, double t) const {
        const auto& m = modes.at(k - 1);
        return detail::ml_mode(spec.params, m.lambda * m.lambda, m.first, t);
    }
    double U2_at_node(std::size_t k, std::size_t i) const {
        const auto& m = modes.at(k - 1);
        double t = detail::grid_node(spec, i);
        return detail::ml_mode(spec.params, m.lambda * m.lambda, m.second, t) + m.coupling[i];
    }

    /// u and its x-derivatives (order 0, 1, 2) at x and grid node i.
    double state_at_node(double x, std::size_t i, int order = 0) const {
        const double t = detail::grid_node(spec, i);
        double v = U0(t) * eval_X(EigenIndex::zero(), x, order);
        for (std::size_t k = 1; k <= modes.size(); ++k) {
            const int ki = static_cast<int>(k);
            v += U1(k, t) * eval_X({EigenKind::One, ki}, x, order);
            v += U2_at_node(k, i) * eval_X({EigenKind::Two, ki}, x, order);
        }
        return v;
    }

    /// Nearest time-grid node to t.
    std::size_t node_of(double t) const {
        double r = t / spec.T * static_cast<double>(spec.n_t - 1);
        return static_cast<std::size_t>(std::clamp(std::llround(r), 0LL, static_cast<long long>(spec.n_t - 1)));
    }
};

/// Source coefficients from the final condition U_j(T) = final_j.
inline InverseSolution solve(const InverseProblemSpec& spec) {
    spec.validate();
    const LevelParams& p = spec.params;
    const auto e = detail::term_exponents(p);
    InverseSolution sol;
    sol.spec = spec;
    sol.phi = spec.phi.project(spec.K);
    sol.psi = spec.psi.project(spec.K);
    sol.final_data = spec.final_data.project(spec.K);
    if (!(e.psi > 0.0)) {
        bool any = sol.psi.a0 != 0.0;
        for (std::size_t k = 0; k < spec.K; ++k) any = any || sol.psi.a1[k] != 0.0 || sol.psi.a2[k] != 0.0;
        if (any) throw DomainError("psi must vanish when xi_1 = 0");
    }
    const double T = spec.T;
    sol.source = SpectralCoeffs(spec.K);

    // zero mode
    {
        ModeData d{sol.phi.a0, sol.psi.a0, 0.0};
        double rest = detail::ml_mode(p, 0.0, d, T);
        d.source = (sol.final_data.a0 - rest) * gamma_fn(p.rho() + 1.0) / std::pow(T, p.rho());
        sol.zero_mode = d;
        sol.source.a0 = d.source;
    }

    sol.modes.resize(spec.K);
    parallel_for(spec.K, [&](std::size_t idx) {
        const int k = static_cast<int>(idx + 1);
        ModeSolution m;
        m.k = k;
        m.lambda = eigenvalue(k);
        const double l2 = m.lambda * m.lambda;
        m.denominator = detail::ml_power(p.rho(), e.source, -l2, T);
        if (!(std::abs(m.denominator) > 1e-300) || !std::isfinite(m.denominator))
            throw DomainError("ill-posed: E_{rho,rho+1}(-lambda^2 T^rho) vanishes at k = " + std::to_string(k));
        m.final_first = sol.final_data.a1[idx];
        m.final_second = sol.final_data.a2[idx];

        m.first = {sol.phi.a1[idx], sol.psi.a1[idx], 0.0};
        m.first.source = (m.final_first - detail::ml_mode(p, l2, m.first, T)) / m.denominator;

        auto cp = coupling_term(spec, k, m.first);
        m.coupling = std::move(cp.conv);
        m.coupling_derivative = std::move(cp.conv_derivative);
        m.second = {sol.phi.a2[idx], sol.psi.a2[idx], 0.0};
        m.second.source =
            (m.final_second - detail::ml_mode(p, l2, m.second, T) - m.coupling[spec.n_t - 1]) / m.denominator;
        sol.modes[idx] = std::move(m);
    });
    for (const auto& m : sol.modes) {
        sol.source.a1[static_cast<std::size_t>(m.k - 1)] = m.first.source;
        sol.source.a2[static_cast<std::size_t>(m.k - 1)] = m.second.source;
    }
    sol.source.validate();

    // ------------------------------------------------------------ diagnostics
    InverseDiagnostics& dg = sol.diagnostics;
    const std::size_t last = spec.n_t - 1;
    for (int i = 0; i <= 100; ++i) {
        double x = i / 100.0;
        dg.final_residual = std::max(dg.final_residual, std::abs(sol.state_at_node(x, last) - spec.final_data(x)));
    }
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        std::size_t i = sol.node_of(frac * T);
        if (i < 2) continue;
        double t = detail::grid_node(spec, i);
        dg.collocation_times.push_back(t);
        // L U_j at t
        double lu0 = detail::ml_mode_level_derivative(p, 0.0, sol.zero_mode, t);
        std::vector<double> lu1(spec.K), lu2(spec.K);
        for (std::size_t k = 1; k <= spec.K; ++k) {
            const auto& m = sol.modes[k - 1];
            const double l2 = m.lambda * m.lambda;
            lu1[k - 1] = detail::ml_mode_level_derivative(p, l2, m.first, t);
            lu2[k - 1] = detail::ml_mode_level_derivative(p, l2, m.second, t) + m.coupling_derivative[i];
        }
        for (int xi = 1; xi <= 9; ++xi) {
            double x = xi / 10.0;
            double lu = lu0 * eval_X(EigenIndex::zero(), x);
            for (std::size_t k = 1; k <= spec.K; ++k) {
                const int ki = static_cast<int>(k);
                lu += lu1[k - 1] * eval_X({EigenKind::One, ki}, x) + lu2[k - 1] * eval_X({EigenKind::Two, ki}, x);
            }
            double f = sol.source_at(x);
            double r = lu - sol.state_at_node(x, i, 2) - f;
            dg.pde_residual = std::max(dg.pde_residual, std::abs(r));
            dg.pde_scale = std::max(dg.pde_scale, std::abs(f));
        }
        dg.boundary_value_residual = std::max(dg.boundary_value_residual, std::abs(sol.state_at_node(1.0, i)));
        dg.boundary_flux_residual = std::max(
            dg.boundary_flux_residual, std::abs(sol.state_at_node(0.0, i, 1) - sol.state_at_node(1.0, i, 1)));
    }
    // J^{1-rho} of c w_beta tends to 0 (beta > rho), c (beta = rho) or diverges (beta < rho).
    auto trace_weight = [&](double beta) {
        if (beta > p.rho() + admissibility_tol) return 0.0;
        if (beta >= p.rho() - admissibility_tol) return 1.0;
        return std::numeric_limits<double>::infinity();
    };
    const double wphi = trace_weight(e.phi), wpsi = trace_weight(e.psi);
    auto mode_trace = [&](const ModeData& d) {
        double v = 0.0;
        if (d.phi != 0.0) v += d.phi * wphi;
        if (d.psi != 0.0) v += d.psi * wpsi;
        return v;
    };
    for (int i = 0; i <= 100; ++i) {
        double x = i / 100.0;
        double v = mode_trace(sol.zero_mode) * eval_X(EigenIndex::zero(), x);
        for (const auto& m : sol.modes) {
            double a = mode_trace(m.first), b = mode_trace(m.second);
            if (a != 0.0) v += a * eval_X({EigenKind::One, m.k}, x);
            if (b != 0.0) v += b * eval_X({EigenKind::Two, m.k}, x);
        }
        dg.initial_trace = std::max(dg.initial_trace, std::isnan(v) ? std::numeric_limits<double>::infinity() : std::abs(v));
    }
    return sol;
}

} // namespace fraclevel

#endif
