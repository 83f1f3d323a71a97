#ifndef FRACLEVEL_MITTAG_LEFFLER_HPP
#define FRACLEVEL_MITTAG_LEFFLER_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

#include "fraclevel/detail/mp_gamma.hpp"
#include "fraclevel/detail/mpfr_real.hpp"
#include "fraclevel/errors.hpp"
#include "fraclevel/grid_calculus.hpp"
#include "fraclevel/special_functions.hpp"

namespace fraclevel {

/// Tuning knobs of the evaluator.
struct MlOptions {
    /// Below this |z| the power series is tried before the asymptotic expansion.
    double z_switch = 40.0;
    /// Relative accuracy demanded from each method before it is accepted.
    double rel_target = 1e-13;
};

namespace detail {

struct MlResult {
    double value = 0.0;
    double bound = std::numeric_limits<double>::infinity(); // estimated absolute error
    bool ok = false;
};

// log of |z|^k / |Gamma(rho k + nu)|; -inf when the coefficient vanishes.
inline double ml_log_term(double rho, double nu, double log_abs_z, std::size_t k) {
    double a = rho * static_cast<double>(k) + nu;
    if (is_nonpositive_integer(a)) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(k) * log_abs_z - log_abs_gamma(a);
}

struct SeriesProfile {
    std::size_t terms = 0;    // number of terms to sum
    double log_max = -std::numeric_limits<double>::infinity();
    bool feasible = false;
};

// Where the power series terms peak and how many are needed to fall
// below exp(log_floor) past the peak.
inline SeriesProfile ml_series_profile(double rho, double nu, double z, double log_rel_floor,
                                       std::size_t max_terms = 200000,
                                       double log_max_cap = std::numeric_limits<double>::infinity()) {
    SeriesProfile p;
    const double lz = std::log(std::abs(z));
    // The terms peak near rho k = |z|^(1/rho); past that they need about as many again to decay.
    if (std::pow(std::abs(z), 1.0 / rho) / rho > 0.4 * static_cast<double>(max_terms)) return p;
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < max_terms; ++k) {
        double l = ml_log_term(rho, nu, lz, k);
        p.log_max = std::max(p.log_max, l);
        if (p.log_max > log_max_cap) return p;
        bool past_peak = l < prev && rho * static_cast<double>(k) + nu > 1.0;
        if (past_peak && l < p.log_max + log_rel_floor - 40.0) {
            p.terms = k;
            p.feasible = true;
            return p;
        }
        if (std::isfinite(l)) prev = l;
    }
    return p;
}

inline MlResult ml_taylor_double(double rho, double nu, double z, const MlOptions& opt) {
    MlResult r;
    // With cancellation (z < 0) a peak beyond ~1e15 leaves no correct digits.
    auto prof = ml_series_profile(rho, nu, z, std::log(1e-18), 200000, z < 0.0 ? 36.0 : 700.0);
    if (!prof.feasible) return r;
    double sum = 0.0, comp = 0.0, abs_sum = 0.0, zk = 1.0;
    const double lz = std::log(std::abs(z));
    for (std::size_t k = 0; k <= prof.terms; ++k) {
        double a = rho * static_cast<double>(k) + nu;
        double t;
        if (std::abs(zk) < 1e300 && a < 170.0) {
            t = zk * rgamma(a);
        } else {
            double l = ml_log_term(rho, nu, lz, k);
            int sg = gamma_sign(a) * ((z < 0 && (k % 2)) ? -1 : 1);
            t = sg * std::exp(l);
        }
        double y = t - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        abs_sum += std::abs(t);
        zk *= z;
    }
    r.value = sum;
    r.bound = 4e-15 * abs_sum + 1e-17 * std::abs(sum);
    // Each term carries a few ulps from the reciprocal gamma; accept when the
    // resulting bound is within 100x the target.
    r.ok = std::isfinite(sum) && r.bound <= 100.0 * opt.rel_target * std::abs(sum);
    return r;
}

// Expansion for large |z|: minus the inverse-power series, plus the residues of
// the poles of s^(rho-nu)/(s^rho - z) on the principal sheet.
inline MlResult ml_asymptotic(double rho, double nu, double z, const MlOptions& opt) {
    MlResult r;
    const double x = std::abs(z);
    if (x < 1.0) return r;
    const double lx = std::log(x);
    double sum = 0.0;
    double envelope_prev = std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < 100000; ++k) {
        double a = nu - rho * static_cast<double>(k);
        // |1/Gamma(a)| <= Gamma(1 - a)/pi for a < 1
        double env = a < 1.0 ? std::exp(log_abs_gamma(1.0 - a) - static_cast<double>(k) * lx) / std::numbers::pi
                             : std::exp(-log_abs_gamma(a) - static_cast<double>(k) * lx);
        if (a < 0.0) {
            if (env > envelope_prev) {
                bound = env;
                break;
            }
            envelope_prev = env;
        }
        double zk = std::exp(-static_cast<double>(k) * lx);
        if (z < 0 && (k % 2)) zk = -zk;
        double t = zk * rgamma(a);
        sum -= t;
        if (env < 1e-18 * std::abs(sum)) {
            bound = env;
            break;
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    if (z > 0) {
        double lead = std::pow(x, 1.0 / rho);
        double e = std::exp(lead) * std::pow(x, (1.0 - nu) / rho) / rho;
        if (!std::isfinite(e)) {
            r.value = inf;
            r.bound = inf;
            return r;
        }
        // Pole pairs off the positive axis (rho > 1 only contributes for rho near 2).
        sum += e;
        for (int j = 1; 2.0 * std::numbers::pi * j / rho < std::numbers::pi; ++j) {
            std::complex<double> s = std::polar(lead, 2.0 * std::numbers::pi * j / rho);
            sum += 2.0 / rho * std::real(std::pow(s, 1.0 - nu) * std::exp(s));
        }
    } else if (rho > 1.0) {
        std::complex<double> s = std::polar(std::pow(x, 1.0 / rho), std::numbers::pi / rho);
        sum += 2.0 / rho * std::real(std::pow(s, 1.0 - nu) * std::exp(s));
        if (rho >= 2.0) bound = std::max(bound, 0.0);
    }
    r.value = sum;
    r.bound = bound + 4e-16 * std::abs(sum);
    r.ok = std::isfinite(sum) && r.bound <= opt.rel_target * std::abs(sum);
    return r;
}

// Cache of 1/Gamma(rho k + nu) at a given precision.
class MpCoefficientTable {
public:
    MpCoefficientTable(double rho, double nu, mpfr_prec_t bits) : rho_(rho), nu_(nu), bits_(bits) {}

    // Ensures at least n coefficients and returns a view (valid while the
    // table lives; entries never move because storage is a deque of blocks).
    const MpReal& at(std::size_t k) {
        std::lock_guard<std::mutex> lock(mu_);
        while (coef_.size() <= k) coef_.push_back(compute(coef_.size()));
        return *coef_[k];
    }

private:
    std::unique_ptr<MpReal> compute(std::size_t k) const {
        auto c = std::make_unique<MpReal>(bits_);
        MpReal a(bits_ + 32, rho_);
        mpfr_mul_ui(a.get(), a.get(), static_cast<unsigned long>(k), MPFR_RNDN);
        mpfr_add_d(a.get(), a.get(), nu_, MPFR_RNDN);
        mp_rgamma(c->get(), a.get());
        return c;
    }

    double rho_, nu_;
    mpfr_prec_t bits_;
    std::mutex mu_;
    std::vector<std::unique_ptr<MpReal>> coef_;
};

inline std::shared_ptr<MpCoefficientTable> mp_table(double rho, double nu, mpfr_prec_t bits) {
    static std::mutex mu;
    static std::map<std::tuple<double, double, long>, std::shared_ptr<MpCoefficientTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(rho, nu, static_cast<long>(bits));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() > 4096) cache.clear();
    auto t = std::make_shared<MpCoefficientTable>(rho, nu, bits);
    cache.emplace(key, t);
    return t;
}

inline MlResult ml_taylor_mp(double rho, double nu, double z, const MlOptions& opt) {
    MlResult r;
    auto prof = ml_series_profile(rho, nu, z, std::log(1e-20));
    if (!prof.feasible || prof.terms > 50000) return r;
    const double log2_max = prof.log_max / std::numbers::ln2;
    double guess_log2 = std::min(0.0, log2_max) - 40.0;
    for (int attempt = 0; attempt < 5; ++attempt) {
        long need = static_cast<long>(std::ceil(log2_max - guess_log2)) + 64;
        mpfr_prec_t bits = std::max<long>(128, (need + 63) / 64 * 64);
        if (bits > 16384) return r;
        auto table = mp_table(rho, nu, bits);
        // Terms must drop below 2^-bits of the peak before stopping.
        auto prof2 = ml_series_profile(rho, nu, z, -static_cast<double>(bits) * std::numbers::ln2);
        if (!prof2.feasible) return r;
        MpReal sum(bits), zk(bits, 1.0), zz(bits, z), term(bits);
        for (std::size_t k = 0; k <= prof2.terms; ++k) {
            mpfr_mul(term.get(), zk.get(), table->at(k).get(), MPFR_RNDN);
            mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
            mpfr_mul(zk.get(), zk.get(), zz.get(), MPFR_RNDN);
        }
        double v = sum.to_double();
        double err = std::exp2(log2_max - static_cast<double>(bits) + 8.0);
        if (v != 0.0 && err <= opt.rel_target * 1e-2 * std::abs(v)) {
            r.value = v;
            r.bound = err + 1.2e-16 * std::abs(v);
            r.ok = true;
            return r;
        }
        guess_log2 = v != 0.0 ? std::log2(std::abs(v)) - 20.0 : guess_log2 - 200.0;
    }
    return r;
}

} // namespace detail

/// Two-parameter Mittag-Leffler function E_{rho,nu}(z) for real z,
/// rho in (0, 2], |z| <= 1e8. Methods are chosen by an error model: double
/// precision power series, the large-|z| expansion, or the power series in
/// extended precision when cancellation is severe.
inline double ml_eval(double rho, double nu, double z, const MlOptions& opt = {}) {
    if (!(rho > 0.0 && rho <= 2.0)) throw DomainError("ml_eval: rho must lie in (0, 2]");
    if (!std::isfinite(nu)) throw DomainError("ml_eval: nu must be finite");
    if (!std::isfinite(z) || std::abs(z) > 1e8) throw DomainError("ml_eval: |z| must not exceed 1e8");
    if (z == 0.0) return rgamma(nu);

    detail::MlResult best;
    auto consider = [&](const detail::MlResult& r) {
        if (std::isfinite(r.value) && r.bound < best.bound) best = r;
        return r.ok;
    };
    if (z > 0.0) {
        if (consider(detail::ml_taylor_double(rho, nu, z, opt))) return best.value;
        auto a = detail::ml_asymptotic(rho, nu, z, opt);
        if (std::isinf(a.value)) throw NumericalFailure("ml_eval: result overflows double range", a.bound);
        if (consider(a)) return best.value;
        if (consider(detail::ml_taylor_mp(rho, nu, z, opt))) return best.value;
    } else if (std::abs(z) < opt.z_switch) {
        if (consider(detail::ml_taylor_double(rho, nu, z, opt))) return best.value;
        if (consider(detail::ml_asymptotic(rho, nu, z, opt))) return best.value;
        if (consider(detail::ml_taylor_mp(rho, nu, z, opt))) return best.value;
    } else {
        if (consider(detail::ml_asymptotic(rho, nu, z, opt))) return best.value;
        if (consider(detail::ml_taylor_mp(rho, nu, z, opt))) return best.value;
    }
    double rel = best.value != 0.0 ? best.bound / std::abs(best.value) : best.bound;
    throw NumericalFailure("ml_eval: requested accuracy unattainable for rho=" + std::to_string(rho) +
                               " nu=" + std::to_string(nu) + " z=" + std::to_string(z),
                           rel);
}

namespace detail {

using KernelKey = std::tuple<double, double, double, double, std::size_t>;

inline std::shared_ptr<const std::vector<double>> cached_kernel(const KernelKey& key,
                                                                const std::function<std::vector<double>()>& make) {
    static std::mutex mu;
    static std::map<KernelKey, std::shared_ptr<const std::vector<double>>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto v = std::make_shared<const std::vector<double>>(make());
    std::lock_guard<std::mutex> lock(mu);
    if (cache.size() > 512) cache.clear();
    return cache.emplace(key, v).first->second;
}

inline double grid_node(double t_max, std::size_t n, std::size_t j) {
    return j + 1 == n ? t_max : t_max * static_cast<double>(j) / static_cast<double>(n - 1);
}

} // namespace detail

/// Samples t^(nu-1) E_{rho,nu}(-lambda_sq t^rho) on the grid. The origin value
/// is 0 for nu > 1, 1/Gamma(1) for nu = 1 and +inf for nu < 1. Results are
/// memoized per (rho, nu, lambda_sq, grid).
inline GridFn ml_kernel(double rho, double nu, double lambda_sq, double t_max, std::size_t n) {
    if (!(lambda_sq >= 0.0)) throw DomainError("ml_kernel: lambda_sq must be nonnegative");
    if (n < 2 || !(t_max > 0.0)) throw UsageError("ml_kernel: bad grid");
    auto key = std::make_tuple(rho, nu, lambda_sq, t_max, n);
    auto v = detail::cached_kernel(key, [&] {
        std::vector<double> s(n);
        for (std::size_t j = 1; j < n; ++j) {
            double t = detail::grid_node(t_max, n, j);
            s[j] = std::pow(t, nu - 1.0) * ml_eval(rho, nu, -lambda_sq * std::pow(t, rho));
        }
        s[0] = nu > 1.0 ? 0.0 : (nu == 1.0 ? 1.0 : std::numeric_limits<double>::infinity());
        return s;
    });
    return GridFn(*v, t_max);
}

/// The kernel t^(nu-1) E_{rho,nu}(-lambda_sq t^rho) (nu > 0) described by its
/// exact cell moments, for product-integration convolution.
inline ConvolutionKernel ml_convolution_kernel(double rho, double nu, double lambda_sq, double t_max,
                                               std::size_t n) {
    if (!(nu > 0.0)) throw DomainError("ml_convolution_kernel: nu must be positive");
    auto key = std::make_tuple(rho, -nu, lambda_sq, t_max, n); // distinct from ml_kernel entries
    auto v = detail::cached_kernel(key, [&] {
        std::vector<double> m(2 * n, 0.0);
        for (std::size_t j = 1; j < n; ++j) {
            double t = detail::grid_node(t_max, n, j);
            double z = -lambda_sq * std::pow(t, rho);
            double e1 = ml_eval(rho, nu + 1.0, z), e2 = ml_eval(rho, nu + 2.0, z);
            m[j] = std::pow(t, nu) * e1;
            m[n + j] = std::pow(t, nu + 1.0) * (e1 - e2);
        }
        return m;
    });
    std::vector<double> m0(v->begin(), v->begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> m1(v->begin() + static_cast<std::ptrdiff_t>(n), v->end());
    return kernel_from_primitives(m0, m1, ml_kernel(rho, nu, lambda_sq, t_max, n).samples, t_max);
}

} // namespace fraclevel

#endif
