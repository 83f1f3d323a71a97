#ifndef FRACLEVEL_SPECIAL_FUNCTIONS_HPP
#define FRACLEVEL_SPECIAL_FUNCTIONS_HPP

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "fraclevel/errors.hpp"

namespace fraclevel {

namespace detail {

// Lanczos series, g = 671/128, 14 terms.
inline constexpr double lanczos_g = 5.24218750000000000;
inline constexpr std::array<double, 14> lanczos_coef{
    57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};

inline double lanczos_series(double x) {
    double ser = 0.999999999999997092;
    double y = x;
    for (double c : lanczos_coef) ser += c / ++y;
    return ser;
}

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

} // namespace detail

/// sin(pi x) with exact zeros at the integers.
inline double sin_pi(double x) {
    if (x == std::floor(x)) return 0.0;
    double n = std::round(x);
    double r = x - n; // |r| <= 1/2
    double s = std::sin(std::numbers::pi * r);
    return std::fmod(n, 2.0) == 0.0 ? s : -s;
}

/// Gamma function. Poles raise DomainError.
inline double gamma_fn(double x) {
    if (std::isnan(x)) throw DomainError("gamma: argument is NaN");
    if (detail::is_nonpositive_integer(x)) throw DomainError("gamma: pole at nonpositive integer");
    if (x < 0.5) return std::numbers::pi / (sin_pi(x) * gamma_fn(1.0 - x));
    if (x > 171.7) return std::numeric_limits<double>::infinity();
    if (x == std::floor(x) && x <= 23.0) {
        double f = 1.0;
        for (double k = 2.0; k < x; k += 1.0) f *= k;
        return f;
    }
    double tmp = x + detail::lanczos_g;
    double ser = detail::lanczos_series(x);
    // Split the power to keep the intermediate in range near the overflow edge.
    double p = std::pow(tmp, 0.5 * (x + 0.5));
    return 2.5066282746310005 * ser / x * p * (p * std::exp(-tmp));
}

/// log|Gamma(x)|. Poles give +inf.
inline double log_abs_gamma(double x) {
    if (detail::is_nonpositive_integer(x)) return std::numeric_limits<double>::infinity();
    if (x < 0.5) return std::log(std::numbers::pi / std::abs(sin_pi(x))) - log_abs_gamma(1.0 - x);
    if (x < 20.0) return std::log(std::abs(gamma_fn(x)));
    double tmp = x + detail::lanczos_g;
    return (x + 0.5) * std::log(tmp) - tmp + std::log(2.5066282746310005 * detail::lanczos_series(x) / x);
}

/// Sign of Gamma(x); 0 at the poles.
inline int gamma_sign(double x) {
    if (detail::is_nonpositive_integer(x)) return 0;
    if (x > 0.0) return 1;
    return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1 : -1;
}

/// 1/Gamma(x), entire; exactly zero at nonpositive integers.
inline double rgamma(double x) {
    if (std::isnan(x)) throw DomainError("rgamma: argument is NaN");
    if (detail::is_nonpositive_integer(x)) return 0.0;
    if (x < 0.5) {
        double g = gamma_fn(1.0 - x);
        if (std::isinf(g)) return gamma_sign(x) * std::exp(-log_abs_gamma(x));
        return sin_pi(x) * g / std::numbers::pi;
    }
    if (x > 171.0) return std::exp(-log_abs_gamma(x));
    return 1.0 / gamma_fn(x);
}

/// Beta function for positive arguments.
inline double beta_fn(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta: arguments must be positive");
    if (a + b < 150.0) return gamma_fn(a) * gamma_fn(b) * rgamma(a + b);
    return std::exp(log_abs_gamma(a) + log_abs_gamma(b) - log_abs_gamma(a + b));
}

} // namespace fraclevel

#endif
