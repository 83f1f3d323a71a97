#ifndef FRACLEVEL_RANDOM_CASES_HPP
#define FRACLEVEL_RANDOM_CASES_HPP

#include <algorithm>
#include <random>
#include <vector>

#include "fraclevel/level_derivative.hpp"
#include "fraclevel/power_calculus.hpp"

// Generators for randomized checks. Draws keep a small margin from every
// admissibility edge so that rounding never flips a constraint.

namespace fraclevel {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Strictly admissible parameters with n in {2, 3} levels.
inline LevelParams random_level_params(Rng& rng, std::size_t n) {
    constexpr double m = 1e-3;
    if (n != 2 && n != 3) throw UsageError("random_level_params supports 2 or 3 levels");
    for (;;) {
        const double rho = uniform(rng, 0.05, 1.0 - m);
        const double nu1 = uniform(rng, 0.0, 1.0 - rho);
        const double nu2 = uniform(rng, std::max(0.0, 1.0 - rho - nu1) + m, 1.0 - m);
        if (n == 2) return LevelParams(rho, {nu1, nu2});
        const double lo = 2.0 - rho - nu1 - nu2 + m;
        if (lo >= 1.0 - m) continue;
        const double nu3 = uniform(rng, lo, 1.0 - m);
        return LevelParams(rho, {nu1, nu2, nu3});
    }
}

/// Up to max_terms monomials with exponents in (xi_1 - 1, 4] on which every
/// stage of the composed derivative is defined; optionally seeded with the
/// correction monomials t^{rho + r_k - k}.
inline MonomialSum random_monomial_sum(Rng& rng, const LevelParams& p, std::size_t max_terms = 5,
                                       bool with_kernel_terms = true) {
    std::vector<Monomial> terms;
    const std::size_t count = std::uniform_int_distribution<std::size_t>(1, max_terms)(rng);
    const double lo = p.xi(1) - 1.0;
    while (terms.size() < count) {
        if (with_kernel_terms && std::bernoulli_distribution(0.25)(rng)) {
            std::size_t k = std::uniform_int_distribution<std::size_t>(1, p.levels())(rng);
            terms.push_back({uniform(rng, -2.0, 2.0), p.correction_exponent(k)});
        } else {
            double a = uniform(rng, lo + 1e-3, 4.0);
            terms.push_back({uniform(rng, -2.0, 2.0), a});
        }
        try {
            (void)lfd_composed(MonomialSum(std::vector<Monomial>{terms.back()}), p);
        } catch (const DomainError&) {
            terms.pop_back(); // exponent falls in a gap where an intermediate derivative is not integrable
        }
    }
    return MonomialSum(std::move(terms));
}

} // namespace fraclevel

#endif
