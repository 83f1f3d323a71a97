#ifndef FRACLEVEL_VERIFICATION_HPP
#define FRACLEVEL_VERIFICATION_HPP

#include <cmath>
#include <string>
#include <vector>

#include "fraclevel/grid_calculus.hpp"
#include "fraclevel/io.hpp"
#include "fraclevel/level_derivative.hpp"
#include "fraclevel/power_calculus.hpp"
#include "fraclevel/random_cases.hpp"
#include "fraclevel/spectral.hpp"

// Self-check suites behind `verify` and `lfd verify-*`. Each returns a JSON
// report with "passed" and "max_discrepancy".

namespace fraclevel {

struct SuiteOptions {
    std::uint64_t seed = 20240601;
    std::size_t cases = 100;
    double tol = 1e-11;
    std::optional<double> rho; // fixes the order where a suite allows it
};

/// lfd_composed against lfd_rl_form on random parameters with 2 and 3 levels.
inline json suite_equivalence(const SuiteOptions& o) {
    Rng rng(o.seed);
    double worst = 0.0;
    json fails = json::array();
    for (std::size_t c = 0; c < o.cases; ++c) {
        auto p = random_level_params(rng, 2 + c % 2);
        auto f = random_monomial_sum(rng, p);
        double d = relative_discrepancy(lfd_composed(f, p), lfd_rl_form(f, p));
        worst = std::max(worst, d);
        if (d > o.tol && fails.size() < 5) fails.push_back({{"f", to_string(f)}, {"discrepancy", d}});
    }
    return {{"suite", "equivalence"}, {"cases", o.cases}, {"tolerance", o.tol},
            {"max_discrepancy", worst}, {"passed", worst <= o.tol}, {"failures", fails}};
}

/// Level parameter choices that reproduce the RL, Caputo and Hilfer derivatives.
inline json suite_reductions(const SuiteOptions& o) {
    Rng rng(o.seed);
    double w_rl = 0.0, w_c = 0.0, w_h = 0.0;
    for (std::size_t c = 0; c < o.cases; ++c) {
        const double rho = o.rho ? *o.rho : uniform(rng, 0.05, 0.999);
        const double type = uniform(rng, 0.0, 1.0);
        // exponents >= 0 keep every classical operator defined
        std::vector<Monomial> terms;
        for (int i = 0; i < 4; ++i) terms.push_back({uniform(rng, -2.0, 2.0), uniform(rng, 0.0, 4.0)});
        terms.push_back({uniform(rng, -2.0, 2.0), 0.0});
        MonomialSum f(std::move(terms));
        w_rl = std::max(w_rl, relative_discrepancy(lfd_composed(f, riemann_liouville_params(rho)), rl_derivative(f, rho)));
        w_c = std::max(w_c, relative_discrepancy(lfd_composed(f, caputo_params(rho)), caputo_derivative(f, rho)));
        w_h = std::max(w_h, relative_discrepancy(lfd_composed(f, hilfer_params(rho, type)), hilfer_derivative(f, rho, type)));
    }
    const double worst = std::max({w_rl, w_c, w_h});
    return {{"suite", "reductions"},
            {"cases", o.cases},
            {"tolerance", o.tol},
            {"identities",
             json::array({{{"name", "nu=(0,1) equals Riemann-Liouville"}, {"max_discrepancy", w_rl}},
                          {{"name", "nu=(1-rho,0) equals Caputo"}, {"max_discrepancy", w_c}},
                          {{"name", "nu=(type*(1-rho),1) equals Hilfer"}, {"max_discrepancy", w_h}}})},
            {"max_discrepancy", worst},
            {"passed", worst <= o.tol}};
}

/// J^a J^b = J^{a+b}: exact on power sums, second order on a smooth grid function.
inline json suite_semigroup(const SuiteOptions& o) {
    Rng rng(o.seed);
    double worst = 0.0;
    for (std::size_t c = 0; c < o.cases; ++c) {
        double a = uniform(rng, 0.05, 2.0), b = uniform(rng, 0.05, 2.0);
        std::vector<Monomial> terms;
        for (int i = 0; i < 4; ++i) terms.push_back({uniform(rng, -2.0, 2.0), uniform(rng, -0.95, 4.0)});
        MonomialSum f(std::move(terms));
        worst = std::max(worst, relative_discrepancy(rl_integral(rl_integral(f, a), b), rl_integral(f, a + b)));
    }
    json grid = json::array();
    double prev = 0.0;
    bool decreasing = true;
    for (std::size_t n : {129u, 257u, 513u, 1025u}) {
        auto f = sample([](double t) { return std::sin(3.0 * t) + t * t; }, 1.0, n);
        auto lhs = rl_integral_grid(rl_integral_grid(f, 0.4), 0.3);
        auto rhs = rl_integral_grid(f, 0.7);
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(lhs[i] - rhs[i]));
        if (prev > 0.0 && !(d < prev)) decreasing = false;
        grid.push_back({{"n", n}, {"defect", d}});
        prev = d;
    }
    return {{"suite", "semigroup"}, {"cases", o.cases}, {"tolerance", o.tol}, {"max_discrepancy", worst},
            {"grid_defects", grid}, {"grid_defect_decreasing", decreasing},
            {"passed", worst <= o.tol && decreasing}};
}

/// J^rho L f = f - corrections, and both inverse identities on the vanishing class.
inline json suite_fundamental(const SuiteOptions& o) {
    Rng rng(o.seed);
    double worst = 0.0, worst_class = 0.0;
    std::size_t in_class = 0;
    for (std::size_t c = 0; c < o.cases; ++c) {
        auto p = random_level_params(rng, 2 + c % 2);
        auto f = random_monomial_sum(rng, p);
        worst = std::max(worst, fundamental_check(f, p).corrected_discrepancy);
        // members of J^{xi_1}(L^1): J^{xi_1} of a power sum with exponents > -1
        std::vector<Monomial> terms;
        while (terms.size() < 3) {
            Monomial m{uniform(rng, -2.0, 2.0), uniform(rng, -0.9, 3.0)};
            try {
                (void)lfd_composed(rl_integral(MonomialSum(std::vector<Monomial>{m}), p.xi(1)), p);
                terms.push_back(m);
            } catch (const DomainError&) {
            }
        }
        auto g = rl_integral(MonomialSum(std::move(terms)), p.xi(1));
        auto r = fundamental_check(g, p);
        if (r.vanishing_class) ++in_class;
        worst_class = std::max({worst_class, r.left_inverse_discrepancy, r.right_inverse_discrepancy});
    }
    const double m = std::max(worst, worst_class);
    return {{"suite", "fundamental"}, {"cases", o.cases}, {"tolerance", o.tol},
            {"corrected_identity", worst}, {"inverse_identities", worst_class},
            {"vanishing_class_members", in_class}, {"max_discrepancy", m},
            {"passed", m <= o.tol && in_class == o.cases}};
}

/// Gram matrix of the X and Y families up to K.
inline json suite_biorthogonality(std::size_t K = 8, std::size_t order = 128, double tol = 1e-10) {
    std::vector<EigenIndex> idx{EigenIndex::zero()};
    for (int k = 1; k <= static_cast<int>(K); ++k) {
        idx.push_back(EigenIndex::one(k));
        idx.push_back(EigenIndex::two(k));
    }
    double worst = 0.0;
    for (const auto& a : idx)
        for (const auto& b : idx) worst = std::max(worst, std::abs(inner(a, b, order) - (a == b ? 1.0 : 0.0)));
    return {{"suite", "biorthogonality"}, {"K", K}, {"order", order}, {"tolerance", tol},
            {"max_discrepancy", worst}, {"passed", worst <= tol}};
}

} // namespace fraclevel

#endif
