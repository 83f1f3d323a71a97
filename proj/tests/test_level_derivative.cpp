#include <cmath>
#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "fraclevel/level_derivative.hpp"
#include "fraclevel/random_cases.hpp"

using namespace fraclevel;

namespace {

// Test-side monomial algebra: a list of (coefficient, exponent) pairs acted
// on with std::tgamma, independent of the library's operator code.
using Terms = std::vector<std::pair<double, double>>;

std::optional<Terms> oracle_integral(const Terms& f, double c) {
    Terms out;
    for (auto [a, e] : f) {
        if (!(e > -1.0)) return std::nullopt;
        if (c == 0.0) out.push_back({a, e});
        else out.push_back({a * std::tgamma(e + 1.0) / std::tgamma(e + c + 1.0), e + c});
    }
    return out;
}

Terms oracle_d(const Terms& f) {
    Terms out;
    for (auto [a, e] : f)
        if (std::abs(e) > 1e-13) out.push_back({a * e, e - 1.0});
    return out;
}

// J^{nu_1} d J^{nu_2} d ... J^{nu_n} d J^{n - rho - r_n} f
std::optional<Terms> oracle_composed(const Terms& f, double rho, const std::vector<double>& nus) {
    double rn = 0.0;
    for (double v : nus) rn += v;
    auto g = oracle_integral(f, static_cast<double>(nus.size()) - rho - rn);
    for (std::size_t k = nus.size(); k-- > 0 && g;) g = oracle_integral(oracle_d(*g), nus[k]);
    return g;
}

// Combines equal exponents and drops cancelled terms (random inputs have
// coefficients of order one).
Terms combine(Terms t) {
    std::sort(t.begin(), t.end(), [](auto& x, auto& y) { return x.second < y.second; });
    double scale = 0.0;
    for (auto [a, e] : t) scale = std::max(scale, std::abs(a));
    Terms out;
    for (auto [a, e] : t) {
        if (!out.empty() && std::abs(out.back().second - e) < 1e-12) out.back().first += a;
        else out.push_back({a, e});
    }
    std::erase_if(out, [&](auto& x) { return std::abs(x.first) <= 1e-12 * scale; });
    return out;
}

// Two-level closed form: D^rho [f - C1 t^{xi1-1}/Gamma(xi1) - C2 t^{rho+nu1-1}/Gamma(rho+nu1)].
std::optional<Terms> oracle_two_level(const Terms& f, double rho, double nu1, double nu2) {
    const double xi1 = rho + nu1 + nu2 - 1.0;
    auto limit = [](const Terms& g) {
        double v = 0.0;
        for (auto [a, e] : g) {
            if (std::abs(e) < 1e-12) v += a;
            else if (e < 0.0 && a != 0.0) return std::numeric_limits<double>::infinity();
        }
        return v;
    };
    auto g1 = oracle_integral(f, 1.0 - xi1);
    if (!g1) return std::nullopt;
    auto g2 = oracle_integral(oracle_d(*g1), nu2);
    if (!g2) return std::nullopt;
    double c1 = limit(*g1), c2 = limit(*g2);
    Terms h = f;
    h.push_back({-c1 / std::tgamma(xi1), xi1 - 1.0});
    h.push_back({-c2 / std::tgamma(rho + nu1), rho + nu1 - 1.0});
    // D^rho = d J^{1-rho}
    auto j = oracle_integral(combine(h), 1.0 - rho);
    if (!j) return std::nullopt;
    return oracle_d(*j);
}

MonomialSum to_sum(const Terms& t) {
    std::vector<Monomial> v;
    for (auto [a, e] : combine(t)) v.push_back({a, e});
    return MonomialSum(std::move(v));
}

Terms from_sum(const MonomialSum& f) {
    Terms t;
    for (const auto& m : f.terms()) t.push_back({m.coeff, m.alpha});
    return t;
}

std::vector<double> nus_of(const LevelParams& p) { return {p.nus().begin(), p.nus().end()}; }

std::string expect_admissibility_message(double rho, std::vector<double> nus) {
    try {
        LevelParams p(rho, std::move(nus));
    } catch (const AdmissibilityError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(LevelParams, ChainExamples) {
    LevelParams p(0.5, {0.2, 0.4});
    EXPECT_NEAR(p.xi(1), 0.1, 1e-15);
    EXPECT_NEAR(p.xi(2), 0.6, 1e-15);
    LevelParams single(0.7, {0.3});
    EXPECT_EQ(single.xi(1), 1.0);
    EXPECT_EQ(single.levels(), 1u);
}

TEST(LevelParams, ChainSumsToRhoPlusFirstLevel) {
    Rng rng(101);
    for (int i = 0; i < 200; ++i) {
        auto p = random_level_params(rng, i % 2 ? 3 : 2);
        double s = 0.0;
        for (double x : p.xis()) s += x;
        EXPECT_NEAR(s, p.rho() + p.nu(1), 1e-14);
        auto chain = xi_chain(p.rho(), p.nus());
        for (std::size_t k = 0; k < chain.size(); ++k) EXPECT_EQ(chain[k], p.xis()[k]);
    }
}

TEST(LevelParams, NamedViolations) {
    EXPECT_NE(expect_admissibility_message(0.5, {0.2, 0.3}).find("xi_1 > 0"), std::string::npos);
    EXPECT_NE(expect_admissibility_message(1.2, {0.0, 1.0}).find("0 < rho <= 1"), std::string::npos);
    EXPECT_NE(expect_admissibility_message(0.5, {-0.1, 1.0}).find("nu_1 >= 0"), std::string::npos);
    EXPECT_NE(expect_admissibility_message(0.5, {0.6, 0.5}).find("rho + r_1 <= 1"), std::string::npos);
    EXPECT_NE(expect_admissibility_message(0.5, {0.5, 1.5}).find("rho + r_2 <= 2"), std::string::npos);
    EXPECT_NE(expect_admissibility_message(0.5, {0.2, 0.5, 0.2}).find("xi_1 > 0"), std::string::npos);
    // boundary cases are admissible
    EXPECT_NO_THROW(LevelParams(1.0, {0.0, 0.5}));
    EXPECT_NO_THROW(LevelParams(0.5, {0.5, 0.5}));
    // the reduced operators live on the closure
    EXPECT_THROW(LevelParams(0.5, {0.0, 1.0}), AdmissibilityError);
    EXPECT_NO_THROW(LevelParams(0.5, {0.0, 1.0}, Admissibility::closure));
    EXPECT_THROW(LevelParams(0.5, {0.0, 0.2}, Admissibility::closure), AdmissibilityError);
}

TEST(LevelDerivative, ReducesToRiemannLiouville) {
    auto f = MonomialSum::monomial(1.0, 2.0);
    EXPECT_LE(relative_discrepancy(lfd_composed(f, riemann_liouville_params(0.5)), rl_derivative(f, 0.5)), 1e-14);
}

TEST(LevelDerivative, ReducesToCaputo) {
    auto f = parse_monomials("t^2 + 7");
    EXPECT_LE(relative_discrepancy(lfd_composed(f, caputo_params(0.5)), caputo_derivative(f, 0.5)), 1e-14);
}

TEST(LevelDerivative, ReductionWeb) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        double rho = uniform(rng, 0.05, 0.95), type = uniform(rng, 0.0, 1.0);
        std::vector<Monomial> v;
        for (int j = 0; j < 4; ++j) v.push_back({uniform(rng, -2, 2), uniform(rng, 0.0, 4.0)});
        v.push_back({uniform(rng, -2, 2), rho - 1.0});
        MonomialSum f(std::move(v));
        auto g = f + MonomialSum::constant(1.5);
        EXPECT_LE(relative_discrepancy(lfd_composed(f, riemann_liouville_params(rho)), rl_derivative(f, rho)), 1e-12);
        EXPECT_LE(relative_discrepancy(lfd_composed(g - MonomialSum::monomial(g.coeff_of(rho - 1.0), rho - 1.0),
                                                    caputo_params(rho)),
                                       caputo_derivative(g - MonomialSum::monomial(g.coeff_of(rho - 1.0), rho - 1.0),
                                                         rho)),
                  1e-12);
        // Hilfer type mu maps f through J^{(1-mu)(1-rho)}; keep exponents where that stays integrable
        MonomialSum h(std::vector<Monomial>(f.terms().begin(), f.terms().end() - 0));
        auto lhs = lfd_composed(f - MonomialSum::monomial(f.coeff_of(rho - 1.0), rho - 1.0), hilfer_params(rho, type));
        auto rhs = hilfer_derivative(f - MonomialSum::monomial(f.coeff_of(rho - 1.0), rho - 1.0), rho, type);
        EXPECT_LE(relative_discrepancy(lhs, rhs), 1e-12);
    }
}

TEST(LevelDerivative, KernelElementsAreAnnihilated) {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        auto p = random_level_params(rng, 2);
        // strict admissibility gives nu_2 < 1 and rho + nu_1 + nu_2 > 1
        auto a = lfd_composed(MonomialSum::monomial(1.0, p.xi(1) - 1.0), p);
        auto b = lfd_composed(MonomialSum::monomial(1.0, p.rho() + p.nu(1) - 1.0), p);
        EXPECT_LE(a.max_abs_coeff(), 1e-13);
        EXPECT_LE(b.max_abs_coeff(), 1e-13);
    }
    // nu_2 = 1: t^{rho + nu_1 - 1} survives and only the first kernel element remains
    LevelParams p(0.5, {0.25, 1.0}, Admissibility::closure);
    EXPECT_LE(lfd_composed(MonomialSum::monomial(1.0, p.xi(1) - 1.0), p).max_abs_coeff(), 1e-14);
    EXPECT_GT(lfd_composed(MonomialSum::monomial(1.0, p.rho() + p.nu(1) - 1.0 + 1e-9), p).max_abs_coeff(), 0.0);
}

TEST(LevelDerivative, ComposedAgreesWithOracle) {
    Rng rng(23);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        auto p = random_level_params(rng, i % 2 ? 3 : 2);
        Terms f;
        for (int j = 0; j < 4; ++j) f.push_back({uniform(rng, -2, 2), uniform(rng, p.xi(1) - 1.0 + 1e-3, 4.0)});
        auto expect = oracle_composed(f, p.rho(), nus_of(p));
        if (!expect) continue;
        ++checked;
        EXPECT_LE(relative_discrepancy(lfd_composed(to_sum(f), p), to_sum(*expect)), 1e-12);
    }
    EXPECT_GT(checked, 100);
}

TEST(LevelDerivative, TwoLevelRepresentationExample) {
    LevelParams p(0.5, {0.2, 0.4});
    auto f = parse_monomials("t^0.9 + 2*t^2");
    EXPECT_LE(relative_discrepancy(lfd_rl_form(f, p), lfd_composed(f, p)), 1e-12);
    auto expect = oracle_two_level(from_sum(f), 0.5, 0.2, 0.4);
    ASSERT_TRUE(expect);
    EXPECT_LE(relative_discrepancy(lfd_rl_form(f, p), to_sum(*expect)), 1e-12);
}

TEST(LevelDerivative, TwoLevelRepresentationMatchesClosedForm) {
    Rng rng(29);
    for (int i = 0; i < 200; ++i) {
        auto p = random_level_params(rng, 2);
        auto f = random_monomial_sum(rng, p);
        auto expect = oracle_two_level(from_sum(f), p.rho(), p.nu(1), p.nu(2));
        ASSERT_TRUE(expect);
        EXPECT_LE(relative_discrepancy(lfd_rl_form(f, p), to_sum(*expect)), 1e-11);
    }
}

TEST(LevelDerivative, EquivalenceForThreeLevels) {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        auto p = random_level_params(rng, 3);
        auto sq = MonomialSum::monomial(1.0, 2.0);
        EXPECT_LE(relative_discrepancy(lfd_rl_form(sq, p), lfd_composed(sq, p)), 1e-12);
        auto f = random_monomial_sum(rng, p);
        EXPECT_LE(relative_discrepancy(lfd_rl_form(f, p), lfd_composed(f, p)), 1e-11);
    }
}

TEST(LevelDerivative, RiemannLiouvilleCorrectionIsAnnihilated) {
    auto p = riemann_liouville_params(0.4);
    auto f = parse_monomials("t^-0.6 + t^1.5");
    auto c = lfd_corrections(lfd_boundary_constants(f, p), p);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_NEAR(c.terms()[0].alpha, -0.6, 1e-14);
    EXPECT_LE(relative_discrepancy(lfd_rl_form(f, p), rl_derivative(f, 0.4)), 1e-13);
}

TEST(BoundaryConstants, Examples) {
    LevelParams p(0.5, {0.2, 0.4});
    const double xi1 = p.xi(1);
    auto k = lfd_boundary_constants(MonomialSum::monomial(1.0, xi1 - 1.0), p);
    EXPECT_NEAR(k[1], std::tgamma(xi1), 1e-12 * std::tgamma(xi1));
    EXPECT_NEAR(k[2], 0.0, 1e-14);
    EXPECT_TRUE(lfd_boundary_constants(MonomialSum::monomial(1.0, 2.0), p).vanish());
    // t^{rho+nu1-1}/Gamma(rho+nu1) contributes exactly 1 to the second constant
    auto g = MonomialSum::monomial(1.0, xi1 - 1.0) + MonomialSum::monomial(1.0 / std::tgamma(0.7), -0.3);
    auto c = lfd_boundary_constants(g, p);
    EXPECT_NEAR(c[2], 1.0, 1e-13);
    EXPECT_NEAR(c[1], std::tgamma(xi1), 1e-12 * std::tgamma(xi1));
}

TEST(BoundaryConstants, DivergenceIsReported) {
    LevelParams p(0.5, {0.2, 0.4});
    // J^{0.4} d/dt J^{0.9} t^{-0.5} = c t^{-0.2}: no finite second constant
    auto c = lfd_boundary_constants(MonomialSum::monomial(1.0, -0.5), p);
    EXPECT_TRUE(std::isfinite(c[1]));
    EXPECT_FALSE(c.finite());
    EXPECT_TRUE(std::isinf(c[2]));
    EXPECT_THROW(lfd_rl_form(MonomialSum::monomial(1.0, -0.5), p), DomainError);
}

TEST(FundamentalTheorem, SquareHasNoCorrections) {
    Rng rng(37);
    for (int i = 0; i < 100; ++i) {
        auto p = random_level_params(rng, i % 2 ? 3 : 2);
        auto r = fundamental_check(MonomialSum::monomial(1.0, 2.0), p);
        EXPECT_TRUE(r.vanishing_class);
        EXPECT_LE(r.max_discrepancy(), 1e-12);
    }
}

TEST(FundamentalTheorem, CorrectedIdentityOnRandomInputs) {
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        auto p = random_level_params(rng, i % 2 ? 3 : 2);
        auto f = random_monomial_sum(rng, p);
        EXPECT_LE(fundamental_check(f, p).corrected_discrepancy, 1e-11);
    }
}

TEST(FundamentalTheorem, VanishingClassReducesToRiemannLiouville) {
    LevelParams p(0.5, {0.2, 0.4});
    auto f = rl_integral(MonomialSum::monomial(1.0, 1.0), p.xi(1));
    EXPECT_LE(relative_discrepancy(lfd_composed(f, p), rl_derivative(f, 0.5)), 1e-13);
    auto r = fundamental_check(f, p);
    EXPECT_TRUE(r.vanishing_class);
    EXPECT_LE(r.left_inverse_discrepancy, 1e-13);
    EXPECT_LE(r.right_inverse_discrepancy, 1e-13);
}

TEST(FundamentalTheorem, KernelElementIsFlagged) {
    LevelParams p(0.5, {0.2, 0.4});
    auto r = fundamental_check(MonomialSum::monomial(1.0, p.xi(1) - 1.0), p);
    EXPECT_FALSE(r.vanishing_class);
    EXPECT_GT(r.left_inverse_discrepancy, 0.5);
    EXPECT_LE(r.corrected_discrepancy, 1e-13);
}

TEST(LevelDerivativeGrid, SquareMatchesSymbolic) {
    LevelParams p(0.5, {0.2, 0.4});
    auto f = MonomialSum::monomial(1.0, 2.0);
    auto d = lfd_grid(sample([&](double t) { return eval(f, t); }, 1.0, 2049), p);
    auto oracle = lfd_rl_form(f, p);
    for (std::size_t i = 0; i < d.size(); ++i) {
        double t = d.node(i);
        if (t >= 0.1) { EXPECT_NEAR(d[i] / eval(oracle, t), 1.0, 1e-3) << t; }
    }
}

TEST(LevelDerivativeGrid, KernelElementMapsToZero) {
    LevelParams p(0.5, {0.2, 0.4});
    const double e = p.xi(1) - 1.0;
    auto d = lfd_grid(sample([&](double t) { return std::pow(t, e); }, 1.0, 2049), p);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.node(i) >= 0.2) { EXPECT_LE(std::abs(d[i]), 5e-2); }
}

TEST(LevelDerivativeGrid, CaputoOfConstantVanishes) {
    auto d = lfd_grid(sample([](double) { return 3.0; }, 1.0, 2049), caputo_params(0.5));
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.node(i) >= 0.1) { EXPECT_LE(std::abs(d[i]), 1e-3); }
}

double grid_vs_symbolic(const MonomialSum& f, const LevelParams& p) {
    auto oracle = lfd_rl_form(f, p);
    auto d = lfd_grid(sample([&](double t) { return t > 0.0 ? eval(f, t) : INFINITY; }, 1.0, 2049), p);
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double t = d.node(i);
        if (t < 0.1) continue;
        scale = std::max(scale, std::abs(eval(oracle, t)));
        err = std::max(err, std::abs(d[i] - eval(oracle, t)));
    }
    return err / scale;
}

TEST(LevelDerivativeGrid, SecondBoundaryTerm) {
    // t^{rho+nu1-1} carries the second constant
    EXPECT_LE(grid_vs_symbolic(parse_monomials("t^-0.1 + t^1.5"), LevelParams(0.6, {0.3, 0.5})), 1e-3);
}

TEST(LevelDerivativeGrid, FirstBoundaryTerm) {
    EXPECT_LE(grid_vs_symbolic(parse_monomials("2*t^-0.6 + t^1.5"), LevelParams(0.6, {0.3, 0.5})), 1e-3);
}

TEST(LevelDerivativeGrid, UnresolvableSingularMixtureIsReported) {
    // two singular powers defeat the single power-law fit at the origin
    EXPECT_THROW(grid_vs_symbolic(parse_monomials("2*t^-0.6 + t^-0.1 + t^1.5"), LevelParams(0.6, {0.3, 0.5})),
                 NumericalFailure);
}

TEST(LevelDerivativeGrid, ThreeLevels) {
    LevelParams p(0.5, {0.3, 0.6, 0.9});
    auto f = MonomialSum::monomial(1.0, 2.0);
    auto d = lfd_grid(sample([&](double t) { return eval(f, t); }, 1.0, 2049), p);
    auto oracle = lfd_rl_form(f, p);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.node(i) >= 0.1) { EXPECT_NEAR(d[i] / eval(oracle, d.node(i)), 1.0, 1e-3); }
    EXPECT_THROW(lfd_grid(sample([](double t) { return t; }, 1.0, 2049), LevelParams(0.5, {0.3, 0.6, 0.9, 0.95})),
                 UsageError);
}

TEST(Laplace, SquareAtTwo) {
    LevelParams p(0.5, {0.2, 0.4});
    std::vector<double> s{2.0};
    EXPECT_LE(laplace_spot_check(MonomialSum::monomial(1.0, 2.0), p, s).max_rel_discrepancy(), 1e-6);
}

TEST(Laplace, KernelElementTransformsToZero) {
    LevelParams p(0.5, {0.2, 0.4});
    std::vector<double> s{1.0};
    auto r = laplace_spot_check(MonomialSum::monomial(1.0, p.xi(1) - 1.0), p, s);
    ASSERT_EQ(r.samples.size(), 1u);
    EXPECT_NEAR(r.samples[0].numeric, 0.0, 1e-12);
    EXPECT_NEAR(r.samples[0].formula, 0.0, 1e-12);
}

TEST(Laplace, RandomInputs) {
    Rng rng(43);
    std::vector<double> s{0.5, 1.0, 3.0};
    for (int i = 0; i < 20; ++i) {
        auto p = random_level_params(rng, 2);
        auto f = random_monomial_sum(rng, p, 3);
        EXPECT_LE(laplace_spot_check(f, p, s).max_rel_discrepancy(), 1e-6);
    }
}

TEST(Laplace, RejectsNonPositiveS) {
    LevelParams p(0.5, {0.2, 0.4});
    std::vector<double> s{0.0};
    EXPECT_THROW(laplace_spot_check(MonomialSum::monomial(1.0, 2.0), p, s), DomainError);
    EXPECT_THROW(laplace_spot_check(MonomialSum::monomial(1.0, 2.0), LevelParams(0.5, {0.3, 0.6, 0.9}), s),
                 UsageError);
}
