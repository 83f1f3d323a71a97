#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <mpfr.h>

#include "fraclevel/mittag_leffler.hpp"

using namespace fraclevel;

namespace {

// Power series summed with 1024-bit MPFR arithmetic; usable while
// |z|^(1/rho) stays moderate.
double series_oracle(double rho, double nu, double z) {
    mpfr_t sum, term, arg, g, zp;
    mpfr_inits2(1024, sum, term, arg, g, zp, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_zero(sum, 1);
    mpfr_set_ui(zp, 1, MPFR_RNDN);
    for (int k = 0; k < 4000; ++k) {
        mpfr_set_d(arg, rho, MPFR_RNDN);
        mpfr_mul_si(arg, arg, k, MPFR_RNDN);
        mpfr_add_d(arg, arg, nu, MPFR_RNDN);
        mpfr_gamma(g, arg, MPFR_RNDN);
        mpfr_div(term, zp, g, MPFR_RNDN);
        mpfr_add(sum, sum, term, MPFR_RNDN);
        if (k > 20 && mpfr_get_exp(term) < mpfr_get_exp(sum) - 80 && mpfr_get_exp(term) < -80) break;
        mpfr_mul_d(zp, zp, z, MPFR_RNDN);
    }
    double r = mpfr_get_d(sum, MPFR_RNDN);
    mpfr_clears(sum, term, arg, g, zp, static_cast<mpfr_ptr>(nullptr));
    return r;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(MittagLeffler, ValueAtOrigin) {
    for (double nu : {0.3, 1.0, 1.7, 2.5})
        EXPECT_NEAR(ml_eval(0.6, nu, 0.0), 1.0 / std::tgamma(nu), 1e-15);
}

TEST(MittagLeffler, ClassicalSpecialCases) {
    EXPECT_NEAR(ml_eval(1.0, 1.0, 1.0), std::exp(1.0), 1e-15);
    EXPECT_LE(rel(ml_eval(1.0, 1.0, -30.0), std::exp(-30.0)), 1e-12);
    EXPECT_NEAR(ml_eval(2.0, 1.0, -4.0), std::cos(2.0), 1e-14);
    EXPECT_NEAR(ml_eval(2.0, 2.0, -9.0), std::sin(3.0) / 3.0, 1e-14);
    EXPECT_LE(rel(ml_eval(2.0, 1.0, 4.0), std::cosh(2.0)), 1e-14);
    EXPECT_LE(rel(ml_eval(1.0, 2.0, 2.0), (std::exp(2.0) - 1.0) / 2.0), 1e-14);
}

TEST(MittagLeffler, HalfOrderMatchesErfc) {
    for (double x : {0.1, 0.5, 1.0, 3.0, 7.0, 15.0, 25.0}) {
        double expect = std::exp(x * x) * std::erfc(x);
        EXPECT_LE(rel(ml_eval(0.5, 1.0, -x), expect), 1e-12) << x;
    }
}

TEST(MittagLeffler, AgreesWithSeriesOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> urho(0.1, 2.0), unu(0.2, 3.0), uz(-6.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        double rho = urho(rng), nu = unu(rng), z = uz(rng);
        if (std::pow(std::abs(z), 1.0 / rho) > 200.0) continue; // series needs too many terms
        double a = ml_eval(rho, nu, z), b = series_oracle(rho, nu, z);
        EXPECT_LE(std::abs(a - b), 1e-11 * std::max(1.0, std::abs(b))) << rho << " " << nu << " " << z;
    }
}

TEST(MittagLeffler, LargeNegativeArgumentAsymptotics) {
    // E_{rho,nu}(-x) ~ sum_k (-1)^{k+1} x^{-k} / Gamma(nu - rho k)
    for (double rho : {0.3, 0.7, 0.95}) {
        double nu = 1.2, x = 1e6;
        double expect = 1.0 / (x * std::tgamma(nu - rho)) - 1.0 / (x * x * std::tgamma(nu - 2 * rho));
        EXPECT_LE(rel(ml_eval(rho, nu, -x), expect), 1e-10) << rho;
    }
}

TEST(MittagLeffler, Recurrence) {
    // E_{rho,nu}(z) = 1/Gamma(nu) + z E_{rho,nu+rho}(z)
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> urho(0.2, 1.0), unu(0.3, 2.5), uz(-80.0, 0.0);
    for (int i = 0; i < 200; ++i) {
        double rho = urho(rng), nu = unu(rng), z = uz(rng);
        double lhs = ml_eval(rho, nu, z);
        double rhs = 1.0 / std::tgamma(nu) + z * ml_eval(rho, nu + rho, z);
        EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::max(1.0, std::abs(lhs))) << rho << " " << nu << " " << z;
    }
}

TEST(MittagLeffler, CompletelyMonotoneOnNegativeAxis) {
    for (double rho : {0.25, 0.5, 0.8, 1.0}) {
        double prev = ml_eval(rho, 1.0, 0.0);
        for (double x = 0.25; x <= 100.0; x += 0.25) {
            double v = ml_eval(rho, 1.0, -x);
            EXPECT_GT(v, 0.0) << rho << " " << x;
            EXPECT_LE(v, prev) << rho << " " << x;
            prev = v;
        }
    }
}

TEST(MittagLeffler, RangeErrors) {
    EXPECT_THROW(ml_eval(0.0, 1.0, -1.0), DomainError);
    EXPECT_THROW(ml_eval(2.5, 1.0, -1.0), DomainError);
    EXPECT_THROW(ml_eval(0.5, 1.0, -1e9), DomainError);
    EXPECT_THROW(ml_eval(0.5, NAN, -1.0), DomainError);
    EXPECT_THROW(ml_eval(0.5, 1.0, NAN), DomainError);
}

TEST(MittagLeffler, PositiveOverflowIsReported) {
    EXPECT_THROW(ml_eval(0.1, 1.0, 1e4), NumericalFailure);
}

TEST(MittagLefflerKernel, ReducesToExponential) {
    auto k = ml_kernel(1.0, 1.0, 1.0, 2.0, 201);
    for (std::size_t i = 0; i < k.size(); ++i) EXPECT_NEAR(k[i], std::exp(-k.node(i)), 1e-14);
}

TEST(MittagLefflerKernel, ZeroDecayIsPower) {
    auto k = ml_kernel(0.7, 1.6, 0.0, 1.0, 65);
    for (std::size_t i = 0; i < k.size(); ++i)
        EXPECT_NEAR(k[i], std::pow(k.node(i), 0.6) / std::tgamma(1.6), 1e-15);
    EXPECT_TRUE(ml_kernel(0.7, 0.5, 1.0, 1.0, 65).singular_at_origin());
}

TEST(MittagLefflerKernel, HalfOrderAtOne) {
    auto k = ml_kernel(0.5, 1.0, 1.0, 1.0, 33);
    EXPECT_LE(rel(k[32], std::exp(1.0) * std::erfc(1.0)), 1e-13);
}

TEST(MittagLefflerKernel, ConvolutionMomentsIntegrateKernel) {
    // one * w_nu = t^nu E_{rho,nu+1}(-l t^rho)
    const double rho = 0.6, nu = 0.8, l2 = 4.0;
    auto one = sample([](double) { return 1.0; }, 1.0, 129);
    auto c = convolve(one, ml_convolution_kernel(rho, nu, l2, 1.0, 129));
    for (std::size_t i = 1; i < c.size(); ++i) {
        double t = c.node(i);
        EXPECT_NEAR(c[i], std::pow(t, nu) * ml_eval(rho, nu + 1.0, -l2 * std::pow(t, rho)), 1e-13);
    }
}
