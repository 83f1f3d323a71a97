#ifndef FRACLEVEL_DETAIL_MP_GAMMA_HPP
#define FRACLEVEL_DETAIL_MP_GAMMA_HPP

#include <gmp.h>
#include <mpfr.h>

#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fraclevel/detail/mpfr_real.hpp"

namespace fraclevel::detail {

// Exact Bernoulli numbers B_0..B_n (B_1 = -1/2), grown on demand.
class BernoulliTable {
public:
    ~BernoulliTable() {
        for (auto& q : b_) mpq_clear(q.v);
    }

    // Copies B_{2j} into out at the precision of out.
    void even(std::size_t j, mpfr_ptr out) {
        std::lock_guard<std::mutex> lock(mu_);
        grow(2 * j);
        mpfr_set_q(out, b_[2 * j].v, MPFR_RNDN);
    }

    static BernoulliTable& instance() {
        static BernoulliTable t;
        return t;
    }

private:
    void grow(std::size_t n) {
        mpz_t binom;
        mpz_init(binom);
        mpq_t acc, term;
        mpq_init(acc);
        mpq_init(term);
        while (b_.size() <= n) {
            std::size_t m = b_.size();
            b_.emplace_back();
            mpq_init(b_.back().v);
            if (m == 0) {
                mpq_set_ui(b_.back().v, 1, 1);
                continue;
            }
            // B_m = -1/(m+1) sum_{k<m} C(m+1, k) B_k
            mpq_set_ui(acc, 0, 1);
            for (std::size_t k = 0; k < m; ++k) {
                if (k > 1 && (k % 2)) continue;
                mpz_bin_uiui(binom, m + 1, k);
                mpq_set_z(term, binom);
                mpq_mul(term, term, b_[k].v);
                mpq_add(acc, acc, term);
            }
            mpq_set_si(term, -1, static_cast<unsigned long>(m + 1));
            mpq_mul(b_.back().v, acc, term);
        }
        mpq_clear(acc);
        mpq_clear(term);
        mpz_clear(binom);
    }

    struct Rational {
        mpq_t v;
    };
    std::mutex mu_;
    std::deque<Rational> b_; // deque: elements never relocate
};

// Stirling coefficients B_{2j} / (2j (2j-1)) at a given precision, followed
// by ln(2 pi)/2 as the last entry.
struct StirlingTable {
    std::vector<MpReal> coef;
    MpReal half_log_two_pi;
};

inline std::shared_ptr<const StirlingTable> stirling_table(mpfr_prec_t bits, std::size_t count) {
    static std::mutex mu;
    static std::map<long, std::shared_ptr<const StirlingTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(static_cast<long>(bits));
    if (it != cache.end() && it->second->coef.size() >= count) return it->second;
    auto t = std::make_shared<StirlingTable>(StirlingTable{{}, MpReal(bits)});
    for (std::size_t j = 1; j <= count; ++j) {
        MpReal c(bits);
        BernoulliTable::instance().even(j, c.get());
        mpfr_div_ui(c.get(), c.get(), static_cast<unsigned long>(2 * j * (2 * j - 1)), MPFR_RNDN);
        t->coef.push_back(std::move(c));
    }
    mpfr_const_pi(t->half_log_two_pi.get(), MPFR_RNDN);
    mpfr_mul_ui(t->half_log_two_pi.get(), t->half_log_two_pi.get(), 2, MPFR_RNDN);
    mpfr_log(t->half_log_two_pi.get(), t->half_log_two_pi.get(), MPFR_RNDN);
    mpfr_div_ui(t->half_log_two_pi.get(), t->half_log_two_pi.get(), 2, MPFR_RNDN);
    cache[static_cast<long>(bits)] = t;
    return t;
}

// out = 1/Gamma(a) for a > 0 at the precision of out.
inline void mp_rgamma_positive(mpfr_ptr out, mpfr_srcptr a) {
    const mpfr_prec_t bits = mpfr_get_prec(out) + 24;
    // Shift the argument up to A so the Stirling series converges to 2^-bits quickly.
    // The series error bottoms out near exp(-2 pi A).
    const double shift_to = 0.13 * static_cast<double>(bits) + 6.0;
    const std::size_t nterms = static_cast<std::size_t>(0.35 * static_cast<double>(bits)) + 12;
    auto table = stirling_table(bits, nterms);
    const auto& coef = table->coef;

    MpReal x(bits), prod(bits, 1.0), tmp(bits), lg(bits), inv2(bits), pw(bits);
    mpfr_set(x.get(), a, MPFR_RNDN);
    while (mpfr_cmp_d(x.get(), shift_to) < 0) {
        mpfr_mul(prod.get(), prod.get(), x.get(), MPFR_RNDN);
        mpfr_add_ui(x.get(), x.get(), 1, MPFR_RNDN);
    }
    // (x - 1/2) ln x - x + ln(2 pi)/2
    mpfr_log(lg.get(), x.get(), MPFR_RNDN);
    mpfr_sub_d(tmp.get(), x.get(), 0.5, MPFR_RNDN);
    mpfr_mul(lg.get(), lg.get(), tmp.get(), MPFR_RNDN);
    mpfr_sub(lg.get(), lg.get(), x.get(), MPFR_RNDN);
    mpfr_add(lg.get(), lg.get(), table->half_log_two_pi.get(), MPFR_RNDN);
    // + sum c_j / x^(2j-1)
    mpfr_ui_div(pw.get(), 1, x.get(), MPFR_RNDN);
    mpfr_sqr(inv2.get(), pw.get(), MPFR_RNDN);
    const long stop_exp = -static_cast<long>(bits) - 8;
    for (std::size_t j = 0; j < coef.size(); ++j) {
        mpfr_mul(tmp.get(), coef[j].get(), pw.get(), MPFR_RNDN);
        mpfr_add(lg.get(), lg.get(), tmp.get(), MPFR_RNDN);
        if (mpfr_zero_p(tmp.get()) || mpfr_get_exp(tmp.get()) < stop_exp) break;
        mpfr_mul(pw.get(), pw.get(), inv2.get(), MPFR_RNDN);
    }
    // 1/Gamma(a) = prod * exp(-lnGamma(a + m))
    mpfr_neg(lg.get(), lg.get(), MPFR_RNDN);
    mpfr_exp(lg.get(), lg.get(), MPFR_RNDN);
    mpfr_mul(out, lg.get(), prod.get(), MPFR_RNDN);
}

// out = 1/Gamma(a) for any real a (zero at the poles).
inline void mp_rgamma(mpfr_ptr out, mpfr_srcptr a) {
    if (mpfr_integer_p(a) && mpfr_sgn(a) <= 0) {
        mpfr_set_zero(out, 1);
        return;
    }
    if (mpfr_sgn(a) > 0 && mpfr_get_prec(out) <= 2048) {
        mp_rgamma_positive(out, a);
        return;
    }
    MpReal g(mpfr_get_prec(out) + 32);
    mpfr_gamma(g.get(), a, MPFR_RNDN);
    mpfr_ui_div(out, 1, g.get(), MPFR_RNDN);
}

} // namespace fraclevel::detail

#endif
