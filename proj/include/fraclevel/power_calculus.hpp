#ifndef FRACLEVEL_POWER_CALCULUS_HPP
#define FRACLEVEL_POWER_CALCULUS_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraclevel/errors.hpp"
#include "fraclevel/special_functions.hpp"

namespace fraclevel {

/// Exponents closer than this are treated as equal.
inline constexpr double exponent_tol = 1e-12;

/// c * t^alpha with alpha > -1 (locally integrable on [0, T]).
struct Monomial {
    double coeff = 0.0;
    double alpha = 0.0;
};

/// Finite sum of monomials, sorted by exponent, with near-equal exponents
/// merged and cancelled coefficients dropped.
class MonomialSum {
public:
    MonomialSum() = default;

    explicit MonomialSum(std::vector<Monomial> terms) : terms_(std::move(terms)) { normalize(); }

    MonomialSum(std::initializer_list<Monomial> terms) : terms_(terms) { normalize(); }

    static MonomialSum monomial(double coeff, double alpha) { return MonomialSum({{coeff, alpha}}); }

    static MonomialSum constant(double c) { return monomial(c, 0.0); }

    std::span<const Monomial> terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    /// Largest |coeff|; zero for the empty sum.
    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& m_ : terms_) m = std::max(m, std::abs(m_.coeff));
        return m;
    }

    /// Coefficient of t^alpha (0 when absent).
    double coeff_of(double alpha) const {
        for (const auto& m : terms_)
            if (std::abs(m.alpha - alpha) <= exponent_tol) return m.coeff;
        return 0.0;
    }

    friend MonomialSum operator+(const MonomialSum& a, const MonomialSum& b) {
        std::vector<Monomial> all(a.terms_);
        all.insert(all.end(), b.terms_.begin(), b.terms_.end());
        return MonomialSum(std::move(all));
    }

    friend MonomialSum operator-(const MonomialSum& a, const MonomialSum& b) { return a + (-1.0) * b; }

    friend MonomialSum operator*(double s, const MonomialSum& a) {
        std::vector<Monomial> out(a.terms_);
        for (auto& m : out) m.coeff *= s;
        return MonomialSum(std::move(out));
    }

private:
    void normalize() {
        for (const auto& m : terms_) {
            if (!std::isfinite(m.coeff) || !std::isfinite(m.alpha))
                throw DomainError("monomial with non-finite coefficient or exponent");
        }
        std::sort(terms_.begin(), terms_.end(),
                  [](const Monomial& x, const Monomial& y) { return x.alpha < y.alpha; });
        std::vector<Monomial> merged;
        std::size_t i = 0;
        while (i < terms_.size()) {
            double alpha = terms_[i].alpha;
            double sum = 0.0, comp = 0.0, scale = 0.0;
            std::size_t j = i;
            for (; j < terms_.size() && terms_[j].alpha - alpha <= exponent_tol; ++j) {
                // Kahan summation so exact cancellations stay exact.
                double y = terms_[j].coeff - comp;
                double t = sum + y;
                comp = (t - sum) - y;
                sum = t;
                scale = std::max(scale, std::abs(terms_[j].coeff));
            }
            if (std::abs(sum) > 64.0 * std::numeric_limits<double>::epsilon() * scale) {
                if (!(alpha > -1.0))
                    throw DomainError("exponent " + std::to_string(alpha) + " <= -1 is not locally integrable");
                merged.push_back({sum, alpha});
            }
            i = j;
        }
        terms_ = std::move(merged);
    }

    std::vector<Monomial> terms_;
};

namespace detail {

// J^order for order >= 0; order 0 is the identity.
inline MonomialSum integral_any(const MonomialSum& f, double order) {
    if (order < 0.0) throw DomainError("integral order must be nonnegative");
    if (order <= exponent_tol) return f;
    std::vector<Monomial> out;
    out.reserve(f.size());
    for (const auto& m : f.terms())
        out.push_back({m.coeff * gamma_fn(m.alpha + 1.0) * rgamma(m.alpha + order + 1.0), m.alpha + order});
    return MonomialSum(std::move(out));
}

// Riemann-Liouville derivative for order in (0, 1]; order 1 is d/dt.
inline MonomialSum derivative_any(const MonomialSum& f, double order) {
    if (!(order > 0.0) || order > 1.0 + exponent_tol) throw DomainError("derivative order must lie in (0, 1]");
    std::vector<Monomial> out;
    out.reserve(f.size());
    for (const auto& m : f.terms()) {
        if (std::abs(m.alpha - (order - 1.0)) <= exponent_tol) continue; // kernel element
        double a = m.alpha - order;
        if (a <= -1.0)
            throw DomainError("derivative of t^" + std::to_string(m.alpha) + " of order " + std::to_string(order) +
                              " leaves the integrable class");
        out.push_back({m.coeff * gamma_fn(m.alpha + 1.0) * rgamma(a + 1.0), a});
    }
    return MonomialSum(std::move(out));
}

} // namespace detail

/// Riemann-Liouville integral of order rho > 0.
inline MonomialSum rl_integral(const MonomialSum& f, double rho) {
    if (!(rho > 0.0)) throw DomainError("rl_integral: order must be positive");
    return detail::integral_any(f, rho);
}

/// Riemann-Liouville derivative of order rho in (0, 1).
inline MonomialSum rl_derivative(const MonomialSum& f, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rl_derivative: order must lie in (0, 1)");
    return detail::derivative_any(f, rho);
}

/// Classical derivative; constants vanish.
inline MonomialSum derivative(const MonomialSum& f) {
    std::vector<Monomial> out;
    for (const auto& m : f.terms()) {
        if (std::abs(m.alpha) <= exponent_tol) continue;
        if (m.alpha < 0.0)
            throw DomainError("d/dt of t^" + std::to_string(m.alpha) + " leaves the integrable class");
        out.push_back({m.coeff * m.alpha, m.alpha - 1.0});
    }
    return MonomialSum(std::move(out));
}

/// Caputo derivative of order rho in (0, 1). Needs f absolutely continuous,
/// so negative exponents are rejected.
inline MonomialSum caputo_derivative(const MonomialSum& f, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("caputo_derivative: order must lie in (0, 1)");
    std::vector<Monomial> rest;
    for (const auto& m : f.terms()) {
        if (m.alpha < -exponent_tol) throw DomainError("caputo_derivative: negative exponent");
        if (std::abs(m.alpha) > exponent_tol) rest.push_back(m);
    }
    return detail::derivative_any(MonomialSum(std::move(rest)), rho);
}

/// Hilfer derivative J^{nu(1-rho)} d/dt J^{(1-rho)(1-nu)}.
inline MonomialSum hilfer_derivative(const MonomialSum& f, double rho, double nu) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("hilfer_derivative: order must lie in (0, 1)");
    if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("hilfer_derivative: type must lie in [0, 1]");
    MonomialSum g = detail::integral_any(f, (1.0 - rho) * (1.0 - nu));
    return detail::integral_any(derivative(g), nu * (1.0 - rho));
}

/// Pointwise value; t = 0 with a negative exponent is an error.
inline double eval(const MonomialSum& f, double t) {
    if (!(t >= 0.0)) throw DomainError("eval: t must be nonnegative");
    double s = 0.0;
    for (const auto& m : f.terms()) {
        if (t == 0.0) {
            if (m.alpha < -exponent_tol) throw DomainError("eval: singular at t = 0");
            if (std::abs(m.alpha) <= exponent_tol) s += m.coeff;
            continue;
        }
        s += m.coeff * std::pow(t, m.alpha);
    }
    return s;
}

/// lim_{t->0+} f(t): finite, or +-inf when the leading term is singular.
inline double limit_at_origin(const MonomialSum& f) {
    if (f.empty()) return 0.0;
    const Monomial& lead = f.terms().front();
    if (lead.alpha < -exponent_tol) return std::copysign(std::numeric_limits<double>::infinity(), lead.coeff);
    return f.coeff_of(0.0);
}

/// max |coefficient difference| / max |coefficient|, aligning exponents
/// without any cancellation threshold.
inline double relative_discrepancy(const MonomialSum& a, const MonomialSum& b) {
    std::vector<Monomial> all;
    for (const auto& m : a.terms()) all.push_back(m);
    for (const auto& m : b.terms()) all.push_back({-m.coeff, m.alpha});
    std::sort(all.begin(), all.end(), [](const Monomial& x, const Monomial& y) { return x.alpha < y.alpha; });
    double scale = std::max(a.max_abs_coeff(), b.max_abs_coeff());
    double worst = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        double s = 0.0;
        std::size_t j = i;
        for (; j < all.size() && all[j].alpha - all[i].alpha <= exponent_tol; ++j) s += all[j].coeff;
        worst = std::max(worst, std::abs(s));
        i = j;
    }
    if (scale == 0.0) return 0.0;
    return worst / scale;
}

// ---------------------------------------------------------------- text form

/// "c1*t^a1 + c2*t^a2" with 17 significant digits.
inline std::string to_string(const MonomialSum& f, char var = 't') {
    if (f.empty()) return "0";
    std::string out;
    char buf[64];
    bool first = true;
    for (const auto& m : f.terms()) {
        double c = m.coeff;
        if (first) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        std::snprintf(buf, sizeof buf, "%.17g", std::abs(c));
        out += buf;
        out += "*";
        out += var;
        std::snprintf(buf, sizeof buf, "^%.17g", m.alpha);
        out += buf;
        first = false;
    }
    return out;
}

namespace detail {

class MonomialParser {
public:
    explicit MonomialParser(std::string_view s) : s_(s) {}

    MonomialSum parse() {
        std::vector<Monomial> terms;
        skip();
        if (at_end()) throw UsageError("empty power-sum expression");
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') sign = (get() == '-') ? -1.0 : 1.0;
        terms.push_back(term(sign));
        while (true) {
            skip();
            if (at_end()) break;
            char op = get();
            if (op != '+' && op != '-') fail("expected '+' or '-'");
            terms.push_back(term(op == '-' ? -1.0 : 1.0));
        }
        return MonomialSum(std::move(terms));
    }

private:
    Monomial term(double sign) {
        skip();
        double c = 1.0;
        bool have_number = false;
        if (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
            c = number();
            have_number = true;
            skip();
            if (at_end() || peek() != '*') return {sign * c, 0.0};
            ++pos_;
            skip();
        }
        if (at_end() || (peek() != 't' && peek() != 'x')) {
            if (have_number) fail("expected variable after '*'");
            fail("expected number or variable");
        }
        ++pos_;
        skip();
        double a = 1.0;
        if (!at_end() && peek() == '^') {
            ++pos_;
            skip();
            bool paren = !at_end() && peek() == '(';
            if (paren) ++pos_;
            skip();
            double es = 1.0;
            if (!at_end() && (peek() == '-' || peek() == '+')) es = get() == '-' ? -1.0 : 1.0;
            skip();
            a = es * number();
            skip();
            if (paren) {
                if (at_end() || get() != ')') fail("expected ')'");
            }
        }
        return {sign * c, a};
    }

    double number() {
        const char* b = s_.data() + pos_;
        const char* e = s_.data() + s_.size();
        double v = 0.0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p == b) fail("malformed number");
        pos_ += static_cast<std::size_t>(p - b);
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw UsageError("cannot parse power sum '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " +
                         msg);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char get() { return s_[pos_++]; }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Inverse of to_string. The variable may be written t or x.
inline MonomialSum parse_monomials(std::string_view text) { return detail::MonomialParser(text).parse(); }

} // namespace fraclevel

#endif
