#ifndef FRACLEVEL_SPECTRAL_HPP
#define FRACLEVEL_SPECTRAL_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fraclevel/errors.hpp"
#include "fraclevel/quadrature.hpp"

// Eigensystem of -X'' on [0,1] with X(1) = 0, X'(0) = X'(1):
//   X_0 = 2(1-x), X_1k = 4(1-x)cos(l x), X_2k = 4 sin(l x), l = 2 pi k,
// and its biorthogonal partner
//   Y_0 = 1, Y_1k = cos(l x), Y_2k = x sin(l x),
// which satisfies Y'(0) = 0 and Y(0) = Y(1).
// X_1k is an associated function: X_1k'' = -l^2 X_1k + 2 l X_2k.

namespace fraclevel {

enum class EigenKind { Zero, One, Two };

struct EigenIndex {
    EigenKind kind = EigenKind::Zero;
    int k = 0;

    static EigenIndex zero() { return {EigenKind::Zero, 0}; }
    static EigenIndex one(int k) { return checked({EigenKind::One, k}); }
    static EigenIndex two(int k) { return checked({EigenKind::Two, k}); }

    static EigenIndex checked(EigenIndex i) {
        if (i.kind != EigenKind::Zero && i.k < 1) throw UsageError("eigen index k must be >= 1");
        return i;
    }
    bool operator==(const EigenIndex&) const = default;
};

/// Frequency 2 pi k of the kth pair; the diffusion eigenvalue is its square.
inline double eigenvalue(int k) {
    if (k < 1) throw UsageError("eigenvalue index must be >= 1");
    return 2.0 * std::numbers::pi * k;
}

namespace detail {

inline void check_unit(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw UsageError("x must lie in [0, 1]");
}

inline double freq(const EigenIndex& i) {
    EigenIndex::checked(i);
    return i.kind == EigenKind::Zero ? 0.0 : eigenvalue(i.k);
}

} // namespace detail

/// X and its first two derivatives (order 0, 1, 2).
inline double eval_X(const EigenIndex& i, double x, int order = 0) {
    detail::check_unit(x);
    const double l = detail::freq(i);
    switch (i.kind) {
    case EigenKind::Zero:
        return order == 0 ? 2.0 * (1.0 - x) : order == 1 ? -2.0 : 0.0;
    case EigenKind::One: {
        const double c = std::cos(l * x), s = std::sin(l * x);
        if (order == 0) return 4.0 * (1.0 - x) * c;
        if (order == 1) return -4.0 * c - 4.0 * l * (1.0 - x) * s;
        return 8.0 * l * s - 4.0 * l * l * (1.0 - x) * c;
    }
    case EigenKind::Two: {
        if (order == 0) return 4.0 * std::sin(l * x);
        if (order == 1) return 4.0 * l * std::cos(l * x);
        return -4.0 * l * l * std::sin(l * x);
    }
    }
    return 0.0;
}

inline double eval_Y(const EigenIndex& i, double x, int order = 0) {
    detail::check_unit(x);
    const double l = detail::freq(i);
    switch (i.kind) {
    case EigenKind::Zero:
        return order == 0 ? 1.0 : 0.0;
    case EigenKind::One:
        if (order == 0) return std::cos(l * x);
        if (order == 1) return -l * std::sin(l * x);
        return -l * l * std::cos(l * x);
    case EigenKind::Two: {
        const double c = std::cos(l * x), s = std::sin(l * x);
        if (order == 0) return x * s;
        if (order == 1) return s + l * x * c;
        return 2.0 * l * c - l * l * x * s;
    }
    }
    return 0.0;
}

/// int_0^1 X_ix Y_iy by Gauss-Legendre with the given number of nodes.
inline double inner(const EigenIndex& ix, const EigenIndex& iy, std::size_t order = 64) {
    const auto& rule = gauss_legendre(order);
    double s = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
        s += rule.weights[j] * eval_X(ix, rule.nodes[j]) * eval_Y(iy, rule.nodes[j]);
    return s;
}

struct SpectralCoeffs {
    double a0 = 0.0;
    std::vector<double> a1, a2; // a1[k-1], a2[k-1]

    SpectralCoeffs() = default;
    explicit SpectralCoeffs(std::size_t K) : a1(K, 0.0), a2(K, 0.0) {
        if (K < 1) throw UsageError("truncation order K must be >= 1");
    }
    std::size_t K() const { return a1.size(); }

    double operator[](const EigenIndex& i) const {
        if (i.kind == EigenKind::Zero) return a0;
        const auto& v = i.kind == EigenKind::One ? a1 : a2;
        return v.at(static_cast<std::size_t>(i.k - 1));
    }
    double& operator[](const EigenIndex& i) {
        if (i.kind == EigenKind::Zero) return a0;
        auto& v = i.kind == EigenKind::One ? a1 : a2;
        return v.at(static_cast<std::size_t>(i.k - 1));
    }
    void validate() const {
        if (a1.size() != a2.size() || a1.empty()) throw UsageError("coefficient lists must have equal length K >= 1");
        if (!std::isfinite(a0)) throw DomainError("non-finite spectral coefficient");
        for (std::size_t i = 0; i < a1.size(); ++i)
            if (!std::isfinite(a1[i]) || !std::isfinite(a2[i])) throw DomainError("non-finite spectral coefficient");
    }
};

/// Node count used by project for truncation K.
inline std::size_t projection_order(std::size_t K) { return std::max<std::size_t>(64, 16 * K + 64); }

/// Coefficients g_j = int_0^1 g Y_j, j = 0, 1k, 2k for k <= K.
inline SpectralCoeffs project(const std::function<double(double)>& g, std::size_t K, std::size_t order = 0) {
    SpectralCoeffs c(K);
    const auto& rule = gauss_legendre(order ? order : projection_order(K));
    std::vector<double> wg(rule.nodes.size());
    for (std::size_t j = 0; j < wg.size(); ++j) {
        double v = g(rule.nodes[j]);
        if (!std::isfinite(v)) throw DomainError("projected function is not finite at x = " + std::to_string(rule.nodes[j]));
        wg[j] = rule.weights[j] * v;
    }
    for (std::size_t j = 0; j < wg.size(); ++j) c.a0 += wg[j];
    for (std::size_t k = 1; k <= K; ++k) {
        const double l = eigenvalue(static_cast<int>(k));
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t j = 0; j < wg.size(); ++j) {
            const double x = rule.nodes[j];
            s1 += wg[j] * std::cos(l * x);
            s2 += wg[j] * x * std::sin(l * x);
        }
        c.a1[k - 1] = s1;
        c.a2[k - 1] = s2;
    }
    return c;
}

/// Truncated series sum a_j X_j(x), or its first or second x-derivative.
inline double reconstruct(const SpectralCoeffs& c, double x, int order = 0) {
    double s = c.a0 * eval_X(EigenIndex::zero(), x, order);
    for (std::size_t k = 1; k <= c.K(); ++k) {
        const int ki = static_cast<int>(k);
        if (c.a1[k - 1] != 0.0) s += c.a1[k - 1] * eval_X({EigenKind::One, ki}, x, order);
        if (c.a2[k - 1] != 0.0) s += c.a2[k - 1] * eval_X({EigenKind::Two, ki}, x, order);
    }
    return s;
}

// ------------------------------------------------------------------- CSV

inline std::string coeffs_to_csv(const SpectralCoeffs& c) {
    std::string out = "kind,k,value\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "0,0,%.17g\n", c.a0);
    out += buf;
    for (std::size_t k = 1; k <= c.K(); ++k) {
        std::snprintf(buf, sizeof buf, "1,%zu,%.17g\n", k, c.a1[k - 1]);
        out += buf;
    }
    for (std::size_t k = 1; k <= c.K(); ++k) {
        std::snprintf(buf, sizeof buf, "2,%zu,%.17g\n", k, c.a2[k - 1]);
        out += buf;
    }
    return out;
}

/// Parses `kind,k,value` rows; K is the largest index seen.
inline SpectralCoeffs coeffs_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    struct Row { int kind, k; double v; };
    std::vector<Row> rows;
    int K = 0;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.rfind("kind", 0) == 0) continue;
        Row r{};
        char tail = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf %c", &r.kind, &r.k, &r.v, &tail) != 3 || r.kind < 0 || r.kind > 2 ||
            (r.kind != 0 && r.k < 1))
            throw UsageError("malformed coefficient row " + std::to_string(lineno) + ": " + line);
        K = std::max(K, r.k);
        rows.push_back(r);
    }
    if (K < 1) throw UsageError("coefficient file has no k >= 1 rows");
    SpectralCoeffs c(static_cast<std::size_t>(K));
    for (const auto& r : rows) {
        EigenIndex i{static_cast<EigenKind>(r.kind), r.k};
        c[i] = r.v;
    }
    c.validate();
    return c;
}

inline SpectralCoeffs read_coeffs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return coeffs_from_csv(ss.str());
}

} // namespace fraclevel

#endif
