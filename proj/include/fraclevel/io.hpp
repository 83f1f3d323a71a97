#ifndef FRACLEVEL_IO_HPP
#define FRACLEVEL_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "fraclevel/errors.hpp"
#include "fraclevel/inverse_solver.hpp"
#include "fraclevel/level_derivative.hpp"
#include "fraclevel/power_calculus.hpp"
#include "fraclevel/spectral.hpp"

namespace fraclevel {

using json = nlohmann::ordered_json;

/// JSON number, or the strings "inf", "-inf", "nan" for non-finite values.
inline json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes a temporary sibling and renames it over path.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw UsageError("write failed for " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Comma separated reals, e.g. "0.3,0.2".
inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("not a number: '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw UsageError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

inline Admissibility parse_admissibility(const std::string& s) {
    if (s == "strict") return Admissibility::strict;
    if (s == "closure") return Admissibility::closure;
    throw UsageError("admissibility must be 'strict' or 'closure'");
}

// ------------------------------------------------------------ tabulated data

/// Two-column CSV (header optional), sorted by the first column.
inline std::vector<std::pair<double, double>> read_xy_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<std::pair<double, double>> rows;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        double a, b;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf %c", &a, &b, &tail) != 2) {
            if (rows.empty() && lineno == 1) continue; // header
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        rows.emplace_back(a, b);
    }
    if (rows.size() < 2) throw UsageError(path.string() + ": need at least two rows");
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first == rows[i - 1].first) throw UsageError(path.string() + ": repeated abscissa");
    return rows;
}

/// Piecewise linear interpolant of tabulated data; outside the table the end values are held.
inline std::function<double(double)> linear_interpolant(std::vector<std::pair<double, double>> rows) {
    return [rows = std::move(rows)](double x) {
        if (x <= rows.front().first) return rows.front().second;
        if (x >= rows.back().first) return rows.back().second;
        auto it = std::upper_bound(rows.begin(), rows.end(), x,
                                   [](double v, const std::pair<double, double>& r) { return v < r.first; });
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    };
}

// ------------------------------------------------------------------- specs

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
}

/// A spatial function: a number, a monomial string in x, {"csv": path} or
/// {"spectral": {"a0": .., "a1": [..], "a2": [..]}}.
inline SpatialData spatial_from_json(const json& j, const std::filesystem::path& base) {
    if (j.is_null()) return SpatialData::zero();
    if (j.is_number()) {
        double c = j.get<double>();
        return c == 0.0 ? SpatialData::zero() : SpatialData::function([c](double) { return c; }, format_double(c));
    }
    if (j.is_string()) {
        auto f = parse_monomials(j.get<std::string>());
        for (const auto& m : f.terms())
            if (m.alpha < 0.0) throw UsageError("spatial monomials need nonnegative exponents");
        return SpatialData::function([f](double x) { return eval(f, x); }, to_string(f, 'x'));
    }
    if (j.is_object() && j.contains("csv")) {
        auto rows = read_xy_csv(resolve(base, j.at("csv").get<std::string>()));
        return SpatialData::function(linear_interpolant(std::move(rows)), "csv");
    }
    if (j.is_object() && j.contains("spectral")) {
        const json& s = j.at("spectral");
        auto a1 = s.value("a1", std::vector<double>{});
        auto a2 = s.value("a2", std::vector<double>{});
        std::size_t K = std::max({a1.size(), a2.size(), std::size_t{1}});
        a1.resize(K, 0.0);
        a2.resize(K, 0.0);
        SpectralCoeffs c(K);
        c.a0 = s.value("a0", 0.0);
        c.a1 = std::move(a1);
        c.a2 = std::move(a2);
        return SpatialData::spectral(std::move(c));
    }
    throw UsageError("unrecognised function description: " + j.dump());
}

inline LevelParams level_params_from_json(const json& j) {
    auto mode = parse_admissibility(j.value("admissibility", std::string("strict")));
    std::vector<double> nus;
    if (j.contains("nus")) nus = j.at("nus").get<std::vector<double>>();
    else nus = {j.at("nu1").get<double>(), j.at("nu2").get<double>()};
    return LevelParams(j.at("rho").get<double>(), std::move(nus), mode);
}

inline InverseProblemSpec inverse_spec_from_json(const json& j, const std::filesystem::path& base) {
    try {
        InverseProblemSpec s;
        s.params = level_params_from_json(j);
        s.T = j.value("T", 1.0);
        s.K = j.value("K", std::size_t{8});
        s.n_t = j.value("n_t", std::size_t{1025});
        s.coupling = j.value("coupling", 1.0);
        s.phi = spatial_from_json(j.value("phi", json()), base);
        s.psi = spatial_from_json(j.value("psi", json()), base);
        if (!j.contains("final_data")) throw UsageError("inverse spec needs final_data");
        s.final_data = spatial_from_json(j.at("final_data"), base);
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed inverse spec: ") + e.what());
    }
}

inline json coeffs_json(const SpectralCoeffs& c) {
    return json{{"a0", json_number(c.a0)}, {"a1", c.a1}, {"a2", c.a2}};
}

inline json diagnostics_json(const InverseSolution& s) {
    const auto& d = s.diagnostics;
    json modes = json::array();
    modes.push_back({{"kind", 0}, {"k", 0}, {"phi", s.zero_mode.phi}, {"psi", s.zero_mode.psi},
                     {"final", s.final_data.a0}, {"source", s.zero_mode.source}});
    for (const auto& m : s.modes) {
        modes.push_back({{"kind", 1}, {"k", m.k}, {"phi", m.first.phi}, {"psi", m.first.psi},
                         {"final", m.final_first}, {"source", m.first.source}, {"denominator", m.denominator}});
        modes.push_back({{"kind", 2}, {"k", m.k}, {"phi", m.second.phi}, {"psi", m.second.psi},
                         {"final", m.final_second}, {"source", m.second.source},
                         {"coupling_at_T", m.coupling[m.coupling.size() - 1]}});
    }
    return json{{"rho", s.spec.params.rho()},
                {"nus", std::vector<double>(s.spec.params.nus().begin(), s.spec.params.nus().end())},
                {"T", s.spec.T},
                {"K", s.spec.K},
                {"n_t", s.spec.n_t},
                {"final_residual", json_number(d.final_residual)},
                {"pde_residual", json_number(d.pde_residual)},
                {"pde_scale", json_number(d.pde_scale)},
                {"boundary_value_residual", json_number(d.boundary_value_residual)},
                {"boundary_flux_residual", json_number(d.boundary_flux_residual)},
                {"initial_trace", json_number(d.initial_trace)},
                {"collocation_times", d.collocation_times},
                {"modes", modes}};
}

} // namespace fraclevel

#endif
