// Command line front end: operator evaluation, self-checks, Mittag-Leffler
// values and the inverse source solver.
//
// Exit codes: 0 success, 1 a verification ran but failed its tolerance,
// 2 invalid input, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraclevel/fraclevel.hpp"

namespace fs = std::filesystem;
using namespace fraclevel;

namespace {

constexpr int exit_ok = 0, exit_check_failed = 1, exit_invalid = 2, exit_numerical = 3;

// Report destination: stdout or an atomically written file.
void emit(const std::string& text, const std::string& out) {
    if (out.empty()) std::cout << text;
    else atomic_write(out, text);
}

int report(const json& j, const std::string& out) {
    emit(j.dump(2) + "\n", out);
    return j.value("passed", true) ? exit_ok : exit_check_failed;
}

LevelParams make_params(double rho, const std::string& nus, const std::string& mode) {
    return LevelParams(rho, parse_list(nus), parse_admissibility(mode));
}

GridFn read_grid(const std::string& path) {
    std::istringstream in(read_file(path));
    return read_csv(in);
}

std::string grid_csv(const GridFn& g) {
    std::ostringstream os;
    write_csv(os, g);
    return os.str();
}

// ------------------------------------------------------------------ ml

struct MlArgs {
    double rho = 1.0, nu = 1.0, z = 0.0;
    std::string batch, out;
    MlOptions opt;
};

int run_ml(const MlArgs& a) {
    if (a.batch.empty()) {
        std::printf("%.16g\n", ml_eval(a.rho, a.nu, a.z, a.opt));
        return exit_ok;
    }
    // rows: rho,nu,z
    std::istringstream in(read_file(a.batch));
    std::string line, out = "rho,nu,z,value\n";
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        double r, n, z;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf %c", &r, &n, &z, &tail) != 3) {
            if (lineno == 1) continue; // header
            throw UsageError(a.batch + ":" + std::to_string(lineno) + ": expected rho,nu,z");
        }
        out += format_double(r) + "," + format_double(n) + "," + format_double(z) + "," +
               format_double(ml_eval(r, n, z, a.opt)) + "\n";
    }
    emit(out, a.out);
    return exit_ok;
}

// ------------------------------------------------------------------ lfd

struct LfdArgs {
    double rho = 0.5;
    std::string nus = "0.25,0.5", mode = "strict", f, csv, out, spec, s_values = "0.5,1,2,4";
    std::size_t cases = 200;
    std::uint64_t seed = 20240601;
    double tol = 1e-11;
};

int run_lfd_eval(const LfdArgs& a) {
    auto p = make_params(a.rho, a.nus, a.mode);
    if (!a.csv.empty()) {
        emit(grid_csv(lfd_grid(read_grid(a.csv), p)), a.out);
        return exit_ok;
    }
    if (a.f.empty()) throw UsageError("lfd eval needs --f or --csv");
    auto f = parse_monomials(a.f);
    auto c = lfd_boundary_constants(f, p);
    json cs = json::array();
    for (double v : c.values) cs.push_back(json_number(v));
    json xi(std::vector<double>(p.xis().begin(), p.xis().end()));
    json j{{"rho", p.rho()}, {"nus", std::vector<double>(p.nus().begin(), p.nus().end())}, {"xi", xi},
           {"f", to_string(f)}, {"result", to_string(lfd_composed(f, p))}, {"boundary_constants", cs}};
    return report(j, a.out);
}

int run_lfd_equivalence(const LfdArgs& a) {
    if (a.f.empty()) {
        SuiteOptions o;
        o.cases = a.cases;
        o.seed = a.seed;
        o.tol = a.tol;
        return report(suite_equivalence(o), a.out);
    }
    auto p = make_params(a.rho, a.nus, a.mode);
    auto f = parse_monomials(a.f);
    auto lhs = lfd_composed(f, p), rhs = lfd_rl_form(f, p);
    double d = relative_discrepancy(lhs, rhs);
    return report({{"f", to_string(f)}, {"composed", to_string(lhs)}, {"rl_form", to_string(rhs)},
                   {"max_discrepancy", d}, {"tolerance", a.tol}, {"passed", d <= a.tol}},
                  a.out);
}

int run_lfd_reductions(const LfdArgs& a, bool rho_given) {
    SuiteOptions o;
    o.cases = a.cases;
    o.seed = a.seed;
    o.tol = a.tol;
    if (rho_given) o.rho = a.rho;
    return report(suite_reductions(o), a.out);
}

json laplace_json(const MonomialSum& f, const LevelParams& p, const std::vector<double>& s, double tol) {
    auto r = laplace_spot_check(f, p, s);
    json rows = json::array();
    for (const auto& x : r.samples)
        rows.push_back({{"s", x.s}, {"numeric", x.numeric}, {"formula", x.formula},
                        {"quadrature_error", x.quad_error}, {"rel_discrepancy", x.rel_discrepancy}});
    return {{"f", to_string(f)}, {"samples", rows}, {"max_discrepancy", r.max_rel_discrepancy()},
            {"tolerance", tol}, {"passed", r.max_rel_discrepancy() <= tol}};
}

int run_lfd_laplace(const LfdArgs& a) {
    if (a.f.empty()) throw UsageError("lfd laplace-check needs --f");
    auto p = make_params(a.rho, a.nus, a.mode);
    return report(laplace_json(parse_monomials(a.f), p, parse_list(a.s_values), a.tol), a.out);
}

// Run spec: {"rho", "nus", "admissibility", "f": string | {"csv": path},
//            "checks": ["equivalence", "fundamental", "laplace", "grid"], "s_values": [...]}
int run_lfd_spec(const LfdArgs& a) {
    json j;
    try {
        j = json::parse(read_file(a.spec));
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("spec is not valid JSON: ") + e.what());
    }
    const fs::path base = fs::path(a.spec).parent_path();
    auto p = level_params_from_json(j);
    json out{{"rho", p.rho()}, {"nus", std::vector<double>(p.nus().begin(), p.nus().end())}};
    bool passed = true;
    const double tol = j.value("tolerance", a.tol);
    const json& fj = j.at("f");
    if (fj.is_object() && fj.contains("csv")) {
        auto g = read_grid(resolve(base, fj.at("csv").get<std::string>()).string());
        auto d = lfd_grid(g, p);
        out["grid_result"] = d.samples;
        out["t_max"] = d.t_max;
    } else {
        auto f = parse_monomials(fj.get<std::string>());
        out["f"] = to_string(f);
        out["result"] = to_string(lfd_composed(f, p));
        for (const auto& c : j.value("checks", std::vector<std::string>{})) {
            if (c == "equivalence") {
                double d = relative_discrepancy(lfd_composed(f, p), lfd_rl_form(f, p));
                out["equivalence"] = {{"max_discrepancy", d}, {"passed", d <= tol}};
                passed = passed && d <= tol;
            } else if (c == "fundamental") {
                auto r = fundamental_check(f, p);
                out["fundamental"] = {{"corrected_discrepancy", r.corrected_discrepancy},
                                      {"vanishing_class", r.vanishing_class},
                                      {"left_inverse_discrepancy", json_number(r.left_inverse_discrepancy)},
                                      {"right_inverse_discrepancy", json_number(r.right_inverse_discrepancy)},
                                      {"passed", r.max_discrepancy() <= tol}};
                passed = passed && r.max_discrepancy() <= tol;
            } else if (c == "laplace") {
                auto s = j.value("s_values", std::vector<double>{0.5, 1.0, 2.0, 4.0});
                out["laplace"] = laplace_json(f, p, s, j.value("laplace_tolerance", 1e-6));
                passed = passed && out["laplace"]["passed"].get<bool>();
            } else {
                throw UsageError("unknown check '" + c + "'");
            }
        }
    }
    out["passed"] = passed;
    return report(out, a.out);
}

// ------------------------------------------------------------- verify

int run_verify(const std::string& suite, const SuiteOptions& o, const std::string& out) {
    if (suite == "semigroup") return report(suite_semigroup(o), out);
    if (suite == "fundamental") return report(suite_fundamental(o), out);
    if (suite == "biorthogonality") return report(suite_biorthogonality(), out);
    if (suite == "reductions") return report(suite_reductions(o), out);
    if (suite == "equivalence") return report(suite_equivalence(o), out);
    throw UsageError("unknown suite '" + suite + "'");
}

// ------------------------------------------------------------ inverse

int run_inverse(const std::string& spec_path, const std::string& prefix) {
    json j;
    try {
        j = json::parse(read_file(spec_path));
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("spec is not valid JSON: ") + e.what());
    }
    auto spec = inverse_spec_from_json(j, fs::path(spec_path).parent_path());
    auto sol = solve(spec);

    std::string src = "x,source\n";
    for (int i = 0; i <= 200; ++i) {
        double x = i / 200.0;
        src += format_double(x) + "," + format_double(sol.source_at(x)) + "\n";
    }
    std::string state = "x,t,u\n";
    const std::size_t steps = std::min<std::size_t>(50, spec.n_t - 1);
    for (std::size_t s = 1; s <= steps; ++s) {
        std::size_t node = sol.node_of(spec.T * static_cast<double>(s) / static_cast<double>(steps));
        double t = spec.T * static_cast<double>(node) / static_cast<double>(spec.n_t - 1);
        for (int i = 0; i <= 50; ++i) {
            double x = i / 50.0;
            state += format_double(x) + "," + format_double(t) + "," + format_double(sol.state_at_node(x, node)) + "\n";
        }
    }
    json diag = diagnostics_json(sol);
    atomic_write(prefix + "_source.csv", src);
    atomic_write(prefix + "_state.csv", state);
    atomic_write(prefix + "_diagnostics.json", diag.dump(2) + "\n");
    std::printf("final_residual %.3g pde_residual %.3g source f0 %.10g\n", sol.diagnostics.final_residual,
                sol.diagnostics.pde_residual, sol.source.a0);
    return exit_ok;
}

// -------------------------------------------------------- convergence

int run_convergence(const std::string& op, double alpha, double rho, const std::string& nus, const std::string& grids,
                    const std::string& out) {
    auto ns = parse_list(grids);
    auto f = MonomialSum::monomial(1.0, alpha);
    std::function<GridFn(const GridFn&)> apply;
    MonomialSum exact;
    if (op == "J") {
        exact = rl_integral(f, rho);
        apply = [&](const GridFn& g) { return rl_integral_grid(g, rho); };
    } else if (op == "D") {
        exact = rl_derivative(f, rho);
        apply = [&](const GridFn& g) { return rl_derivative_grid(g, rho); };
    } else if (op == "lfd") {
        auto p = std::make_shared<LevelParams>(make_params(rho, nus, "strict"));
        exact = lfd_rl_form(f, *p);
        apply = [p](const GridFn& g) { return lfd_grid(g, *p); };
    } else {
        throw UsageError("--op must be J, D or lfd");
    }
    // J is compared on the whole grid; derivatives away from the origin
    const double t_min = op == "J" ? 0.0 : 0.1;
    json rows = json::array();
    double prev = 0.0;
    for (double nd : ns) {
        if (!(nd >= 9) || nd != std::floor(nd)) throw UsageError("grid sizes must be integers >= 9");
        auto n = static_cast<std::size_t>(nd);
        auto g = sample([&](double t) { return eval(f, t); }, 1.0, n);
        auto r = apply(g);
        double err = 0.0;
        for (std::size_t i = 1; i < n; ++i)
            if (r.node(i) >= t_min) err = std::max(err, std::abs(r[i] - eval(exact, r.node(i))));
        json row{{"n", n}, {"error", err}};
        if (prev > 0.0 && err > 0.0) row["observed_order"] = std::log2(prev / err);
        rows.push_back(row);
        prev = err;
    }
    return report({{"op", op}, {"alpha", alpha}, {"rho", rho}, {"rows", rows}}, out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclevel: level fractional derivatives, Mittag-Leffler functions and an inverse source solver"};
    app.require_subcommand(1);

    // ml
    MlArgs ml;
    auto* ml_cmd = app.add_subcommand("ml", "Evaluate E_{rho,nu}(z)");
    ml_cmd->add_option("--rho", ml.rho, "rho > 0");
    ml_cmd->add_option("--nu", ml.nu, "nu > 0");
    ml_cmd->add_option("--z", ml.z, "argument");
    ml_cmd->add_option("--batch", ml.batch, "CSV of rho,nu,z rows")->check(CLI::ExistingFile);
    ml_cmd->add_option("--out", ml.out, "output CSV for --batch");
    ml_cmd->add_option("--z-switch", ml.opt.z_switch, "series/asymptotic switch")->capture_default_str();
    ml_cmd->add_option("--rel-target", ml.opt.rel_target, "relative accuracy target")->capture_default_str();

    // lfd
    LfdArgs lfd;
    bool rho_given = false;
    auto* lfd_cmd = app.add_subcommand("lfd", "Level fractional derivative tools");
    lfd_cmd->require_subcommand(1);
    auto add_params = [&](CLI::App* c) {
        c->add_option("--rho", lfd.rho, "order rho in (0,1]")->each([&](const std::string&) { rho_given = true; });
        c->add_option("--nus", lfd.nus, "comma separated level parameters")->capture_default_str();
        c->add_option("--admissibility", lfd.mode, "strict or closure")->capture_default_str();
        c->add_option("--out", lfd.out, "output file");
        c->add_option("--tol", lfd.tol, "tolerance")->capture_default_str();
    };
    auto* eval_cmd = lfd_cmd->add_subcommand("eval", "Apply the derivative to a power sum or sampled CSV");
    add_params(eval_cmd);
    eval_cmd->add_option("--f", lfd.f, "power sum, e.g. \"t^2 + 3*t^0.5\"");
    eval_cmd->add_option("--csv", lfd.csv, "uniform grid CSV with header t,value")->check(CLI::ExistingFile);
    auto* eq_cmd = lfd_cmd->add_subcommand("verify-equivalence", "Composed form against the RL form");
    add_params(eq_cmd);
    eq_cmd->add_option("--f", lfd.f, "single power sum (random cases when absent)");
    eq_cmd->add_option("--cases", lfd.cases)->capture_default_str();
    eq_cmd->add_option("--seed", lfd.seed)->capture_default_str();
    auto* red_cmd = lfd_cmd->add_subcommand("verify-reductions", "RL, Caputo and Hilfer special cases");
    add_params(red_cmd);
    red_cmd->add_option("--cases", lfd.cases)->capture_default_str();
    red_cmd->add_option("--seed", lfd.seed)->capture_default_str();
    auto* lap_cmd = lfd_cmd->add_subcommand("laplace-check", "Laplace transform spot check (two levels)");
    add_params(lap_cmd);
    lap_cmd->add_option("--f", lfd.f, "power sum")->required();
    lap_cmd->add_option("--s", lfd.s_values, "comma separated s > 0")->capture_default_str();
    auto* run_cmd = lfd_cmd->add_subcommand("run", "Run a JSON spec");
    run_cmd->add_option("--spec", lfd.spec, "spec JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", lfd.out, "report file");

    // verify
    std::string suite, verify_out;
    SuiteOptions so;
    double verify_rho = 0.0;
    auto* ver_cmd = app.add_subcommand("verify", "Self-check suites");
    ver_cmd->add_option("--suite", suite, "semigroup | fundamental | biorthogonality | reductions | equivalence")
        ->required();
    auto* vr = ver_cmd->add_option("--rho", verify_rho, "fix rho (reductions)");
    ver_cmd->add_option("--cases", so.cases)->capture_default_str();
    ver_cmd->add_option("--seed", so.seed)->capture_default_str();
    ver_cmd->add_option("--tol", so.tol)->capture_default_str();
    ver_cmd->add_option("--out", verify_out, "report file");

    // inverse
    std::string inv_spec, inv_prefix;
    auto* inv_cmd = app.add_subcommand("inverse", "Inverse source problem");
    inv_cmd->require_subcommand(1);
    auto* solve_cmd = inv_cmd->add_subcommand("solve", "Recover the source from final data");
    solve_cmd->add_option("--spec", inv_spec, "spec JSON")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--out-prefix", inv_prefix, "prefix for _source.csv, _state.csv, _diagnostics.json")
        ->required();

    // convergence
    std::string conv_op = "J", conv_grids = "129,257,513,1025,2049,4097", conv_nus = "0.25,0.5", conv_out;
    double conv_alpha = 1.5, conv_rho = 0.5;
    auto* conv_cmd = app.add_subcommand("convergence", "Grid error against the power-sum oracle on t^alpha");
    conv_cmd->add_option("--op", conv_op, "J | D | lfd")->capture_default_str();
    conv_cmd->add_option("--alpha", conv_alpha)->capture_default_str();
    conv_cmd->add_option("--rho", conv_rho)->capture_default_str();
    conv_cmd->add_option("--nus", conv_nus, "level parameters for --op lfd")->capture_default_str();
    conv_cmd->add_option("--grids", conv_grids)->capture_default_str();
    conv_cmd->add_option("--out", conv_out, "report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    }

    try {
        if (*ml_cmd) return run_ml(ml);
        if (*eval_cmd) return run_lfd_eval(lfd);
        if (*eq_cmd) return run_lfd_equivalence(lfd);
        if (*red_cmd) {
            if (!eq_cmd->count("--tol") && !red_cmd->count("--tol")) lfd.tol = 1e-12;
            return run_lfd_reductions(lfd, rho_given);
        }
        if (*lap_cmd) {
            if (!lap_cmd->count("--tol")) lfd.tol = 1e-6;
            return run_lfd_laplace(lfd);
        }
        if (*run_cmd) return run_lfd_spec(lfd);
        if (*ver_cmd) {
            if (*vr) so.rho = verify_rho;
            if (!ver_cmd->count("--tol") && suite == "reductions") so.tol = 1e-12;
            return run_verify(suite, so, verify_out);
        }
        if (*solve_cmd) return run_inverse(inv_spec, inv_prefix);
        if (*conv_cmd) return run_convergence(conv_op, conv_alpha, conv_rho, conv_nus, conv_grids, conv_out);
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_invalid;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: malformed JSON input: %s\n", e.what());
        return exit_invalid;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_invalid;
    }
    return exit_ok;
}
