#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "charpic/config.hpp"
#include "charpic/linear_solver.hpp"
#include "charpic/nonlinear_solver.hpp"
#include "charpic/run.hpp"
#include "charpic/verification.hpp"

namespace py = pybind11;
using namespace charpic;

namespace {

expr::VarSet varset_from(const std::vector<std::string>& names) {
    expr::VarSet s;
    for (const auto& n : names) {
        auto v = expr::var_from_name(n);
        if (!v) throw UnknownVariable(0, n);
        s.allowed[static_cast<std::size_t>(*v)] = true;
    }
    return s;
}

double eval_expr(const std::string& src, const std::map<std::string, double>& bindings) {
    std::vector<std::string> names;
    for (const auto& kv : bindings) names.push_back(kv.first);
    expr::ExprAst ast = expr::parse(src, varset_from(names));
    expr::Bindings b;
    for (const auto& kv : bindings) b[*expr::var_from_name(kv.first)] = kv.second;
    return ast.evaluate(b);
}

std::string pretty_print(const std::string& src) {
    return expr::parse(src, expr::VarSet::all()).pretty_print();
}

std::pair<double, double> lipschitz(const std::string& src,
                                    const std::map<std::string, std::pair<double, double>>& box,
                                    int density) {
    expr::ExprAst ast = expr::parse(src, expr::VarSet::all());
    expr::LipschitzBox lb;
    auto put = [&](const char* k, std::array<double, 2>& dst) {
        auto it = box.find(k);
        if (it != box.end()) dst = {it->second.first, it->second.second};
    };
    put("u", lb.u_range);
    put("p", lb.p_range);
    put("q", lb.q_range);
    put("x", lb.x_range);
    put("y", lb.y_range);
    lb = expr::estimate_lipschitz(ast, lb, density);
    return {lb.lipschitz, lb.sup_f};
}

py::dict classify_json(const std::string& geometry_json) {
    nlohmann::json doc;
    doc["geometry"] = nlohmann::json::parse(geometry_json);
    RunConfig cfg = RunConfig::from_json(doc);
    Configuration c = classify_configuration(cfg.make_curves());
    py::dict out;
    out["case"] = to_string(c.kind);
    out["margin"] = c.margin;
    return out;
}

// Writes the config next to the outputs, runs the subcommand in-process, and
// returns (exit_code, report_json_text).
std::pair<int, std::string> run_json(const std::string& subcommand, const std::string& config_json,
                                     const std::string& out_dir) {
    nlohmann::json doc = nlohmann::json::parse(config_json);
    std::filesystem::create_directories(out_dir);
    std::string cfg_path = out_dir + "/config.json";
    {
        std::ofstream out(cfg_path);
        out << doc.dump(2) << '\n';
    }
    RunOptions opts;
    opts.config_path = cfg_path;
    opts.out_dir = out_dir;
    int code = run_subcommand(subcommand, opts);
    std::ifstream in(out_dir + "/report.json");
    std::string report((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return {code, report};
}

py::dict demo_summary(const std::string& geometry_json, int n, double tol, int max_iter) {
    nlohmann::json doc;
    doc["geometry"] = nlohmann::json::parse(geometry_json);
    RunConfig cfg = RunConfig::from_json(doc);
    Region region = cfg.make_region();
    GridSpecPtr grid = GridSpec::for_region(region, n, n);
    QuadratureRule rule = QuadratureRule::for_grid(grid->hx(), grid->hy());
    NonuniquenessDemo demo = demo_nonuniqueness(region, grid, rule, tol, max_iter);
    py::dict out;
    out["u_zero_sup"] = sup_abs(demo.u_zero);
    out["u_theta_sup"] = sup_abs(demo.u_theta);
    out["min_interior_oac"] = demo.positivity.min_interior_oac;
    out["min_bands_123"] = demo.positivity.min_bands_123;
    out["iterations"] = demo.state_theta.n;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Picard schemes for u_xy = f(x, y, u, u_x, u_y) with mixed boundary data";

    m.def("eval_expr", &eval_expr, py::arg("src"), py::arg("bindings"),
          "Evaluate a DSL expression with the given variable bindings.");
    m.def("pretty_print", &pretty_print, py::arg("src"),
          "Parse a DSL expression and return its canonical form.");
    m.def("estimate_lipschitz", &lipschitz, py::arg("src"), py::arg("box"),
          py::arg("density") = 24,
          "Estimate (L, sup|f|) of f(x,y,u,p,q) over a box of variable ranges.");
    m.def("classify", &classify_json, py::arg("geometry_json"),
          "Classify a curve configuration as StableCaseI / UnstableCaseII / Degenerate.");
    m.def("bessel_series", &bessel_series, py::arg("z"), py::arg("n_terms"),
          "Partial sum of sum z^n/(n!)^2 (= I0(2 sqrt z) in the limit).");
    m.def("run", &run_json, py::arg("subcommand"), py::arg("config_json"), py::arg("out_dir"),
          "Run a CLI subcommand in-process; returns (exit_code, report_json).");
    m.def("demo_nonuniqueness", &demo_summary, py::arg("geometry_json"), py::arg("n") = 65,
          py::arg("tol") = 1e-12, py::arg("max_iter") = 30,
          "Zero-data non-uniqueness demonstration; returns positivity summary.");

#ifdef CHARPIC_VERSION
    m.attr("__version__") = CHARPIC_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
