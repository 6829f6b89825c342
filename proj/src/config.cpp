#include "charpic/config.hpp"

#include <fstream>
#include <set>

namespace charpic {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config section '" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key '" + where + "." + it.key() + "'");
}

double need_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ConfigError("config key '" + where + "." + key + "' must be a number");
    return obj[key].get<double>();
}

} // namespace

void apply_override(json& doc, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key.path=value: " + spec);
    std::string path = spec.substr(0, eq);
    std::string value = spec.substr(eq + 1);
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value; // plain string
    }
    json* cur = &doc;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) throw ConfigError("bad override path: " + path);
        if (dot == std::string::npos) {
            (*cur)[key] = parsed;
            return;
        }
        cur = &(*cur)[key];
        pos = dot + 1;
    }
}

RunConfig RunConfig::from_json(const json& doc) {
    reject_unknown(doc, {"geometry", "data", "theta", "f", "grid", "quad", "solver", "lipschitz",
                         "study", "output", "runtime", "seed"},
                   "config");
    RunConfig c;

    if (!doc.contains("geometry")) throw ConfigError("config requires a 'geometry' section");
    c.geometry = doc["geometry"];
    if (!c.geometry.contains("type") || !c.geometry["type"].is_string())
        throw ConfigError("geometry.type must be one of affine|expr|sampled");
    std::string type = c.geometry["type"];
    if (type == "affine")
        reject_unknown(c.geometry, {"type", "a_slope", "b_slope", "x_A"}, "geometry");
    else if (type == "expr")
        reject_unknown(c.geometry, {"type", "a", "b", "x_A"}, "geometry");
    else if (type == "sampled")
        reject_unknown(c.geometry, {"type", "a_points", "b_points"}, "geometry");
    else
        throw ConfigError("geometry.type must be one of affine|expr|sampled");

    if (doc.contains("data")) {
        reject_unknown(doc["data"], {"phi", "psi"}, "data");
        if (doc["data"].contains("phi")) c.phi_src = doc["data"]["phi"].get<std::string>();
        if (doc["data"].contains("psi")) c.psi_src = doc["data"]["psi"].get<std::string>();
    }
    if (doc.contains("theta")) {
        reject_unknown(doc["theta"], {"mode", "expr"}, "theta");
        if (doc["theta"].contains("mode")) c.theta_mode = doc["theta"]["mode"].get<std::string>();
        if (doc["theta"].contains("expr")) c.theta_expr = doc["theta"]["expr"].get<std::string>();
        static const std::set<std::string> modes{"auto_linear", "positive_demo", "affine_iterated",
                                                 "explicit"};
        if (!modes.count(c.theta_mode))
            throw ConfigError("theta.mode must be auto_linear|positive_demo|affine_iterated|explicit");
        if (c.theta_mode == "explicit" && c.theta_expr.empty())
            throw ConfigError("theta.mode 'explicit' requires theta.expr");
    }
    if (doc.contains("f")) {
        if (!doc["f"].is_string()) throw ConfigError("config key 'f' must be a DSL string");
        c.f_src = doc["f"].get<std::string>();
    }
    if (doc.contains("grid")) {
        reject_unknown(doc["grid"], {"nx", "ny"}, "grid");
        if (doc["grid"].contains("nx")) c.nx = doc["grid"]["nx"].get<int>();
        if (doc["grid"].contains("ny")) c.ny = doc["grid"]["ny"].get<int>();
        if (c.nx < 9 || c.ny < 9) throw ConfigError("grid.nx and grid.ny must be at least 9");
    }
    if (doc.contains("quad")) {
        reject_unknown(doc["quad"], {"n_outer", "n_inner_min"}, "quad");
        if (doc["quad"].contains("n_outer")) c.quad_n_outer = doc["quad"]["n_outer"].get<int>();
        if (doc["quad"].contains("n_inner_min"))
            c.quad_n_inner_min = doc["quad"]["n_inner_min"].get<int>();
    }
    if (doc.contains("solver")) {
        reject_unknown(doc["solver"], {"tol", "max_iter", "shrink"}, "solver");
        if (doc["solver"].contains("tol")) c.tol = need_number(doc["solver"], "tol", "solver");
        if (doc["solver"].contains("max_iter")) c.max_iter = doc["solver"]["max_iter"].get<int>();
        if (doc["solver"].contains("shrink")) c.shrink = doc["solver"]["shrink"].get<bool>();
        if (!(c.tol > 0.0)) throw ConfigError("solver.tol must be positive");
        if (c.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
    }
    if (doc.contains("lipschitz")) {
        reject_unknown(doc["lipschitz"], {"L", "box", "density"}, "lipschitz");
        if (doc["lipschitz"].contains("L") && !doc["lipschitz"]["L"].is_null())
            c.lipschitz_L = doc["lipschitz"]["L"].get<double>();
        if (doc["lipschitz"].contains("density"))
            c.lipschitz_density = doc["lipschitz"]["density"].get<int>();
        if (doc["lipschitz"].contains("box")) {
            const json& b = doc["lipschitz"]["box"];
            reject_unknown(b, {"u", "p", "q"}, "lipschitz.box");
            auto get_range = [&](const char* k, std::array<double, 2>& dst) {
                if (!b.contains(k)) return;
                auto v = b[k].get<std::vector<double>>();
                if (v.size() != 2 || !(v[0] < v[1]))
                    throw ConfigError(std::string("lipschitz.box.") + k +
                                      " must be [lo, hi] with lo < hi");
                dst = {v[0], v[1]};
            };
            get_range("u", c.lip_box_u);
            get_range("p", c.lip_box_p);
            get_range("q", c.lip_box_q);
        }
    }
    if (doc.contains("study")) {
        reject_unknown(doc["study"], {"grids", "solver"}, "study");
        if (doc["study"].contains("grids"))
            c.study_grids = doc["study"]["grids"].get<std::vector<int>>();
        if (doc["study"].contains("solver"))
            c.study_solver = doc["study"]["solver"].get<std::string>();
        if (c.study_grids.size() < 2) throw ConfigError("study.grids needs at least two sizes");
    }
    if (doc.contains("output")) {
        reject_unknown(doc["output"], {"dir"}, "output");
        if (doc["output"].contains("dir")) c.out_dir = doc["output"]["dir"].get<std::string>();
    }
    if (doc.contains("runtime")) {
        reject_unknown(doc["runtime"], {"threads"}, "runtime");
        if (doc["runtime"].contains("threads")) c.threads = doc["runtime"]["threads"].get<int>();
    }
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    return c;
}

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return from_json(doc);
}

json RunConfig::to_json() const {
    json doc;
    doc["geometry"] = geometry;
    doc["data"] = {{"phi", phi_src}, {"psi", psi_src}};
    doc["theta"] = {{"mode", theta_mode}, {"expr", theta_expr}};
    doc["f"] = f_src;
    doc["grid"] = {{"nx", nx}, {"ny", ny}};
    doc["quad"] = {{"n_outer", quad_n_outer}, {"n_inner_min", quad_n_inner_min}};
    doc["solver"] = {{"tol", tol}, {"max_iter", max_iter}, {"shrink", shrink}};
    doc["lipschitz"] = {{"L", lipschitz_L ? json(*lipschitz_L) : json(nullptr)},
                        {"density", lipschitz_density},
                        {"box",
                         {{"u", lip_box_u}, {"p", lip_box_p}, {"q", lip_box_q}}}};
    doc["study"] = {{"grids", study_grids}, {"solver", study_solver}};
    doc["output"] = {{"dir", out_dir}};
    doc["runtime"] = {{"threads", threads}};
    doc["seed"] = seed;
    return doc;
}

CurvePair RunConfig::make_curves() const {
    std::string type = geometry["type"];
    try {
        if (type == "affine") {
            return CurvePair::affine(need_number(geometry, "a_slope", "geometry"),
                                     need_number(geometry, "b_slope", "geometry"),
                                     need_number(geometry, "x_A", "geometry"));
        }
        if (type == "expr") {
            if (!geometry.contains("a") || !geometry.contains("b"))
                throw ConfigError("geometry with type 'expr' needs 'a' and 'b' DSL strings");
            return CurvePair::expression(geometry["a"].get<std::string>(),
                                         geometry["b"].get<std::string>(),
                                         need_number(geometry, "x_A", "geometry"));
        }
        auto pts = [&](const char* key) {
            if (!geometry.contains(key))
                throw ConfigError(std::string("geometry with type 'sampled' needs '") + key + "'");
            return geometry[key].get<std::vector<std::array<double, 2>>>();
        };
        return CurvePair::sampled(pts("a_points"), pts("b_points"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad geometry section: ") + e.what());
    }
}

Region RunConfig::make_region() const { return Region(make_curves()); }

BoundaryData RunConfig::make_data(const CurvePair& curves) const {
    return BoundaryData::from_expressions(phi_src, psi_src, curves.y_A(), curves.x_A());
}

RhsFunction RunConfig::make_f() const { return RhsFunction::from_expression(f_src); }

} // namespace charpic
