#ifndef CHARPIC_CONFIG_HPP
#define CHARPIC_CONFIG_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "charpic/boundary_data.hpp"
#include "charpic/geometry.hpp"

namespace charpic {

// Fully resolved run configuration. Unknown keys anywhere in the document are
// rejected; flag overrides use dotted paths into the same tree.
struct RunConfig {
    nlohmann::json geometry; // {"type":"affine"|"expr"|"sampled", ...}

    std::string phi_src = "0";
    std::string psi_src = "0";

    std::string theta_mode = "auto_linear"; // auto_linear|positive_demo|affine_iterated|explicit
    std::string theta_expr;

    std::string f_src = "0";

    int nx = 257;
    int ny = 257;

    int quad_n_outer = 64;
    int quad_n_inner_min = 2;

    double tol = 1e-10;
    int max_iter = 60;
    bool shrink = true;

    std::optional<double> lipschitz_L;
    std::array<double, 2> lip_box_u{-1.0, 1.0};
    std::array<double, 2> lip_box_p{-1.0, 1.0};
    std::array<double, 2> lip_box_q{-1.0, 1.0};
    int lipschitz_density = 24;

    std::vector<int> study_grids{65, 129, 257};
    std::string study_solver = "solve-linear";

    std::string out_dir = "out";
    int threads = 0;
    std::uint64_t seed = 0;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load(const std::string& path,
                          const std::vector<std::string>& overrides = {});

    nlohmann::json to_json() const;

    CurvePair make_curves() const;
    Region make_region() const;
    BoundaryData make_data(const CurvePair& curves) const;
    RhsFunction make_f() const;
};

// Applies "dotted.path=value" to a JSON document (value parsed as JSON when
// possible, else taken as a string).
void apply_override(nlohmann::json& doc, const std::string& spec);

} // namespace charpic

#endif
