#ifndef CHARPIC_NONLINEAR_SOLVER_HPP
#define CHARPIC_NONLINEAR_SOLVER_HPP

#include <array>
#include <optional>
#include <vector>

#include "charpic/boundary_data.hpp"
#include "charpic/fields.hpp"
#include "charpic/sweep.hpp"

namespace charpic {

struct ContractionParams {
    double L = 0.0;
    double gamma = 0.0;
    double l = 0.0;     // x_A
    double h = 0.0;     // y_B
    double alpha = 0.0; // area(OAB)
    double mu = 0.0;    // L (2 gamma h + 2 l + h)

    bool contraction() const { return mu < 1.0; }

    static ContractionParams compute(double L, const Region& region);
};

struct NonlinearState {
    int n = 0;
    FieldTriple v;
    ThetaFunction theta = ThetaFunction::affine(0.0, 0.0, 0.0);
    std::vector<double> sigmas;                        // sigma_0 .. sigma_n
    std::vector<double> deltas;                        // ||v^k - v^{k-1}||, k = 1..n
    std::vector<std::array<double, 3>> component_deltas; // per-step sup diffs of u, p, q
};

// Zero-th iterate of the adaptive scheme: affine theta with slope
// sigma_0 = phi'(y_A) - a'(y_A) psi(x_A), u from the data integrals,
// p = psi(x), q from phi' / theta'.
NonlinearState base_step(const BoundaryData& data, const Region& region, GridSpecPtr grid);

// One sweep: update theta first, then (u, p, q) at every masked node with the
// previous triple frozen inside f.
NonlinearState iterate_step(NonlinearState state, const RhsFunction& f, const BoundaryData& data,
                            const Region& region, GridSpecPtr grid, const QuadratureRule& rule);

struct FixedPointReport {
    double max_defect_oac = 0.0; // u vs its integral identity on OAC probes
    double max_defect_abc = 0.0; // same on ABC probes
    double max_p_defect = 0.0;   // p vs centered D_x u
    double max_q_defect = 0.0;   // q vs centered D_y u, stencils clear of AC
    // Stencils straddling AC see the u_yy kink of the split solution (the
    // scheme is C^1 there, not C^2), so they are reported separately.
    double max_q_defect_ac = 0.0;
    int probes = 0;
};

// Evaluates the limit integral identities on a probe subgrid using the
// generic nested quadrature (an independent evaluation path from the sweep
// kernels), and compares p, q against centered differences of u.
FixedPointReport verify_fixed_point(const FieldTriple& v, const ThetaFunction& theta,
                                    const RhsFunction& f, const BoundaryData& data,
                                    const Region& region, GridSpecPtr grid,
                                    const QuadratureRule& rule, int probe_res = 17);

struct NonlinearSolveResult {
    FieldTriple v;
    ThetaFunction theta = ThetaFunction::affine(0.0, 0.0, 0.0);
    std::optional<Region> region;          // possibly shrunk
    GridSpecPtr grid;
    ContractionParams contraction;
    int halvings = 0;
    int iterations = 0;
    std::vector<double> deltas;
    std::vector<double> sigmas;
    std::vector<std::array<double, 3>> component_deltas;
    bool converged = false;
    bool max_iter_exceeded = false;
    bool mu_flagged = false;               // proceeded with mu >= 1 (shrink off)
    double sup_f_estimate = 0.0;
    expr::LipschitzBox lipschitz;
    bool lipschitz_estimated = false;      // false when L was supplied
};

struct NonlinearOptions {
    double tol = 1e-10;
    int max_iter = 60;
    bool shrink = true;
    int max_halvings = 8;
    std::optional<double> lipschitz_override;
    int lipschitz_density = 24;
};

// Full adaptive solve. If shrink is set and mu >= 1, x_A is halved (with a
// complete region and grid rebuild) until mu < 1, up to max_halvings; beyond
// that ContractionUnachievable is thrown. With shrink off the solver
// proceeds and flags mu >= 1 in the result.
NonlinearSolveResult solve_nonlinear(const RhsFunction& f, const BoundaryData& data,
                                     const Region& region, int nx, int ny,
                                     const NonlinearOptions& options);

// Region rebuilt for a smaller x_A (y_A, y_B recomputed from the curves).
Region shrink_region(const Region& region, double new_x_A);

} // namespace charpic

#endif
