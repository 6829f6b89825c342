#ifndef CHARPIC_LINEAR_SOLVER_HPP
#define CHARPIC_LINEAR_SOLVER_HPP

#include <functional>
#include <optional>
#include <vector>

#include "charpic/boundary_data.hpp"
#include "charpic/fields.hpp"
#include "charpic/sweep.hpp"

namespace charpic {

struct ElementarySolution {
    GridField u;
    // boundary defects measured through the split formulas along the curves
    double defect_phi = 0.0;
    double defect_psi = 0.0;
    double defect_theta = 0.0;
    ThetaCompatibilityReport theta_report;
    bool theta_slope_warning = false; // A6 defect beyond warn threshold
};

// Direct quadrature of the split solution of u_xy = f(x, y) with data
// (phi, psi, theta). Throws ThetaIncompatible when theta(y_A) != phi(y_A).
ElementarySolution solve_elementary(const std::function<double(double, double)>& f_xy,
                                    const BoundaryData& data, const ThetaFunction& theta,
                                    const Region& region, GridSpecPtr grid,
                                    const QuadratureRule& rule);

struct LinearIterationState {
    int n = 0;             // index of the last computed iterate
    GridField u;
    std::vector<double> deltas; // deltas[k-1] = sup |u^(k) - u^(k-1)|
    bool converged = false;
    bool max_iter_exceeded = false;
};

// Called after each sweep with (n, u^{(n-1)}, u^{(n)}).
using IterateObserver = std::function<void(int, const GridField&, const GridField&)>;

// Picard iteration for u_xy = u in the unstable configuration with fixed
// auxiliary data theta. Stops when sup|u^(n)-u^(n-1)| < tol with n >= 3, or
// immediately on an exact fixed point (delta == 0).
LinearIterationState picard_linear(const BoundaryData& data, const ThetaFunction& theta,
                                   const Region& region, GridSpecPtr grid,
                                   const QuadratureRule& rule, double tol, int max_iter,
                                   const IterateObserver& observer = nullptr);

struct PositivityReport {
    int ladder_depth = 0;
    double min_interior_oac = 0.0;
    int interior_oac_nodes = 0;
    std::vector<double> min_per_band;  // min of u_theta over T_N, N = 1..depth
    std::vector<int> band_node_counts;
    double min_bands_123 = 0.0;        // min over T_1 u T_2 u T_3
    std::vector<double> claim42_max;   // max |u^(n)| over closed O A_n C_n, n = 1..3
    double claim42_tolerance = 0.0;
    double min_monotone_abc = 0.0;     // min over n of min_{ABC}(u^(n+1) - u^(n))
    double min_monotone_bands = 0.0;   // min over T_N nodes for sweeps n >= N
};

struct NonuniquenessDemo {
    GridField u_zero;
    GridField u_theta;
    ThetaFunction theta;
    LinearIterationState state_theta;
    PositivityReport positivity;
};

// Runs the zero-data problem twice: with theta == 0 (giving u == 0) and with
// the strictly positive demo theta, recording the positivity and
// monotonicity structure of the iterates.
NonuniquenessDemo demo_nonuniqueness(const Region& region, GridSpecPtr grid,
                                     const QuadratureRule& rule, double tol, int max_iter);

// Grid convergence of min u over the bands T_1..T_3, sampled at the coarsest
// grid's node locations across a ladder of nested solves. The Richardson
// error estimate of that minimum is the positivity threshold of the demo.
struct BandMinConvergence {
    std::vector<double> mins;
    std::size_t common_nodes = 0;
    double order = 0.0;
    double richardson_error = 0.0;
    bool usable = false;
};

BandMinConvergence band_min_convergence(const Region& region,
                                        const std::vector<GridField>& fields,
                                        double field_order_hint);

} // namespace charpic

#endif
