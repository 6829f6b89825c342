#ifndef CHARPIC_VERIFICATION_HPP
#define CHARPIC_VERIFICATION_HPP

#include <functional>
#include <vector>

#include "charpic/boundary_data.hpp"
#include "charpic/fields.hpp"
#include "charpic/geometry.hpp"
#include "charpic/sweep.hpp"

namespace charpic {

// --- stable configuration (Case I) baseline -------------------------------

struct StableSolveResult {
    GridField u;
    std::vector<double> deltas;
    bool converged = false;
    bool max_iter_exceeded = false;
};

// Grid over the Case I region between N (below) and M (above):
// { (x, y) : 0 <= x <= x_A, b(x) <= y <= a^{-1}(x) }.
GridSpecPtr stable_grid(const CurvePair& curves, int nx, int ny);

// Picard iteration of u(x,y) = phi(y) + int_{a(y)}^x psi + iterated integral
// of the previous iterate, for u_xy = u. No auxiliary data is needed: every
// integration region lies closer to the origin. Throws NotCaseI unless the
// configuration is stable.
StableSolveResult solve_stable_case_I(const BoundaryData& data, const CurvePair& curves,
                                      int nx, int ny, double tol, int max_iter);

// Single pass of the same formula for the elementary equation u_xy = f(x,y).
GridField solve_stable_elementary(const std::function<double(double, double)>& f_xy,
                                  const BoundaryData& data, const CurvePair& curves,
                                  int nx, int ny);

// --- series oracle ----------------------------------------------------------

// Partial sum of sum_{n>=0} z^n / (n!)^2 with n_terms terms. The full series
// equals I_0(2 sqrt z), the modified Bessel function of order zero.
double bessel_series(double z, int n_terms);

// --- residuals --------------------------------------------------------------

struct ResidualReport {
    double max_residual = 0.0;
    double mean_residual = 0.0;
    int probes = 0;
    double hx = 0.0, hy = 0.0;
};

// |D_xy u - f(x, y, u, p, q)| with the centered 4-point mixed stencil at
// nodes whose two surrounding layers are fully masked.
ResidualReport residual_mixed_derivative(const FieldTriple& v, const RhsFunction& f);

// --- grid convergence -------------------------------------------------------

struct ConvergenceStudy {
    std::vector<int> sizes;
    std::vector<GridField> fields;
    std::vector<double> diffs;     // sup difference between consecutive grids
    double order = 0.0;            // log2(diffs[k-1]/diffs[k]) of the last pair
    double richardson_error = 0.0; // error estimate for the finest grid
    bool non_monotone = false;
};

// Runs `solve` for each grid size (typically 65, 129, 257; each size-1 must
// divide the next) and compares the fields on common nodes.
ConvergenceStudy grid_convergence(const std::function<GridField(int)>& solve,
                                  const std::vector<int>& sizes);

// Sup difference between two fields of nested grids on their common masked
// nodes; the coarse (size-1) must divide the fine (size-1).
double nested_sup_diff(const GridField& coarse, const GridField& fine);

// --- boundary reproduction --------------------------------------------------

struct BoundaryReproduction {
    double max_phi_defect = 0.0;   // |u(a(y), y) - phi(y)|, interpolated
    double max_psi_defect = 0.0;   // centered D_x u against psi - column integral of f
    double max_theta_defect = 0.0; // |u(x_A, y) - theta(y)|, interpolated
};

// `rhs` is the equation right-hand side as an integrand view (the field u
// itself for u_xy = u, f(x,y) for the elementary equation, f(x,y,v) for the
// nonlinear one).
BoundaryReproduction boundary_reproduction(const GridField& u, const BoundaryData& data,
                                           const ThetaFunction* theta, const Region& region,
                                           const QuadratureRule& rule, const IntegrandView& rhs);

} // namespace charpic

#endif
