#ifndef CHARPIC_QUADRATURE_HPP
#define CHARPIC_QUADRATURE_HPP

#include <functional>

#include "charpic/geometry.hpp"

namespace charpic {

// Composite trapezoid rule parameters. The inner (eta) subinterval count of a
// strip integral scales with the strip height so resolution tracks the field
// grid; n_inner_min is the floor.
struct QuadratureRule {
    int n_outer = 64;
    int n_inner_min = 2;
    double target_dx = 0.0; // > 0: n_outer grows to keep steps below this
    double target_dy = 0.0; // > 0: inner steps aim for this

    static QuadratureRule fixed(int n_outer, int n_inner = 2);
    // Steps tied to the grid spacing of an (nx, ny) field over the region.
    static QuadratureRule for_grid(double hx, double hy, int n_outer_min = 2, int n_inner_min = 2);

    int resolve_outer(double width) const;
    int resolve_inner(double height) const;
};

// Composite trapezoid value of the 1D integral of g over [lo, hi] with n even
// subintervals. Orientation is signed: swapping the limits negates the result
// exactly.
double integrate_1d(const std::function<double(double)>& g, double lo, double hi, int n);
double integrate_1d(const std::function<double(double)>& g, double lo, double hi,
                    const QuadratureRule& rule);

// Iterated integral over a curvilinear strip:
//   integral_{xi_lo}^{xi_hi} integral_{eta_lo}^{b(xi)} g(xi, eta) deta dxi
// via composite trapezoid in both directions. Signed in the outer limits.
double integrate_strip(const std::function<double(double, double)>& g, double xi_lo, double xi_hi,
                       double eta_lo, const std::function<double(double)>& b_curve,
                       const QuadratureRule& rule);

// Convenience overload taking the limits from a geometry strip descriptor.
double integrate_strip(const std::function<double(double, double)>& g, const StripRegion& strip,
                       const CurvePair& curves, const QuadratureRule& rule);

} // namespace charpic

#endif
