#ifndef CHARPIC_GEOMETRY_HPP
#define CHARPIC_GEOMETRY_HPP

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "charpic/errors.hpp"
#include "charpic/expr.hpp"

namespace charpic {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class CurveKind { Affine, Sampled, Expression };

// A strictly increasing scalar function on [0, t_max] with value(0) = 0.
// Used for both data curves: x = a(y) and y = b(x).
class Curve {
public:
    static Curve affine(double slope);
    static Curve expression(const std::string& source, expr::Var parameter);
    // Knots as (t, value) pairs, strictly increasing in both coordinates,
    // starting at (0, 0). Evaluation is piecewise linear.
    static Curve sampled(std::vector<std::array<double, 2>> knots);

    double operator()(double t) const;
    double deriv(double t) const;
    // Inverse by bisection on [0, t_hi] (exact for affine and sampled curves).
    double inverse(double value, double t_hi) const;

    CurveKind kind() const { return kind_; }
    double slope() const { return slope_; } // affine only

private:
    Curve() = default;

    CurveKind kind_ = CurveKind::Affine;
    double slope_ = 1.0;
    std::vector<std::array<double, 2>> knots_;
    std::shared_ptr<const expr::ExprAst> ast_;
    std::shared_ptr<const expr::ExprAst> ast_deriv_; // may be null -> finite differences
    expr::Var param_ = expr::Var::X;
};

// The pair of data curves M = {x = a(y)} and N = {y = b(x)}, together with
// the corner coordinates they induce. a maps [0, y_A] onto [0, x_A] and
// b maps [0, x_A] onto [0, y_B]; both are validated to be strictly
// increasing with value 0 at 0.
class CurvePair {
public:
    static CurvePair affine(double a_slope, double b_slope, double x_A);
    static CurvePair expression(const std::string& a_src, const std::string& b_src, double x_A);
    static CurvePair sampled(std::vector<std::array<double, 2>> a_points,  // (y, x)
                             std::vector<std::array<double, 2>> b_points); // (x, y)

    double a(double y) const { return a_curve_(y); }
    double b(double x) const { return b_curve_(x); }
    double a_deriv(double y) const { return a_curve_.deriv(y); }
    double a_inv(double x) const { return a_curve_.inverse(x, y_A_); }
    double b_inv(double y) const { return b_curve_.inverse(y, x_A_); }

    double x_A() const { return x_A_; }
    double y_A() const { return y_A_; }
    double y_B() const { return y_B_; }

    bool is_affine() const { return a_curve_.kind() == CurveKind::Affine &&
                                    b_curve_.kind() == CurveKind::Affine; }
    double a_slope() const { return a_curve_.slope(); }
    double b_slope() const { return b_curve_.slope(); }

    // Same curves restricted to a smaller x_A (y_A, y_B recomputed).
    CurvePair with_x_A(double new_x_A) const;

private:
    CurvePair(Curve a, Curve b, double x_A, double y_A, double y_B);
    void validate() const;

    Curve a_curve_;
    Curve b_curve_;
    double x_A_, y_A_, y_B_;
};

enum class CaseKind { StableCaseI, UnstableCaseII, Degenerate };

struct Configuration {
    CaseKind kind = CaseKind::Degenerate;
    // min over sampled y in (0, y_A] of b(a(y)) - y.
    double margin = 0.0;
};

std::string to_string(CaseKind k);

// Samples s(y) = b(a(y)) - y at `samples` interior points plus the endpoint
// y_A. All positive -> UnstableCaseII, all negative -> StableCaseI, zero
// within tolerance throughout (or zeros mixed with one sign) -> Degenerate.
// Throws DegenerateConfiguration if the sign changes on (0, y_A].
Configuration classify_configuration(const CurvePair& curves, int samples = 10001);

enum class Membership { InOAC, InABC, OnAC, Outside };

std::string to_string(Membership m);

// Iterated-integral limits over a curvilinear trapezoid:
//   xi in [xi_lo, xi_hi], eta in [eta_lo, b(xi)].
struct StripRegion {
    double xi_lo = 0.0;
    double xi_hi = 0.0;
    double eta_lo = 0.0;
    std::array<Point, 4> vertices{}; // (x,y), (xi_hi,y), (xi_hi,b(xi_hi)), (x,b(x))
};

// The curvilinear triangle OAB of the unstable (Case II) configuration,
// split by the horizontal segment AC into OAC and ABC.
class Region {
public:
    explicit Region(CurvePair curves, int classify_samples = 10001);

    const CurvePair& curves() const { return curves_; }
    const Configuration& configuration() const { return config_; }

    Point O() const { return {0.0, 0.0}; }
    Point A() const { return {curves_.x_A(), curves_.y_A()}; }
    Point B() const { return {curves_.x_A(), curves_.y_B()}; }
    Point C() const { return {x_C_, curves_.y_A()}; }

    double x_A() const { return curves_.x_A(); }
    double y_A() const { return curves_.y_A(); }
    double y_B() const { return curves_.y_B(); }
    double l() const { return curves_.x_A(); }
    double h() const { return curves_.y_B(); }
    double gamma() const { return gamma_; }
    double area() const { return area_; }

    double boundary_tol() const { return 1e-12 * curves_.y_B(); }

    Membership membership(Point p) const;
    bool inside(double x, double y) const { return membership({x, y}) != Membership::Outside; }

private:
    CurvePair curves_;
    Configuration config_;
    double x_C_;
    double gamma_;
    double area_;
};

// Quadrature region for points of OAC: xi in [x, a(y)], eta in [y, b(xi)].
StripRegion trapezoid_tau(const Region& region, Point p);

// Quadrature region for points of ABC: xi in [x, x_A], eta in [y, b(xi)].
StripRegion trapezoid_T(const Region& region, Point p);

// Ladder of points A_i, C_i descending toward the origin, and the trapezoid
// bands T_N they delimit. Defined for affine curves in Case II only.
struct TrapezoidLadder {
    std::vector<Point> A_pts; // A_pts[0] = A
    std::vector<Point> C_pts; // C_pts[0] = C

    int depth() const { return static_cast<int>(A_pts.size()) - 1; }
};

TrapezoidLadder build_ladder(const Region& region, int N_max);

// Membership in the band T_N := A_N A_{N-1} C_{N-1} C_N with the open top
// side C_{N-1} A_{N-1} included and the other three sides excluded.
bool in_ladder_band(const Region& region, const TrapezoidLadder& ladder, int N, Point p);

// Membership in the closed curvilinear triangle O A_n C_n (n = 0 gives OAC).
bool in_ladder_triangle(const Region& region, const TrapezoidLadder& ladder, int n, Point p);

} // namespace charpic

#endif
