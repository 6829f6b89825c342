#ifndef CHARPIC_BOUNDARY_DATA_HPP
#define CHARPIC_BOUNDARY_DATA_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "charpic/expr.hpp"
#include "charpic/fields.hpp"
#include "charpic/geometry.hpp"
#include "charpic/quadrature.hpp"

namespace charpic {

// Single-variable data function on [0, interval]. The derivative comes from
// the symbolic differentiator when the expression admits one, otherwise from
// central differences with step 1e-6 * interval (window shifted inward at the
// interval ends).
class ScalarFunction {
public:
    static ScalarFunction from_expression(const std::string& src, expr::Var var, double interval);
    static ScalarFunction from_callable(std::function<double(double)> fn,
                                        std::function<double(double)> deriv = nullptr,
                                        double interval = 1.0);
    static ScalarFunction constant(double c);
    static ScalarFunction zero() { return constant(0.0); }

    double operator()(double t) const { return fn_(t); }
    double deriv(double t) const;

private:
    std::function<double(double)> fn_;
    std::function<double(double)> deriv_;
    double interval_ = 1.0;
};

// u-data phi on M (function of y on [0, y_A]) and u_x-data psi on N
// (function of x on [0, x_A]).
struct BoundaryData {
    ScalarFunction phi = ScalarFunction::zero();
    ScalarFunction psi = ScalarFunction::zero();

    static BoundaryData zero() { return {}; }
    static BoundaryData from_expressions(const std::string& phi_src, const std::string& psi_src,
                                         double y_A, double x_A);

    double phi_at(double y) const { return phi(y); }
    double phi_prime(double y) const { return phi.deriv(y); }
    double psi_at(double x) const { return psi(x); }
};

// Right-hand side f(x, y, u, p, q).
class RhsFunction {
public:
    static RhsFunction from_expression(const std::string& src);
    static RhsFunction from_callable(std::function<double(double, double, double, double, double)> fn,
                                     bool depends_on_v = true);
    static RhsFunction zero();

    double operator()(double x, double y, double u, double p, double q) const {
        return fn_(x, y, u, p, q);
    }
    double at_xy(double x, double y) const { return fn_(x, y, 0.0, 0.0, 0.0); }

    bool depends_on_v() const { return depends_on_v_; }
    bool depends_only_on_xy() const { return !depends_on_v_; }
    const std::shared_ptr<const expr::ExprAst>& ast() const { return ast_; }

private:
    std::function<double(double, double, double, double, double)> fn_;
    std::shared_ptr<const expr::ExprAst> ast_;
    bool depends_on_v_ = true;
};

// Auxiliary u-data on the vertical segment AB. Affine and quadratic variants
// are anchored at y_A and integrate in closed form; the custom variant wraps
// an arbitrary C^1 function.
class ThetaFunction {
public:
    enum class Kind { Affine, Quadratic, Custom };

    // value = c0 + c1 (y - anchor) [+ c2 (y - anchor)^2]
    static ThetaFunction affine(double anchor, double c0, double slope);
    static ThetaFunction quadratic(double anchor, double c0, double c1, double c2);
    static ThetaFunction custom(std::function<double(double)> fn, std::function<double(double)> deriv);
    static ThetaFunction from_expression(const std::string& src, double y_A, double y_B);

    double operator()(double y) const;
    double deriv(double y) const;
    // integral over [lo, hi]; closed form for the polynomial variants
    double integral(double lo, double hi) const;

    Kind kind() const { return kind_; }
    double anchor() const { return anchor_; }
    double value_at_anchor() const { return c0_; }
    double slope() const { return c1_; } // derivative at the anchor

private:
    Kind kind_ = Kind::Affine;
    double anchor_ = 0.0, c0_ = 0.0, c1_ = 0.0, c2_ = 0.0;
    std::function<double(double)> fn_;
    std::function<double(double)> deriv_;
};

struct ThetaCompatibilityReport {
    double lhs = 0.0;    // theta'(y_A)
    double rhs = 0.0;    // right-hand side of the applicable condition
    double defect = 0.0; // |lhs - rhs|
    double value_defect = 0.0; // |theta(y_A) - phi(y_A)|
};

// Compatibility of theta for the elementary equation u_xy = f(x, y):
//   theta'(y_A) = phi'(y_A) - a'(y_A) psi(x_A) + a'(y_A) * int_{y_A}^{y_B} f(x_A, eta) deta.
ThetaCompatibilityReport check_theta_elementary(const ThetaFunction& theta,
                                                const BoundaryData& data,
                                                const std::function<double(double, double)>& f_xy,
                                                const Region& region, const QuadratureRule& rule);

// Compatibility for u_xy = u, where theta itself feeds the integral:
//   theta'(y_A) = phi'(y_A) - a'(y_A) psi(x_A) + a'(y_A) * int_{y_A}^{y_B} theta(eta) deta.
// Polynomial thetas use the closed-form integral.
ThetaCompatibilityReport check_theta_linear(const ThetaFunction& theta, const BoundaryData& data,
                                            const Region& region);

// Quadratic theta(y) = phi(y_A) + alpha (y-y_A) + beta (y-y_A)^2 solving the
// self-referential condition above exactly, with the free parameter fixed by
// theta(y_B) = phi(y_A) + 1.
ThetaFunction build_theta_linear(const BoundaryData& data, const Region& region);

// Affine theta anchored at phi(y_A) whose slope is the A6 right-hand side for
// a fixed f(x, y); the minimal admissible choice for the elementary solver.
ThetaFunction build_theta_elementary(const BoundaryData& data,
                                     const std::function<double(double, double)>& f_xy,
                                     const Region& region, const QuadratureRule& rule);

// Zero-anchored quadratic theta for the non-uniqueness demonstration:
// theta(y_A) = 0, theta'(y_A) = a * int theta, theta > 0 on (y_A, y_B).
// Requires affine curves and a d^2 < 6 (d = y_B - y_A).
ThetaFunction build_theta_positive_demo(const Region& region);

// One affine-theta update of the adaptive scheme: the new slope is
//   phi'(y_A) - a'(y_A) [psi(x_A) - int_{y_A}^{y_B} f(x_A, eta, theta_n(eta),
//                        p_n(x_A, eta), theta_n'(eta)) deta].
ThetaFunction theta_affine_next(const FieldTriple& prev, const ThetaFunction& prev_theta,
                                const BoundaryData& data, const RhsFunction& f,
                                const Region& region, const QuadratureRule& rule);

} // namespace charpic

#endif
