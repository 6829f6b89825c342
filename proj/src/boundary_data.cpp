#include "charpic/boundary_data.hpp"

#include <cmath>

namespace charpic {

// ---------------------------------------------------------------------------
// ScalarFunction
// ---------------------------------------------------------------------------

ScalarFunction ScalarFunction::from_expression(const std::string& src, expr::Var var,
                                               double interval) {
    auto ast = std::make_shared<expr::ExprAst>(expr::parse(src, expr::VarSet::only(var)));
    ScalarFunction s;
    s.interval_ = interval;
    s.fn_ = [ast, var](double t) {
        expr::Bindings b;
        b[var] = t;
        return ast->evaluate(b);
    };
    if (auto d = ast->derivative(var)) {
        auto dast = std::make_shared<expr::ExprAst>(std::move(*d));
        s.deriv_ = [dast, var](double t) {
            expr::Bindings b;
            b[var] = t;
            return dast->evaluate(b);
        };
    }
    return s;
}

ScalarFunction ScalarFunction::from_callable(std::function<double(double)> fn,
                                             std::function<double(double)> deriv,
                                             double interval) {
    ScalarFunction s;
    s.fn_ = std::move(fn);
    s.deriv_ = std::move(deriv);
    s.interval_ = interval;
    return s;
}

ScalarFunction ScalarFunction::constant(double c) {
    ScalarFunction s;
    s.fn_ = [c](double) { return c; };
    s.deriv_ = [](double) { return 0.0; };
    return s;
}

double ScalarFunction::deriv(double t) const {
    if (deriv_) return deriv_(t);
    double step = std::max(1e-6 * std::max(interval_, 1e-6), 1e-12);
    double lo = t - step, hi = t + step;
    if (lo < 0.0) { lo = 0.0; hi = 2 * step; }
    if (hi > interval_) { hi = interval_; lo = interval_ - 2 * step; }
    return (fn_(hi) - fn_(lo)) / (hi - lo);
}

BoundaryData BoundaryData::from_expressions(const std::string& phi_src, const std::string& psi_src,
                                            double y_A, double x_A) {
    BoundaryData d;
    d.phi = ScalarFunction::from_expression(phi_src, expr::Var::Y, y_A);
    d.psi = ScalarFunction::from_expression(psi_src, expr::Var::X, x_A);
    return d;
}

// ---------------------------------------------------------------------------
// RhsFunction
// ---------------------------------------------------------------------------

RhsFunction RhsFunction::from_expression(const std::string& src) {
    auto ast = std::make_shared<expr::ExprAst>(expr::parse(src, expr::VarSet::all()));
    RhsFunction f;
    expr::VarSet used = ast->used_vars();
    f.depends_on_v_ = used.contains(expr::Var::U) || used.contains(expr::Var::P) ||
                      used.contains(expr::Var::Q);
    f.fn_ = [ast](double x, double y, double u, double p, double q) {
        return ast->evaluate(expr::Bindings::at(x, y, u, p, q));
    };
    f.ast_ = std::move(ast);
    return f;
}

RhsFunction RhsFunction::from_callable(
    std::function<double(double, double, double, double, double)> fn, bool depends_on_v) {
    RhsFunction f;
    f.fn_ = std::move(fn);
    f.depends_on_v_ = depends_on_v;
    return f;
}

RhsFunction RhsFunction::zero() {
    return from_callable([](double, double, double, double, double) { return 0.0; }, false);
}

// ---------------------------------------------------------------------------
// ThetaFunction
// ---------------------------------------------------------------------------

ThetaFunction ThetaFunction::affine(double anchor, double c0, double slope) {
    ThetaFunction t;
    t.kind_ = Kind::Affine;
    t.anchor_ = anchor;
    t.c0_ = c0;
    t.c1_ = slope;
    return t;
}

ThetaFunction ThetaFunction::quadratic(double anchor, double c0, double c1, double c2) {
    ThetaFunction t;
    t.kind_ = Kind::Quadratic;
    t.anchor_ = anchor;
    t.c0_ = c0;
    t.c1_ = c1;
    t.c2_ = c2;
    return t;
}

ThetaFunction ThetaFunction::custom(std::function<double(double)> fn,
                                    std::function<double(double)> deriv) {
    ThetaFunction t;
    t.kind_ = Kind::Custom;
    t.fn_ = std::move(fn);
    t.deriv_ = std::move(deriv);
    return t;
}

ThetaFunction ThetaFunction::from_expression(const std::string& src, double y_A, double y_B) {
    ScalarFunction s = ScalarFunction::from_expression(src, expr::Var::Y, y_B);
    ThetaFunction t = custom([s](double y) { return s(y); }, [s](double y) { return s.deriv(y); });
    t.anchor_ = y_A;
    t.c0_ = s(y_A);
    t.c1_ = s.deriv(y_A);
    return t;
}

double ThetaFunction::operator()(double y) const {
    if (kind_ == Kind::Custom) return fn_(y);
    double s = y - anchor_;
    return c0_ + c1_ * s + (kind_ == Kind::Quadratic ? c2_ * s * s : 0.0);
}

double ThetaFunction::deriv(double y) const {
    if (kind_ == Kind::Custom) return deriv_(y);
    return c1_ + (kind_ == Kind::Quadratic ? 2.0 * c2_ * (y - anchor_) : 0.0);
}

double ThetaFunction::integral(double lo, double hi) const {
    if (kind_ != Kind::Custom) {
        auto anti = [&](double y) {
            double s = y - anchor_;
            return c0_ * s + 0.5 * c1_ * s * s + (kind_ == Kind::Quadratic ? c2_ * s * s * s / 3.0 : 0.0);
        };
        return anti(hi) - anti(lo);
    }
    return integrate_1d([this](double y) { return fn_(y); }, lo, hi, 2048);
}

// ---------------------------------------------------------------------------
// Compatibility checks and constructions
// ---------------------------------------------------------------------------

ThetaCompatibilityReport check_theta_elementary(const ThetaFunction& theta,
                                                const BoundaryData& data,
                                                const std::function<double(double, double)>& f_xy,
                                                const Region& region, const QuadratureRule& rule) {
    const double y_A = region.y_A(), y_B = region.y_B(), x_A = region.x_A();
    const double a1 = region.curves().a_deriv(y_A);
    ThetaCompatibilityReport r;
    r.lhs = theta.deriv(y_A);
    double tail = integrate_1d([&](double eta) { return f_xy(x_A, eta); }, y_A, y_B, rule);
    r.rhs = data.phi_prime(y_A) - a1 * data.psi_at(x_A) + a1 * tail;
    r.defect = std::abs(r.lhs - r.rhs);
    r.value_defect = std::abs(theta(y_A) - data.phi_at(y_A));
    return r;
}

ThetaCompatibilityReport check_theta_linear(const ThetaFunction& theta, const BoundaryData& data,
                                            const Region& region) {
    const double y_A = region.y_A(), y_B = region.y_B(), x_A = region.x_A();
    const double a1 = region.curves().a_deriv(y_A);
    ThetaCompatibilityReport r;
    r.lhs = theta.deriv(y_A);
    r.rhs = data.phi_prime(y_A) - a1 * data.psi_at(x_A) + a1 * theta.integral(y_A, y_B);
    r.defect = std::abs(r.lhs - r.rhs);
    r.value_defect = std::abs(theta(y_A) - data.phi_at(y_A));
    return r;
}

ThetaFunction build_theta_linear(const BoundaryData& data, const Region& region) {
    const double y_A = region.y_A(), y_B = region.y_B(), x_A = region.x_A();
    const double d = y_B - y_A;
    if (!(d > 1e-14 * y_B)) throw SingularConstraint("segment AB has zero length");
    const double a1 = region.curves().a_deriv(y_A);
    const double Phi = data.phi_at(y_A);
    const double k0 = data.phi_prime(y_A) - a1 * data.psi_at(x_A);
    // theta = Phi + alpha s + beta s^2 (s = y - y_A) with theta(y_B) = Phi + 1:
    //   alpha d + beta d^2 = 1, and the self-referential slope condition
    //   alpha = k0 + a [Phi d + alpha d^2/2 + beta d^3/3]
    // reduce to a single linear equation for alpha.
    const double den = 1.0 - a1 * d * d / 6.0;
    if (std::abs(den) < 1e-12)
        throw SingularConstraint("theta constraint is singular for this geometry (a d^2 = 6)");
    const double alpha = (k0 + a1 * Phi * d + a1 * d / 3.0) / den;
    const double beta = (1.0 - alpha * d) / (d * d);
    return ThetaFunction::quadratic(y_A, Phi, alpha, beta);
}

ThetaFunction build_theta_elementary(const BoundaryData& data,
                                     const std::function<double(double, double)>& f_xy,
                                     const Region& region, const QuadratureRule& rule) {
    const double y_A = region.y_A(), y_B = region.y_B(), x_A = region.x_A();
    const double a1 = region.curves().a_deriv(y_A);
    double tail = integrate_1d([&](double eta) { return f_xy(x_A, eta); }, y_A, y_B, rule);
    double slope = data.phi_prime(y_A) - a1 * data.psi_at(x_A) + a1 * tail;
    return ThetaFunction::affine(y_A, data.phi_at(y_A), slope);
}

ThetaFunction build_theta_positive_demo(const Region& region) {
    if (!region.curves().is_affine())
        throw NotAffine("the positivity demo theta is defined for affine curves");
    const double a = region.curves().a_slope();
    const double y_A = region.y_A(), y_B = region.y_B();
    const double d = y_B - y_A;
    const double ad2 = a * d * d;
    if (ad2 >= 6.0)
        throw PositivityUnachievable(
            "a (y_B - y_A)^2 >= 6: the quadratic family loses positivity; shrink the domain");
    const double alpha = 1.0;
    const double beta = 3.0 * (1.0 - a * d * d / 2.0) / (a * d * d * d);
    ThetaFunction theta = ThetaFunction::quadratic(y_A, 0.0, alpha, beta);
    for (int k = 1; k < 1000; ++k) {
        double y = y_A + d * k / 1000.0;
        if (!(theta(y) > 0.0))
            throw PositivityUnachievable("constructed theta is not strictly positive");
    }
    return theta;
}

ThetaFunction theta_affine_next(const FieldTriple& prev, const ThetaFunction& prev_theta,
                                const BoundaryData& data, const RhsFunction& f,
                                const Region& region, const QuadratureRule& rule) {
    const double y_A = region.y_A(), y_B = region.y_B(), x_A = region.x_A();
    const double a1 = region.curves().a_deriv(y_A);
    auto integrand = [&](double eta) {
        double u_val = prev_theta(eta);
        double p_val = interpolate(prev.p, {x_A, eta});
        double q_val = prev_theta.deriv(eta);
        return f(x_A, eta, u_val, p_val, q_val);
    };
    double tail = integrate_1d(integrand, y_A, y_B, rule);
    double sigma = data.phi_prime(y_A) - a1 * (data.psi_at(x_A) - tail);
    return ThetaFunction::affine(y_A, data.phi_at(y_A), sigma);
}

} // namespace charpic
