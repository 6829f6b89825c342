#include "charpic/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace charpic {

// ---------------------------------------------------------------------------
// Curve
// ---------------------------------------------------------------------------

Curve Curve::affine(double slope) {
    if (!(slope > 0.0)) throw InvalidCurve("affine curve slope must be positive");
    Curve c;
    c.kind_ = CurveKind::Affine;
    c.slope_ = slope;
    return c;
}

Curve Curve::expression(const std::string& source, expr::Var parameter) {
    Curve c;
    c.kind_ = CurveKind::Expression;
    c.param_ = parameter;
    auto ast = std::make_shared<expr::ExprAst>(expr::parse(source, expr::VarSet::only(parameter)));
    if (auto d = ast->derivative(parameter))
        c.ast_deriv_ = std::make_shared<expr::ExprAst>(std::move(*d));
    c.ast_ = std::move(ast);
    return c;
}

Curve Curve::sampled(std::vector<std::array<double, 2>> knots) {
    if (knots.size() < 2) throw InvalidCurve("sampled curve needs at least two knots");
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i][0] > knots[i - 1][0]) || !(knots[i][1] > knots[i - 1][1]))
            throw InvalidCurve("sampled curve knots must be strictly increasing in both coordinates");
    }
    if (std::abs(knots.front()[0]) > 1e-12 * knots.back()[0] ||
        std::abs(knots.front()[1]) > 1e-12 * knots.back()[1])
        throw InvalidCurve("sampled curve must start at the origin");
    knots.front() = {0.0, 0.0};
    Curve c;
    c.kind_ = CurveKind::Sampled;
    c.knots_ = std::move(knots);
    return c;
}

double Curve::operator()(double t) const {
    switch (kind_) {
        case CurveKind::Affine:
            return slope_ * t;
        case CurveKind::Expression: {
            expr::Bindings b;
            b[param_] = t;
            return ast_->evaluate(b);
        }
        case CurveKind::Sampled: {
            if (t <= knots_.front()[0]) {
                // extrapolate with the first segment slope
                double s = (knots_[1][1] - knots_[0][1]) / (knots_[1][0] - knots_[0][0]);
                return knots_[0][1] + s * (t - knots_[0][0]);
            }
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                       [](double v, const std::array<double, 2>& k) {
                                           return v < k[0];
                                       });
            std::size_t i = std::min<std::size_t>(it - knots_.begin(), knots_.size() - 1);
            const auto& k0 = knots_[i - 1];
            const auto& k1 = knots_[i];
            double s = (k1[1] - k0[1]) / (k1[0] - k0[0]);
            return k0[1] + s * (t - k0[0]);
        }
    }
    return 0.0;
}

double Curve::deriv(double t) const {
    switch (kind_) {
        case CurveKind::Affine:
            return slope_;
        case CurveKind::Expression: {
            if (ast_deriv_) {
                expr::Bindings b;
                b[param_] = t;
                return ast_deriv_->evaluate(b);
            }
            double step = std::max(1e-6 * std::max(std::abs(t), 1.0), 1e-9);
            double lo = std::max(0.0, t - step);
            double hi = t + step;
            return ((*this)(hi) - (*this)(lo)) / (hi - lo);
        }
        case CurveKind::Sampled: {
            // slope of the segment containing t; one-sided at knots (segment
            // to the right, last segment at the upper end)
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                       [](double v, const std::array<double, 2>& k) {
                                           return v < k[0];
                                       });
            std::size_t i = std::clamp<std::size_t>(it - knots_.begin(), 1, knots_.size() - 1);
            const auto& k0 = knots_[i - 1];
            const auto& k1 = knots_[i];
            return (k1[1] - k0[1]) / (k1[0] - k0[0]);
        }
    }
    return 0.0;
}

double Curve::inverse(double value, double t_hi) const {
    if (kind_ == CurveKind::Affine) return value / slope_;
    if (kind_ == CurveKind::Sampled) {
        if (value <= 0.0) return 0.0;
        auto it = std::upper_bound(knots_.begin(), knots_.end(), value,
                                   [](double v, const std::array<double, 2>& k) {
                                       return v < k[1];
                                   });
        std::size_t i = std::clamp<std::size_t>(it - knots_.begin(), 1, knots_.size() - 1);
        const auto& k0 = knots_[i - 1];
        const auto& k1 = knots_[i];
        return k0[0] + (value - k0[1]) * (k1[0] - k0[0]) / (k1[1] - k0[1]);
    }
    // bisection; the curve is strictly increasing so this is robust
    double lo = 0.0, hi = t_hi;
    double flo = (*this)(lo) - value;
    if (flo > 0.0) return 0.0;
    // expand the bracket if needed (callers normally pass a valid t_hi)
    double fhi = (*this)(hi) - value;
    int expand = 0;
    while (fhi < 0.0 && expand++ < 64) {
        hi *= 2.0;
        fhi = (*this)(hi) - value;
    }
    const double rel = 1e-14 * std::max(hi, 1.0);
    while (hi - lo > rel) {
        double mid = 0.5 * (lo + hi);
        if ((*this)(mid) - value < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// CurvePair
// ---------------------------------------------------------------------------

CurvePair::CurvePair(Curve a, Curve b, double x_A, double y_A, double y_B)
    : a_curve_(std::move(a)), b_curve_(std::move(b)), x_A_(x_A), y_A_(y_A), y_B_(y_B) {
    validate();
}

void CurvePair::validate() const {
    if (!(x_A_ > 0.0) || !(y_A_ > 0.0) || !(y_B_ > 0.0))
        throw InvalidCurve("corner coordinates must be positive");
    if (std::abs(a_curve_(0.0)) > 1e-12 * x_A_)
        throw InvalidCurve("curve a must satisfy a(0) = 0");
    if (std::abs(b_curve_(0.0)) > 1e-12 * y_B_)
        throw InvalidCurve("curve b must satisfy b(0) = 0");
    if (std::abs(a_curve_(y_A_) - x_A_) > 1e-9 * x_A_)
        throw InvalidCurve("curve a must satisfy a(y_A) = x_A");
    if (std::abs(b_curve_(x_A_) - y_B_) > 1e-9 * y_B_)
        throw InvalidCurve("curve b must satisfy b(x_A) = y_B");
    // strict monotonicity, sampled
    const int n = 1001;
    double pa = a_curve_(0.0), pb = b_curve_(0.0);
    for (int i = 1; i <= n; ++i) {
        double ya = y_A_ * i / n;
        double xb = x_A_ * i / n;
        double va = a_curve_(ya);
        double vb = b_curve_(xb);
        if (!(va > pa)) throw InvalidCurve("curve a is not strictly increasing");
        if (!(vb > pb)) throw InvalidCurve("curve b is not strictly increasing");
        pa = va;
        pb = vb;
    }
    // a' must be evaluable on [0, y_A]
    for (int i = 0; i <= 16; ++i) {
        double d = a_curve_.deriv(y_A_ * i / 16.0);
        if (!std::isfinite(d)) throw InvalidCurve("a' is not finite on [0, y_A]");
    }
}

CurvePair CurvePair::affine(double a_slope, double b_slope, double x_A) {
    if (!(a_slope > 0.0) || !(b_slope > 0.0) || !(x_A > 0.0))
        throw InvalidCurve("affine curve pair needs positive slopes and x_A");
    return CurvePair(Curve::affine(a_slope), Curve::affine(b_slope), x_A, x_A / a_slope,
                     b_slope * x_A);
}

CurvePair CurvePair::expression(const std::string& a_src, const std::string& b_src, double x_A) {
    Curve a = Curve::expression(a_src, expr::Var::Y);
    Curve b = Curve::expression(b_src, expr::Var::X);
    double y_A = a.inverse(x_A, x_A);
    double y_B = b(x_A);
    return CurvePair(std::move(a), std::move(b), x_A, y_A, y_B);
}

CurvePair CurvePair::with_x_A(double new_x_A) const {
    if (!(new_x_A > 0.0) || new_x_A > x_A_ * (1.0 + 1e-12))
        throw InvalidCurve("with_x_A expects 0 < new_x_A <= x_A");
    double y_A = a_curve_.inverse(new_x_A, y_A_);
    double y_B = b_curve_(new_x_A);
    return CurvePair(a_curve_, b_curve_, new_x_A, y_A, y_B);
}

CurvePair CurvePair::sampled(std::vector<std::array<double, 2>> a_points,
                             std::vector<std::array<double, 2>> b_points) {
    if (a_points.size() < 2 || b_points.size() < 2)
        throw InvalidCurve("sampled curves need at least two points each");
    double y_A = a_points.back()[0];
    double x_A = a_points.back()[1];
    double y_B = b_points.back()[1];
    if (std::abs(b_points.back()[0] - x_A) > 1e-9 * x_A)
        throw InvalidCurve("sampled curves disagree on x_A (last a-point x vs last b-point x)");
    return CurvePair(Curve::sampled(std::move(a_points)), Curve::sampled(std::move(b_points)),
                     x_A, y_A, y_B);
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

std::string to_string(CaseKind k) {
    switch (k) {
        case CaseKind::StableCaseI: return "StableCaseI";
        case CaseKind::UnstableCaseII: return "UnstableCaseII";
        case CaseKind::Degenerate: return "Degenerate";
    }
    return "?";
}

std::string to_string(Membership m) {
    switch (m) {
        case Membership::InOAC: return "InOAC";
        case Membership::InABC: return "InABC";
        case Membership::OnAC: return "OnAC";
        case Membership::Outside: return "Outside";
    }
    return "?";
}

Configuration classify_configuration(const CurvePair& curves, int samples) {
    if (samples < 2) samples = 2;
    const double y_A = curves.y_A();
    const double tol = 1e-12 * std::max(curves.y_B(), 1.0);
    int pos = 0, neg = 0;
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= samples; ++i) {
        double y = y_A * i / samples;
        double s = curves.b(curves.a(y)) - y;
        margin = std::min(margin, s);
        if (s > tol)
            ++pos;
        else if (s < -tol)
            ++neg;
    }
    if (pos > 0 && neg > 0)
        throw DegenerateConfiguration("b(a(y)) - y changes sign on (0, y_A]");
    Configuration cfg;
    cfg.margin = margin;
    if (pos > 0 && neg == 0 && pos == samples)
        cfg.kind = CaseKind::UnstableCaseII;
    else if (neg > 0 && pos == 0 && neg == samples)
        cfg.kind = CaseKind::StableCaseI;
    else
        cfg.kind = CaseKind::Degenerate; // touches zero somewhere away from the origin
    return cfg;
}

// ---------------------------------------------------------------------------
// Region
// ---------------------------------------------------------------------------

Region::Region(CurvePair curves, int classify_samples) : curves_(std::move(curves)) {
    config_ = classify_configuration(curves_, classify_samples);
    if (config_.kind != CaseKind::UnstableCaseII)
        throw NotCaseII("region OAB requires the unstable configuration (y < b(a(y)))");
    x_C_ = curves_.b_inv(curves_.y_A());
    const int n = 10001;
    double g = 0.0;
    for (int i = 0; i <= n; ++i) g = std::max(g, std::abs(curves_.a_deriv(curves_.y_A() * i / n)));
    gamma_ = g;
    // area(OAB) = integral over [0, x_A] of (b(x) - a^{-1}(x)) dx
    double area = 0.0;
    double prev = curves_.b(0.0) - 0.0;
    for (int i = 1; i <= n; ++i) {
        double x = curves_.x_A() * i / n;
        double cur = curves_.b(x) - curves_.a_inv(x);
        area += 0.5 * (prev + cur) * (curves_.x_A() / n);
        prev = cur;
    }
    area_ = area;
}

Membership Region::membership(Point p) const {
    const double ex = 1e-12 * curves_.x_A();
    const double ey = boundary_tol();
    const double x = p.x, y = p.y;
    if (x < -ex || x > curves_.x_A() + ex || y < -ey || y > curves_.y_B() + ey)
        return Membership::Outside;
    if (y > curves_.b(std::clamp(x, 0.0, curves_.x_A())) + ey) return Membership::Outside;
    const double y_A = curves_.y_A();
    if (y <= y_A + ey) {
        double ya = std::clamp(y, 0.0, y_A);
        if (x > curves_.a(ya) + ex) return Membership::Outside;
    }
    if (std::abs(y - y_A) <= ey) return Membership::OnAC;
    return y < y_A ? Membership::InOAC : Membership::InABC;
}

static StripRegion make_strip(const Region& region, Point p, double xi_hi) {
    StripRegion s;
    s.xi_lo = p.x;
    s.xi_hi = xi_hi;
    s.eta_lo = p.y;
    s.vertices = {Point{p.x, p.y}, Point{xi_hi, p.y}, Point{xi_hi, region.curves().b(xi_hi)},
                  Point{p.x, region.curves().b(p.x)}};
    return s;
}

StripRegion trapezoid_tau(const Region& region, Point p) {
    Membership m = region.membership(p);
    if (m != Membership::InOAC && m != Membership::OnAC)
        throw PointOutsideRegion("trapezoid tau requires a point of closed OAC");
    double y = std::clamp(p.y, 0.0, region.y_A());
    double xi_hi = std::min(region.curves().a(y), region.x_A());
    return make_strip(region, {p.x, p.y}, std::max(xi_hi, p.x));
}

StripRegion trapezoid_T(const Region& region, Point p) {
    Membership m = region.membership(p);
    if (m != Membership::InABC && m != Membership::OnAC)
        throw PointOutsideRegion("trapezoid T requires a point of closed ABC");
    return make_strip(region, p, region.x_A());
}

// ---------------------------------------------------------------------------
// Trapezoid ladder
// ---------------------------------------------------------------------------

TrapezoidLadder build_ladder(const Region& region, int N_max) {
    if (!region.curves().is_affine())
        throw NotAffine("trapezoid ladder is defined for affine curves only");
    if (region.configuration().kind != CaseKind::UnstableCaseII)
        throw NotCaseII("trapezoid ladder requires the unstable configuration");
    const double a = region.curves().a_slope();
    const double b = region.curves().b_slope();
    TrapezoidLadder ladder;
    ladder.A_pts.push_back(region.A());
    ladder.C_pts.push_back(region.C());
    for (int i = 1; i <= N_max; ++i) {
        double xA = ladder.C_pts.back().x;        // A_i := (x_{C_{i-1}}, x_{C_{i-1}}/a)
        Point Ai{xA, xA / a};
        Point Ci{Ai.y / b, Ai.y};                 // C_i := (y_{A_i}/b, y_{A_i})
        ladder.A_pts.push_back(Ai);
        ladder.C_pts.push_back(Ci);
    }
    return ladder;
}

bool in_ladder_band(const Region& region, const TrapezoidLadder& ladder, int N, Point p) {
    if (N < 1 || N > ladder.depth()) return false;
    const double ey = region.boundary_tol();
    const double ex = 1e-12 * region.x_A();
    const double y_top = ladder.A_pts[N - 1].y;
    const double y_bot = ladder.A_pts[N].y;
    if (!(p.y > y_bot + ey)) return false;
    if (p.y > y_top + ey) return false;
    // strictly between the curves
    double a_val = region.curves().a(std::clamp(p.y, 0.0, region.y_A()));
    double binv = region.curves().b_inv(p.y);
    if (!(p.x > binv + ex) || !(p.x < a_val - ex)) return false;
    return true;
}

bool in_ladder_triangle(const Region& region, const TrapezoidLadder& ladder, int n, Point p) {
    if (n < 0 || n > ladder.depth()) return false;
    const double ey = region.boundary_tol();
    if (p.y > ladder.A_pts[n].y + ey) return false;
    return region.membership(p) != Membership::Outside;
}

} // namespace charpic
