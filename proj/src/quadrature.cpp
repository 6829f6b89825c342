#include "charpic/quadrature.hpp"

#include <cmath>

namespace charpic {

namespace {

int round_up_even(int n) { return (n % 2 == 0) ? n : n + 1; }

} // namespace

QuadratureRule QuadratureRule::fixed(int n_outer, int n_inner) {
    QuadratureRule r;
    r.n_outer = round_up_even(std::max(2, n_outer));
    r.n_inner_min = round_up_even(std::max(2, n_inner));
    return r;
}

QuadratureRule QuadratureRule::for_grid(double hx, double hy, int n_outer_min, int n_inner_min) {
    QuadratureRule r;
    r.n_outer = round_up_even(std::max(2, n_outer_min));
    r.n_inner_min = round_up_even(std::max(2, n_inner_min));
    r.target_dx = hx;
    r.target_dy = hy;
    return r;
}

int QuadratureRule::resolve_outer(double width) const {
    int n = n_outer;
    if (target_dx > 0.0)
        n = std::max(n, static_cast<int>(std::ceil(std::abs(width) / target_dx)));
    return round_up_even(std::max(2, n));
}

int QuadratureRule::resolve_inner(double height) const {
    int n = n_inner_min;
    if (target_dy > 0.0)
        n = std::max(n, static_cast<int>(std::ceil(std::abs(height) / target_dy)));
    return round_up_even(std::max(2, n));
}

double integrate_1d(const std::function<double(double)>& g, double lo, double hi, int n) {
    if (lo == hi) return 0.0;
    if (lo > hi) return -integrate_1d(g, hi, lo, n);
    n = round_up_even(std::max(2, n));
    const double h = (hi - lo) / n;
    double sum = 0.5 * (g(lo) + g(hi));
    for (int k = 1; k < n; ++k) sum += g(lo + k * h);
    return sum * h;
}

double integrate_1d(const std::function<double(double)>& g, double lo, double hi,
                    const QuadratureRule& rule) {
    return integrate_1d(g, lo, hi, rule.resolve_outer(hi - lo));
}

double integrate_strip(const std::function<double(double, double)>& g, double xi_lo, double xi_hi,
                       double eta_lo, const std::function<double(double)>& b_curve,
                       const QuadratureRule& rule) {
    if (xi_lo == xi_hi) return 0.0;
    if (xi_lo > xi_hi) return -integrate_strip(g, xi_hi, xi_lo, eta_lo, b_curve, rule);
    auto inner = [&](double xi) {
        double top = b_curve(xi);
        auto slice = [&](double eta) { return g(xi, eta); };
        return integrate_1d(slice, eta_lo, top, rule.resolve_inner(top - eta_lo));
    };
    return integrate_1d(inner, xi_lo, xi_hi, rule.resolve_outer(xi_hi - xi_lo));
}

double integrate_strip(const std::function<double(double, double)>& g, const StripRegion& strip,
                       const CurvePair& curves, const QuadratureRule& rule) {
    auto b = [&curves](double xi) { return curves.b(xi); };
    return integrate_strip(g, strip.xi_lo, strip.xi_hi, strip.eta_lo, b, rule);
}

} // namespace charpic
