#include "charpic/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace charpic {

IntegrandView IntegrandView::of_field(const GridField& f) {
    IntegrandView v;
    v.node = [&f](int i, int j) { return f(i, j); };
    v.at = [&f](double x, double y) { return interpolate(f, {x, y}); };
    return v;
}

IntegrandView IntegrandView::of_xy(const GridSpec& spec,
                                   const std::function<double(double, double)>& g) {
    IntegrandView v;
    v.node = [&spec, g](int i, int j) { return g(spec.x(i), spec.y(j)); };
    v.at = g;
    return v;
}

IntegrandView IntegrandView::of_rhs(const RhsFunction& f, const FieldTriple& v) {
    IntegrandView view;
    const GridSpec& spec = v.u.spec();
    view.node = [&f, &v, &spec](int i, int j) {
        return f(spec.x(i), spec.y(j), v.u(i, j), v.p(i, j), v.q(i, j));
    };
    view.at = [&f, &v](double x, double y) {
        Point pt{x, y};
        return f(x, y, interpolate(v.u, pt), interpolate(v.p, pt), interpolate(v.q, pt));
    };
    return view;
}

SweepIntegrals::SweepIntegrals(const Region& region, const GridSpec& spec,
                               const IntegrandView& g, const QuadratureRule& rule)
    : spec_(&spec) {
    const int nx = spec.nx(), ny = spec.ny();
    const double hx = spec.hx(), hy = spec.hy();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double ey = region.boundary_tol();
    const double y_A = region.y_A();
    const double x_A = region.x_A();

    H_.assign(spec.size(), nan);
    Dtau_.assign(spec.size(), nan);
    DT_.assign(spec.size(), nan);
    Rtau_.assign(spec.size(), nan);
    RT_.assign(spec.size(), nan);
    E_.assign(ny, nan);
    row_oac_.assign(ny, 0);
    row_abc_.assign(ny, 0);

    // Nodal integrand values, evaluated once.
    std::vector<double> gn(spec.size(), nan);
    for (int j = 0; j < ny; ++j)
        for (int i = spec.row_lo(j); i <= spec.row_hi(j); ++i)
            if (spec.masked(i, j)) gn[spec.idx(i, j)] = g.node(i, j);

    // Column integrals up to the curve N: top partial cell, then march down.
    for (int i = 0; i < nx; ++i) {
        int jlo = spec.col_lo(i), jhi = spec.col_hi(i);
        if (jlo > jhi) continue;
        double x = spec.x(i);
        double top = region.curves().b(std::clamp(x, 0.0, x_A));
        double width = std::max(0.0, top - spec.y(jhi));
        double head = 0.0;
        if (width > ey) head = 0.5 * width * (gn[spec.idx(i, jhi)] + g.at(x, top));
        H_[spec.idx(i, jhi)] = head;
        for (int j = jhi - 1; j >= jlo; --j)
            H_[spec.idx(i, j)] =
                H_[spec.idx(i, j + 1)] + 0.5 * hy * (gn[spec.idx(i, j)] + gn[spec.idx(i, j + 1)]);
    }

    for (int j = 0; j < ny; ++j) {
        int lo = spec.row_lo(j), hi = spec.row_hi(j);
        if (lo > hi) continue;
        double y = spec.y(j);
        bool oac = y <= y_A + ey;
        bool abc = y >= y_A - ey;
        row_oac_[j] = oac;
        row_abc_[j] = abc;

        if (abc) {
            // integrals reaching the vertical segment AB (x = x_A, grid-exact)
            DT_[spec.idx(hi, j)] = 0.0;
            RT_[spec.idx(hi, j)] = 0.0;
            for (int i = hi - 1; i >= lo; --i) {
                DT_[spec.idx(i, j)] = DT_[spec.idx(i + 1, j)] +
                                      0.5 * hx * (H_[spec.idx(i, j)] + H_[spec.idx(i + 1, j)]);
                RT_[spec.idx(i, j)] = RT_[spec.idx(i + 1, j)] +
                                      0.5 * hx * (gn[spec.idx(i, j)] + gn[spec.idx(i + 1, j)]);
            }
        }
        if (oac) {
            // integrals reaching the curve M (xi up to a(y_j), off-grid)
            double X_r = std::min(region.curves().a(std::clamp(y, 0.0, y_A)), x_A);
            double b_at_Xr = region.curves().b(X_r);
            auto edge_slice = [&](double eta) { return g.at(X_r, eta); };
            E_[j] = integrate_1d(edge_slice, y, b_at_Xr, rule.resolve_inner(b_at_Xr - y));
            double w = std::max(0.0, X_r - spec.x(hi));
            double dtau_head = 0.0, rtau_head = 0.0;
            if (w > 1e-12 * x_A) {
                dtau_head = 0.5 * w * (H_[spec.idx(hi, j)] + E_[j]);
                rtau_head = 0.5 * w * (gn[spec.idx(hi, j)] + g.at(X_r, y));
            }
            Dtau_[spec.idx(hi, j)] = dtau_head;
            Rtau_[spec.idx(hi, j)] = rtau_head;
            for (int i = hi - 1; i >= lo; --i) {
                Dtau_[spec.idx(i, j)] = Dtau_[spec.idx(i + 1, j)] +
                                        0.5 * hx * (H_[spec.idx(i, j)] + H_[spec.idx(i + 1, j)]);
                Rtau_[spec.idx(i, j)] = Rtau_[spec.idx(i + 1, j)] +
                                        0.5 * hx * (gn[spec.idx(i, j)] + gn[spec.idx(i + 1, j)]);
            }
        }
    }
}

PsiIntegrals::PsiIntegrals(const Region& region, const GridSpec& spec, const ScalarFunction& psi) {
    const int nx = spec.nx(), ny = spec.ny();
    const double hx = spec.hx();
    const double x_A = region.x_A();
    const double y_A = region.y_A();
    const double ey = region.boundary_tol();

    std::vector<double> psi_n(nx);
    for (int i = 0; i < nx; ++i) psi_n[i] = psi(spec.x(i));

    to_right_.assign(nx, 0.0);
    for (int i = nx - 2; i >= 0; --i)
        to_right_[i] = to_right_[i + 1] + 0.5 * hx * (psi_n[i] + psi_n[i + 1]);

    row_K_.assign(ny, nx - 1);
    row_partial_.assign(ny, 0.0);
    for (int j = 0; j < ny; ++j) {
        double y = spec.y(j);
        if (y > y_A + ey) continue;
        double X_r = std::min(region.curves().a(std::clamp(y, 0.0, y_A)), x_A);
        int K = std::clamp(static_cast<int>(X_r / hx + 1e-12), 0, nx - 1);
        double w = std::max(0.0, X_r - spec.x(K));
        row_K_[j] = K;
        row_partial_[j] = 0.5 * w * (psi_n[K] + psi(X_r));
    }
}

} // namespace charpic
