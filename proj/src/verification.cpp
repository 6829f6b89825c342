#include "charpic/verification.hpp"

#include <algorithm>
#include <cmath>

#include "charpic/quadrature.hpp"
#include "charpic/sweep.hpp"

namespace charpic {

// ---------------------------------------------------------------------------
// Case I
// ---------------------------------------------------------------------------

GridSpecPtr stable_grid(const CurvePair& curves, int nx, int ny) {
    const double X = curves.x_A();
    const double Y = curves.y_A(); // top corner height: a(y) = x has y = y_A at x = x_A
    CurvePair c = curves;
    auto inside = [c, X, Y](double x, double y) {
        const double ex = 1e-12 * X;
        const double ey = 1e-12 * std::max(Y, c.y_B());
        if (x < -ex || x > X + ex || y < -ey || y > Y + ey) return false;
        if (y < c.b(std::clamp(x, 0.0, X)) - ey) return false;          // below N
        if (c.a(std::clamp(y, 0.0, Y)) > x + ex) return false;          // left of M
        return true;
    };
    return std::make_shared<GridSpec>(nx, ny, X, Y, inside);
}

namespace {

// One application of the Case I integral formula with integrand g:
//   u(x,y) = phi(y) + int_{a(y)}^x psi(xi) dxi
//          + int_{a(y)}^x int_{b(xi)}^y g(xi,eta) deta dxi.
GridField stable_apply(const CurvePair& curves, GridSpecPtr grid, const BoundaryData& data,
                       const IntegrandView* g, const QuadratureRule& rule) {
    const GridSpec& spec = *grid;
    const int nx = spec.nx(), ny = spec.ny();
    const double hx = spec.hx(), hy = spec.hy();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double Y = spec.y_span();

    // column integrals from the lower curve N up to each node
    std::vector<double> G(spec.size(), nan);
    if (g) {
        for (int i = 0; i < nx; ++i) {
            int jlo = spec.col_lo(i), jhi = spec.col_hi(i);
            if (jlo > jhi) continue;
            double x = spec.x(i);
            double bottom = curves.b(x);
            double w = std::max(0.0, spec.y(jlo) - bottom);
            double head = 0.0;
            if (w > 1e-12 * std::max(Y, 1.0))
                head = 0.5 * w * (g->at(x, bottom) + g->node(i, jlo));
            G[spec.idx(i, jlo)] = head;
            for (int j = jlo + 1; j <= jhi; ++j)
                G[spec.idx(i, j)] =
                    G[spec.idx(i, j - 1)] + 0.5 * hy * (g->node(i, j - 1) + g->node(i, j));
        }
    }

    // cumulative psi from the left edge
    std::vector<double> psi_n(nx), Cpsi(nx, 0.0);
    for (int i = 0; i < nx; ++i) psi_n[i] = data.psi_at(spec.x(i));
    for (int i = 1; i < nx; ++i) Cpsi[i] = Cpsi[i - 1] + 0.5 * hx * (psi_n[i - 1] + psi_n[i]);

    GridField u(grid);
    for (int j = 0; j < ny; ++j) {
        int lo = spec.row_lo(j), hi = spec.row_hi(j);
        if (lo > hi) continue;
        double y = spec.y(j);
        double yc = std::clamp(y, 0.0, Y);
        double X_l = curves.a(yc);
        double w = std::max(0.0, spec.x(lo) - X_l);

        // psi between the curve M and the first grid column
        double psi_partial = 0.5 * w * (data.psi_at(X_l) + psi_n[lo]);

        // inner integral at the off-grid left end
        double E = 0.0, strip = 0.0, strip_prev = 0.0;
        if (g) {
            double bottom = curves.b(X_l);
            E = integrate_1d([&](double eta) { return g->at(X_l, eta); }, bottom, y,
                             rule.resolve_inner(y - bottom));
            strip_prev = (w > 1e-12) ? 0.5 * w * (E + G[spec.idx(lo, j)]) : 0.0;
        }
        for (int i = lo; i <= hi; ++i) {
            if (i > lo) {
                strip = strip_prev +
                        (g ? 0.5 * hx * (G[spec.idx(i - 1, j)] + G[spec.idx(i, j)]) : 0.0);
                strip_prev = strip;
            } else {
                strip = strip_prev;
            }
            if (!spec.masked(i, j)) continue;
            double psi_int = psi_partial + (Cpsi[i] - Cpsi[lo]);
            u.at(i, j) = data.phi_at(yc) + psi_int + (g ? strip : 0.0);
        }
    }
    return u;
}

} // namespace

StableSolveResult solve_stable_case_I(const BoundaryData& data, const CurvePair& curves,
                                      int nx, int ny, double tol, int max_iter) {
    Configuration cfg = classify_configuration(curves);
    if (cfg.kind != CaseKind::StableCaseI)
        throw NotCaseI("the stable-case solver requires b(a(y)) < y on (0, y_A]");
    GridSpecPtr grid = stable_grid(curves, nx, ny);
    QuadratureRule rule = QuadratureRule::for_grid(grid->hx(), grid->hy());

    StableSolveResult res;
    res.u = stable_apply(curves, grid, data, nullptr, rule);
    for (int n = 1; n <= max_iter; ++n) {
        IntegrandView g = IntegrandView::of_field(res.u);
        GridField next = stable_apply(curves, grid, data, &g, rule);
        double delta = sup_diff(next, res.u);
        res.deltas.push_back(delta);
        res.u = std::move(next);
        if (delta == 0.0 || (delta < tol && n >= 3)) {
            res.converged = true;
            return res;
        }
    }
    res.max_iter_exceeded = true;
    return res;
}

GridField solve_stable_elementary(const std::function<double(double, double)>& f_xy,
                                  const BoundaryData& data, const CurvePair& curves,
                                  int nx, int ny) {
    Configuration cfg = classify_configuration(curves);
    if (cfg.kind != CaseKind::StableCaseI)
        throw NotCaseI("the stable-case solver requires b(a(y)) < y on (0, y_A]");
    GridSpecPtr grid = stable_grid(curves, nx, ny);
    QuadratureRule rule = QuadratureRule::for_grid(grid->hx(), grid->hy());
    IntegrandView g = IntegrandView::of_xy(*grid, f_xy);
    return stable_apply(curves, grid, data, &g, rule);
}

// ---------------------------------------------------------------------------
// Bessel series
// ---------------------------------------------------------------------------

double bessel_series(double z, int n_terms) {
    double sum = 0.0, term = 1.0;
    for (int n = 0; n < std::max(1, n_terms); ++n) {
        sum += term;
        double k = static_cast<double>(n + 1);
        term *= z / (k * k);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

ResidualReport residual_mixed_derivative(const FieldTriple& v, const RhsFunction& f) {
    const GridSpec& s = v.u.spec();
    ResidualReport rep;
    rep.hx = s.hx();
    rep.hy = s.hy();
    double sum = 0.0;
    for (int j = 2; j < s.ny() - 2; ++j) {
        for (int i = 2; i < s.nx() - 2; ++i) {
            bool ok = true;
            for (int dj = -2; dj <= 2 && ok; ++dj)
                for (int di = -2; di <= 2 && ok; ++di)
                    ok = s.masked(i + di, j + dj);
            if (!ok) continue;
            double dxy = (v.u(i + 1, j + 1) - v.u(i + 1, j - 1) - v.u(i - 1, j + 1) +
                          v.u(i - 1, j - 1)) /
                         (4.0 * s.hx() * s.hy());
            double rhs = f(s.x(i), s.y(j), v.u(i, j), v.p(i, j), v.q(i, j));
            double r = std::abs(dxy - rhs);
            rep.max_residual = std::max(rep.max_residual, r);
            sum += r;
            ++rep.probes;
        }
    }
    rep.mean_residual = rep.probes > 0 ? sum / rep.probes : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Grid convergence
// ---------------------------------------------------------------------------

double nested_sup_diff(const GridField& coarse, const GridField& fine) {
    const GridSpec& sc = coarse.spec();
    const GridSpec& sf = fine.spec();
    int r = (sf.nx() - 1) / (sc.nx() - 1);
    if (r * (sc.nx() - 1) != sf.nx() - 1 || ((sf.ny() - 1) % (sc.ny() - 1)) != 0)
        throw GridMismatch("grids are not nested");
    int ry = (sf.ny() - 1) / (sc.ny() - 1);
    double m = 0.0;
    for (int j = 0; j < sc.ny(); ++j)
        for (int i = sc.row_lo(j); i <= sc.row_hi(j); ++i) {
            if (!sc.masked(i, j)) continue;
            if (!sf.masked(i * r, j * ry)) continue;
            m = std::max(m, std::abs(coarse(i, j) - fine(i * r, j * ry)));
        }
    return m;
}

ConvergenceStudy grid_convergence(const std::function<GridField(int)>& solve,
                                  const std::vector<int>& sizes) {
    ConvergenceStudy study;
    study.sizes = sizes;
    for (int n : sizes) study.fields.push_back(solve(n));
    for (std::size_t k = 1; k < study.fields.size(); ++k)
        study.diffs.push_back(nested_sup_diff(study.fields[k - 1], study.fields[k]));
    if (study.diffs.size() >= 2) {
        double d1 = study.diffs[study.diffs.size() - 2];
        double d2 = study.diffs[study.diffs.size() - 1];
        if (d2 <= 0.0 && d1 <= 0.0) {
            study.non_monotone = true; // constant output; order undefined
        } else if (d2 <= 0.0) {
            study.order = 10.0; // exact agreement on the finest pair
            study.richardson_error = 0.0;
        } else if (d2 >= d1) {
            study.non_monotone = true;
            study.richardson_error = d2;
        } else {
            study.order = std::log2(d1 / d2);
            double p = std::clamp(study.order, 0.5, 4.0);
            study.richardson_error = d2 / (std::pow(2.0, p) - 1.0);
        }
    } else if (study.diffs.size() == 1) {
        study.richardson_error = study.diffs[0] / 3.0;
    }
    return study;
}

// ---------------------------------------------------------------------------
// Boundary reproduction
// ---------------------------------------------------------------------------

BoundaryReproduction boundary_reproduction(const GridField& u, const BoundaryData& data,
                                           const ThetaFunction* theta, const Region& region,
                                           const QuadratureRule& rule, const IntegrandView& rhs) {
    const GridSpec& s = u.spec();
    BoundaryReproduction rep;
    const int K = 201;
    for (int k = 0; k <= K; ++k) {
        double y = region.y_A() * k / K;
        Point pt{std::min(region.curves().a(y), region.x_A()), y};
        rep.max_phi_defect =
            std::max(rep.max_phi_defect, std::abs(interpolate(u, pt) - data.phi_at(y)));
    }
    if (theta) {
        for (int k = 0; k <= K; ++k) {
            double y = region.y_A() + (region.y_B() - region.y_A()) * k / K;
            Point pt{region.x_A(), y};
            rep.max_theta_defect =
                std::max(rep.max_theta_defect, std::abs(interpolate(u, pt) - (*theta)(y)));
        }
    }
    // u_x along N through centered differences one node inside, compared with
    // psi(x) minus the column integral of the right-hand side.
    SweepIntegrals integrals(region, s, rhs, rule);
    for (int i = 1; i < s.nx() - 1; ++i) {
        int j = s.col_hi(i) - 1;
        if (j <= s.col_lo(i)) continue;
        if (!s.masked(i - 1, j) || !s.masked(i + 1, j) || !s.masked(i, j)) continue;
        double dxu = (u(i + 1, j) - u(i - 1, j)) / (2.0 * s.hx());
        double expected = data.psi_at(s.x(i)) - integrals.column_to_curve(i, j);
        rep.max_psi_defect = std::max(rep.max_psi_defect, std::abs(dxu - expected));
    }
    return rep;
}

} // namespace charpic
