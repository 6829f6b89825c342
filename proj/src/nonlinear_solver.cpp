#include "charpic/nonlinear_solver.hpp"

#include <algorithm>
#include <cmath>

namespace charpic {

ContractionParams ContractionParams::compute(double L, const Region& region) {
    ContractionParams c;
    c.L = L;
    c.gamma = region.gamma();
    c.l = region.x_A();
    c.h = region.y_B();
    c.alpha = region.area();
    c.mu = L * (2.0 * c.gamma * c.h + 2.0 * c.l + c.h);
    return c;
}

Region shrink_region(const Region& region, double new_x_A) {
    return Region(region.curves().with_x_A(new_x_A));
}

NonlinearState base_step(const BoundaryData& data, const Region& region, GridSpecPtr grid) {
    const GridSpec& spec = *grid;
    const double y_A = region.y_A();
    const double x_A = region.x_A();
    const double ey = region.boundary_tol();
    const double sigma0 = data.phi_prime(y_A) - region.curves().a_deriv(y_A) * data.psi_at(x_A);

    NonlinearState st;
    st.n = 0;
    st.theta = ThetaFunction::affine(y_A, data.phi_at(y_A), sigma0);
    st.sigmas.push_back(sigma0);
    st.v.u = GridField(grid);
    st.v.p = GridField(grid);
    st.v.q = GridField(grid);

    PsiIntegrals psi_int(region, spec, data.psi);
    for (int j = 0; j < spec.ny(); ++j) {
        int lo = spec.row_lo(j), hi = spec.row_hi(j);
        if (lo > hi) continue;
        double y = spec.y(j);
        bool oac_row = y <= y_A + ey;
        double yc = std::clamp(y, 0.0, y_A);
        for (int i = lo; i <= hi; ++i) {
            if (!spec.masked(i, j)) continue;
            st.v.p.at(i, j) = data.psi_at(spec.x(i));
            if (oac_row) {
                st.v.u.at(i, j) = data.phi_at(yc) - psi_int.to_M(i, j);
                double a1 = region.curves().a_deriv(yc);
                st.v.q.at(i, j) = data.phi_prime(yc) - a1 * data.psi_at(region.curves().a(yc));
            } else {
                st.v.u.at(i, j) = st.theta(y) - psi_int.to_AB(i);
                st.v.q.at(i, j) = st.theta.deriv(y);
            }
        }
    }
    return st;
}

NonlinearState iterate_step(NonlinearState state, const RhsFunction& f, const BoundaryData& data,
                            const Region& region, GridSpecPtr grid, const QuadratureRule& rule) {
    const GridSpec& spec = *grid;
    const double y_A = region.y_A();
    const double ey = region.boundary_tol();

    // theta first: its slope feeds the new u and q on ABC
    ThetaFunction theta_next = theta_affine_next(state.v, state.theta, data, f, region, rule);

    IntegrandView g = IntegrandView::of_rhs(f, state.v);
    SweepIntegrals integrals(region, spec, g, rule);
    PsiIntegrals psi_int(region, spec, data.psi);

    FieldTriple next;
    next.u = GridField(grid);
    next.p = GridField(grid);
    next.q = GridField(grid);

    for (int j = 0; j < spec.ny(); ++j) {
        int lo = spec.row_lo(j), hi = spec.row_hi(j);
        if (lo > hi) continue;
        double y = spec.y(j);
        bool oac_row = y <= y_A + ey;
        double yc = std::clamp(y, 0.0, y_A);
        double a1 = oac_row ? region.curves().a_deriv(yc) : 0.0;
        double psi_at_M = oac_row ? data.psi_at(std::min(region.curves().a(yc), region.x_A())) : 0.0;
        for (int i = lo; i <= hi; ++i) {
            if (!spec.masked(i, j)) continue;
            next.p.at(i, j) = data.psi_at(spec.x(i)) - integrals.column_to_curve(i, j);
            if (oac_row) {
                next.u.at(i, j) =
                    data.phi_at(yc) - psi_int.to_M(i, j) + integrals.strip_tau(i, j);
                next.q.at(i, j) = data.phi_prime(yc) -
                                  a1 * (psi_at_M - integrals.edge_column(j)) -
                                  integrals.row_to_M(i, j);
            } else {
                next.u.at(i, j) = theta_next(y) - psi_int.to_AB(i) + integrals.strip_T(i, j);
                next.q.at(i, j) = theta_next.deriv(y) - integrals.row_to_AB(i, j);
            }
        }
    }

    std::array<double, 3> comp = {sup_diff(next.u, state.v.u), sup_diff(next.p, state.v.p),
                                  sup_diff(next.q, state.v.q)};
    state.deltas.push_back(comp[0] + comp[1] + comp[2]);
    state.component_deltas.push_back(comp);
    state.sigmas.push_back(theta_next.slope());
    state.v = std::move(next);
    state.theta = theta_next;
    ++state.n;
    return state;
}

FixedPointReport verify_fixed_point(const FieldTriple& v, const ThetaFunction& theta,
                                    const RhsFunction& f, const BoundaryData& data,
                                    const Region& region, GridSpecPtr grid,
                                    const QuadratureRule& rule, int probe_res) {
    const GridSpec& spec = *grid;
    FixedPointReport rep;
    const double y_A = region.y_A(), x_A = region.x_A(), y_B = region.y_B();
    const double ey = region.boundary_tol();

    auto g_interp = [&](double xi, double eta) {
        Point pt{xi, eta};
        return f(xi, eta, interpolate(v.u, pt), interpolate(v.p, pt), interpolate(v.q, pt));
    };
    auto b = [&](double x) { return region.curves().b(std::clamp(x, 0.0, x_A)); };
    auto psi_fn = [&](double xi) { return data.psi_at(xi); };

    for (int pj = 0; pj < probe_res; ++pj) {
        for (int pi = 0; pi < probe_res; ++pi) {
            Point pt{x_A * pi / (probe_res - 1), y_B * pj / (probe_res - 1)};
            Membership m = region.membership(pt);
            if (m == Membership::Outside) continue;
            ++rep.probes;
            double u_val = interpolate(v.u, pt);
            if (m == Membership::InOAC || m == Membership::OnAC) {
                double yc = std::clamp(pt.y, 0.0, y_A);
                double xi_hi = std::min(region.curves().a(yc), x_A);
                double rhs = data.phi_at(yc) -
                             integrate_1d(psi_fn, pt.x, xi_hi, rule.resolve_outer(xi_hi - pt.x)) +
                             integrate_strip(g_interp, pt.x, xi_hi, pt.y, b, rule);
                rep.max_defect_oac = std::max(rep.max_defect_oac, std::abs(u_val - rhs));
            } else {
                double rhs = theta(pt.y) -
                             integrate_1d(psi_fn, pt.x, x_A, rule.resolve_outer(x_A - pt.x)) +
                             integrate_strip(g_interp, pt.x, x_A, pt.y, b, rule);
                rep.max_defect_abc = std::max(rep.max_defect_abc, std::abs(u_val - rhs));
            }
        }
    }

    // p = D_x u and q = D_y u at interior nodes (centered differences)
    for (int j = 1; j < spec.ny() - 1; ++j) {
        bool straddles_ac = std::abs(spec.y(j) - y_A) < spec.hy() - ey;
        for (int i = std::max(1, spec.row_lo(j)); i <= std::min(spec.nx() - 2, spec.row_hi(j));
             ++i) {
            if (!spec.masked(i, j) || !spec.masked(i - 1, j) || !spec.masked(i + 1, j) ||
                !spec.masked(i, j - 1) || !spec.masked(i, j + 1))
                continue;
            double dx = (v.u(i + 1, j) - v.u(i - 1, j)) / (2.0 * spec.hx());
            double dy = (v.u(i, j + 1) - v.u(i, j - 1)) / (2.0 * spec.hy());
            rep.max_p_defect = std::max(rep.max_p_defect, std::abs(dx - v.p(i, j)));
            if (straddles_ac)
                rep.max_q_defect_ac = std::max(rep.max_q_defect_ac, std::abs(dy - v.q(i, j)));
            else
                rep.max_q_defect = std::max(rep.max_q_defect, std::abs(dy - v.q(i, j)));
        }
    }
    return rep;
}

NonlinearSolveResult solve_nonlinear(const RhsFunction& f, const BoundaryData& data,
                                     const Region& region, int nx, int ny,
                                     const NonlinearOptions& options) {
    NonlinearSolveResult res;
    Region cur = region;

    for (int halving = 0;; ++halving) {
        res.halvings = halving;
        res.region = cur;
        res.grid = GridSpec::for_region(cur, nx, ny);
        QuadratureRule rule = QuadratureRule::for_grid(res.grid->hx(), res.grid->hy());

        NonlinearState st = base_step(data, cur, res.grid);

        double L;
        if (options.lipschitz_override) {
            L = *options.lipschitz_override;
            res.lipschitz_estimated = false;
        } else {
            if (!f.ast())
                throw ConfigError(
                    "a Lipschitz constant must be supplied when f is not an expression");
            // Box: base-step field ranges inflated by sup|f| * area.
            auto range_of = [&](const GridField& fld) {
                const GridSpec& s = fld.spec();
                double lo = 0.0, hi = 0.0;
                bool first = true;
                for (int j = 0; j < s.ny(); ++j)
                    for (int i = s.row_lo(j); i <= s.row_hi(j); ++i) {
                        if (!s.masked(i, j)) continue;
                        double val = fld(i, j);
                        if (first) { lo = hi = val; first = false; }
                        lo = std::min(lo, val);
                        hi = std::max(hi, val);
                    }
                return std::array<double, 2>{lo, hi};
            };
            expr::LipschitzBox box;
            box.u_range = range_of(st.v.u);
            box.p_range = range_of(st.v.p);
            box.q_range = range_of(st.v.q);
            box.x_range = {0.0, cur.x_A()};
            box.y_range = {0.0, cur.y_B()};
            double sup0 = 0.0;
            const GridSpec& s = *res.grid;
            for (int j = 0; j < s.ny(); ++j)
                for (int i = s.row_lo(j); i <= s.row_hi(j); ++i)
                    if (s.masked(i, j))
                        sup0 = std::max(sup0, std::abs(f(s.x(i), s.y(j), st.v.u(i, j),
                                                         st.v.p(i, j), st.v.q(i, j))));
            double inflate = std::max(sup0 * cur.area(), 1e-3);
            for (auto* r : {&box.u_range, &box.p_range, &box.q_range}) {
                (*r)[0] -= inflate;
                (*r)[1] += inflate;
            }
            box = expr::estimate_lipschitz(*f.ast(), box, options.lipschitz_density);
            res.lipschitz = box;
            L = box.lipschitz;
            res.lipschitz_estimated = true;
        }
        res.contraction = ContractionParams::compute(L, cur);

        if (res.contraction.mu >= 1.0) {
            if (!options.shrink) {
                res.mu_flagged = true;
            } else if (halving < options.max_halvings) {
                cur = shrink_region(cur, 0.5 * cur.x_A());
                continue;
            } else {
                throw ContractionUnachievable(
                    "mu >= 1 after " + std::to_string(options.max_halvings) + " halvings of x_A");
            }
        }

        for (int n = 1; n <= options.max_iter; ++n) {
            st = iterate_step(std::move(st), f, data, cur, res.grid, rule);
            double delta = st.deltas.back();
            bool done = delta == 0.0 || delta < options.tol;
            // f independent of v reaches its fixed point after the first
            // correction; n >= 2 keeps at least one genuine contraction step
            // in the history for v-dependent f.
            if (done && (n >= 2 || !f.depends_on_v() || delta == 0.0)) {
                res.converged = true;
                break;
            }
        }
        if (!res.converged) res.max_iter_exceeded = true;

        res.v = std::move(st.v);
        res.theta = st.theta;
        res.deltas = std::move(st.deltas);
        res.sigmas = std::move(st.sigmas);
        res.component_deltas = std::move(st.component_deltas);
        res.iterations = static_cast<int>(res.deltas.size());

        const GridSpec& s = *res.grid;
        double supf = 0.0;
        for (int j = 0; j < s.ny(); ++j)
            for (int i = s.row_lo(j); i <= s.row_hi(j); ++i)
                if (s.masked(i, j))
                    supf = std::max(supf, std::abs(f(s.x(i), s.y(j), res.v.u(i, j),
                                                     res.v.p(i, j), res.v.q(i, j))));
        res.sup_f_estimate = supf;
        return res;
    }
}

} // namespace charpic
