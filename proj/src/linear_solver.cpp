#include "charpic/linear_solver.hpp"

#include <algorithm>
#include <cmath>

namespace charpic {

namespace {

// u on OAC (y <= y_A): phi(y) - int_x^{a(y)} psi + strip_tau;
// u on ABC: theta(y) - int_x^{x_A} psi + strip_T. Nodes on AC take the OAC
// branch; theta(y_A) = phi(y_A) makes the two agree there.
GridField assemble_u(const Region& region, const GridSpec& spec, const BoundaryData& data,
                     const ThetaFunction& theta, const PsiIntegrals& psi_int,
                     const SweepIntegrals* integrals, GridSpecPtr spec_ptr) {
    GridField u(spec_ptr);
    const double y_A = region.y_A();
    const double ey = region.boundary_tol();
    for (int j = 0; j < spec.ny(); ++j) {
        int lo = spec.row_lo(j), hi = spec.row_hi(j);
        if (lo > hi) continue;
        double y = spec.y(j);
        bool oac_row = y <= y_A + ey;
        for (int i = lo; i <= hi; ++i) {
            if (!spec.masked(i, j)) continue;
            if (oac_row) {
                double v = data.phi_at(std::clamp(y, 0.0, y_A)) - psi_int.to_M(i, j);
                if (integrals) v += integrals->strip_tau(i, j);
                u.at(i, j) = v;
            } else {
                double v = theta(y) - psi_int.to_AB(i);
                if (integrals) v += integrals->strip_T(i, j);
                u.at(i, j) = v;
            }
        }
    }
    return u;
}

} // namespace

ElementarySolution solve_elementary(const std::function<double(double, double)>& f_xy,
                                    const BoundaryData& data, const ThetaFunction& theta,
                                    const Region& region, GridSpecPtr grid,
                                    const QuadratureRule& rule) {
    const GridSpec& spec = *grid;
    ElementarySolution sol;
    sol.theta_report = check_theta_elementary(theta, data, f_xy, region, rule);
    const double scale = std::max({1.0, std::abs(sol.theta_report.lhs),
                                   std::abs(sol.theta_report.rhs)});
    if (sol.theta_report.value_defect > 1e-9 * std::max(1.0, std::abs(data.phi_at(region.y_A()))))
        throw ThetaIncompatible("theta(y_A) != phi(y_A) (condition A5)");
    sol.theta_slope_warning = sol.theta_report.defect > 1e-6 * scale;

    PsiIntegrals psi_int(region, spec, data.psi);
    IntegrandView g = IntegrandView::of_xy(spec, f_xy);
    SweepIntegrals integrals(region, spec, g, rule);
    sol.u = assemble_u(region, spec, data, theta, psi_int, &integrals, grid);

    // Boundary defects through the formulas evaluated on the curves. The
    // strip integrals collapse there, so these catch limit-handling and
    // data-evaluation errors.
    const int K = 256;
    double d_phi = 0.0, d_psi = 0.0, d_theta = 0.0;
    auto b = [&](double x) { return region.curves().b(x); };
    for (int k = 0; k <= K; ++k) {
        double y = region.y_A() * k / K;
        double x_on_M = region.curves().a(y);
        double u_val = data.phi_at(y) -
                       integrate_1d([&](double xi) { return data.psi_at(xi); }, x_on_M, x_on_M, 2) +
                       integrate_strip(f_xy, x_on_M, x_on_M, y, b, rule);
        d_phi = std::max(d_phi, std::abs(u_val - data.phi_at(y)));

        double x = region.x_A() * k / K;
        double ux_val = data.psi_at(x) -
                        integrate_1d([&](double eta) { return f_xy(x, eta); }, b(x), b(x), 2);
        d_psi = std::max(d_psi, std::abs(ux_val - data.psi_at(x)));

        double yab = region.y_A() + (region.y_B() - region.y_A()) * k / K;
        double u_ab = theta(yab) + integrate_strip(f_xy, region.x_A(), region.x_A(), yab, b, rule);
        d_theta = std::max(d_theta, std::abs(u_ab - theta(yab)));
    }
    sol.defect_phi = d_phi;
    sol.defect_psi = d_psi;
    sol.defect_theta = d_theta;
    return sol;
}

LinearIterationState picard_linear(const BoundaryData& data, const ThetaFunction& theta,
                                   const Region& region, GridSpecPtr grid,
                                   const QuadratureRule& rule, double tol, int max_iter,
                                   const IterateObserver& observer) {
    const GridSpec& spec = *grid;
    PsiIntegrals psi_int(region, spec, data.psi);

    LinearIterationState state;
    state.u = assemble_u(region, spec, data, theta, psi_int, nullptr, grid);
    state.n = 0;

    for (int n = 1; n <= max_iter; ++n) {
        IntegrandView g = IntegrandView::of_field(state.u);
        SweepIntegrals integrals(region, spec, g, rule);
        GridField next = assemble_u(region, spec, data, theta, psi_int, &integrals, grid);
        double delta = sup_diff(next, state.u);
        state.deltas.push_back(delta);
        if (observer) observer(n, state.u, next);
        state.u = std::move(next);
        state.n = n;
        if (delta == 0.0 || (delta < tol && n >= 3)) {
            state.converged = true;
            return state;
        }
    }
    state.max_iter_exceeded = true;
    return state;
}

NonuniquenessDemo demo_nonuniqueness(const Region& region, GridSpecPtr grid,
                                     const QuadratureRule& rule, double tol, int max_iter) {
    const GridSpec& spec = *grid;
    BoundaryData zero = BoundaryData::zero();

    NonuniquenessDemo demo;
    demo.theta = build_theta_positive_demo(region);

    ThetaFunction theta0 = ThetaFunction::affine(region.y_A(), 0.0, 0.0);
    LinearIterationState zero_state =
        picard_linear(zero, theta0, region, grid, rule, tol, max_iter);
    demo.u_zero = std::move(zero_state.u);

    // Ladder deep enough to resolve at this grid, but at least 3 bands.
    int depth = 3;
    {
        double ab = region.curves().a_slope() * region.curves().b_slope();
        double y = region.y_A() / (ab * ab * ab);
        while (y / ab >= 2.0 * spec.hy() && depth < 24) {
            y /= ab;
            ++depth;
        }
    }
    TrapezoidLadder ladder = build_ladder(region, depth);

    // Node classification: band index per node (0 = none), plus membership in
    // the closed triangles O A_n C_n for n = 1..3.
    std::vector<int> band(spec.size(), 0);
    std::vector<char> tri(spec.size() * 4, 0);
    std::vector<char> interior(spec.size(), 0);
    std::vector<char> abc(spec.size(), 0);
    const double ex = 1e-12 * region.x_A();
    const double ey = region.boundary_tol();
    for (int j = 0; j < spec.ny(); ++j) {
        for (int i = spec.row_lo(j); i <= spec.row_hi(j); ++i) {
            if (!spec.masked(i, j)) continue;
            Point p{spec.x(i), spec.y(j)};
            Membership m = region.membership(p);
            if (m == Membership::InABC) abc[spec.idx(i, j)] = 1;
            if (m == Membership::InOAC) {
                double a_val = region.curves().a(p.y);
                double binv = region.curves().b_inv(p.y);
                if (p.x > binv + ex && p.x < a_val - ex) interior[spec.idx(i, j)] = 1;
            }
            for (int N = 1; N <= ladder.depth(); ++N)
                if (in_ladder_band(region, ladder, N, p)) {
                    band[spec.idx(i, j)] = N;
                    break;
                }
            for (int n = 1; n <= 3 && n <= ladder.depth(); ++n)
                if (in_ladder_triangle(region, ladder, n, p)) tri[spec.idx(i, j) * 4 + n] = 1;
        }
    }

    PositivityReport& rep = demo.positivity;
    rep.ladder_depth = ladder.depth();
    rep.claim42_max.assign(3, 0.0);
    rep.min_monotone_abc = std::numeric_limits<double>::infinity();
    rep.min_monotone_bands = std::numeric_limits<double>::infinity();

    auto observer = [&](int n, const GridField& prev, const GridField& next) {
        for (int j = 0; j < spec.ny(); ++j)
            for (int i = spec.row_lo(j); i <= spec.row_hi(j); ++i) {
                if (!spec.masked(i, j)) continue;
                std::size_t id = spec.idx(i, j);
                double diff = next(i, j) - prev(i, j);
                if (abc[id]) rep.min_monotone_abc = std::min(rep.min_monotone_abc, diff);
                if (band[id] >= 1 && n >= band[id])
                    rep.min_monotone_bands = std::min(rep.min_monotone_bands, diff);
                if (n <= 3 && tri[id * 4 + n])
                    rep.claim42_max[n - 1] =
                        std::max(rep.claim42_max[n - 1], std::abs(next(i, j)));
            }
    };

    demo.state_theta = picard_linear(zero, demo.theta, region, grid, rule, tol, max_iter, observer);
    demo.u_theta = demo.state_theta.u;

    rep.min_per_band.assign(ladder.depth(), std::numeric_limits<double>::infinity());
    rep.band_node_counts.assign(ladder.depth(), 0);
    rep.min_interior_oac = std::numeric_limits<double>::infinity();
    rep.min_bands_123 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.ny(); ++j)
        for (int i = spec.row_lo(j); i <= spec.row_hi(j); ++i) {
            if (!spec.masked(i, j)) continue;
            std::size_t id = spec.idx(i, j);
            double v = demo.u_theta(i, j);
            if (interior[id]) {
                rep.min_interior_oac = std::min(rep.min_interior_oac, v);
                ++rep.interior_oac_nodes;
            }
            if (band[id] >= 1) {
                rep.min_per_band[band[id] - 1] = std::min(rep.min_per_band[band[id] - 1], v);
                ++rep.band_node_counts[band[id] - 1];
                if (band[id] <= 3) rep.min_bands_123 = std::min(rep.min_bands_123, v);
            }
        }
    rep.claim42_tolerance = spec.hx() * spec.hy() * std::max(1.0, sup_abs(demo.u_theta));
    return demo;
}

BandMinConvergence band_min_convergence(const Region& region,
                                        const std::vector<GridField>& fields,
                                        double field_order_hint) {
    BandMinConvergence out;
    if (fields.size() < 2) return out;
    TrapezoidLadder ladder = build_ladder(region, 3);
    const GridSpec& s0 = fields.front().spec();

    std::vector<std::pair<int, int>> locs;
    for (int j = 0; j < s0.ny(); ++j)
        for (int i = s0.row_lo(j); i <= s0.row_hi(j); ++i) {
            if (!s0.masked(i, j)) continue;
            Point p{s0.x(i), s0.y(j)};
            for (int N = 1; N <= 3; ++N)
                if (in_ladder_band(region, ladder, N, p)) {
                    locs.emplace_back(i, j);
                    break;
                }
        }
    out.common_nodes = locs.size();
    if (locs.empty()) return out;

    bool consistent = true;
    for (const GridField& fld : fields) {
        const GridSpec& sk = fld.spec();
        int rx = (sk.nx() - 1) / (s0.nx() - 1);
        int ry = (sk.ny() - 1) / (s0.ny() - 1);
        double m = std::numeric_limits<double>::infinity();
        for (auto [i, j] : locs) {
            if (!sk.masked(i * rx, j * ry)) {
                consistent = false;
                break;
            }
            m = std::min(m, fld(i * rx, j * ry));
        }
        out.mins.push_back(m);
    }
    if (!consistent) return out;

    double d_last = std::abs(out.mins.back() - out.mins[out.mins.size() - 2]);
    if (out.mins.size() >= 3) {
        double d_prev = std::abs(out.mins[out.mins.size() - 2] - out.mins[out.mins.size() - 3]);
        if (d_last > 0.0 && d_prev > d_last) out.order = std::log2(d_prev / d_last);
    }
    double p_hat = out.order > 0.0 ? std::clamp(out.order, 0.5, 4.0)
                                   : std::clamp(field_order_hint, 0.5, 4.0);
    out.richardson_error = d_last / (std::pow(2.0, p_hat) - 1.0);
    out.usable = true;
    return out;
}

} // namespace charpic
