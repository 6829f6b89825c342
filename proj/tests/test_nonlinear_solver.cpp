#include <doctest.h>

#include <cmath>

#include "charpic/linear_solver.hpp"
#include "charpic/nonlinear_solver.hpp"

using namespace charpic;

namespace {

struct Setup {
    Region region;
    GridSpecPtr grid;
    QuadratureRule rule;
    explicit Setup(double x_A = 1.0, int n = 65) : region(CurvePair::affine(2.0, 2.0, x_A)) {
        grid = GridSpec::for_region(region, n, n);
        rule = QuadratureRule::for_grid(grid->hx(), grid->hy());
    }
};

double max_over_masked(const GridField& f, const std::function<double(int, int, double)>& v) {
    const GridSpec& s = f.spec();
    double m = 0.0;
    for (int j = 0; j < s.ny(); ++j)
        for (int i = s.row_lo(j); i <= s.row_hi(j); ++i)
            if (s.masked(i, j)) m = std::max(m, v(i, j, f(i, j)));
    return m;
}

} // namespace

TEST_CASE("base step examples") {
    Setup s;

    // zero data
    NonlinearState z = base_step(BoundaryData::zero(), s.region, s.grid);
    CHECK(z.sigmas[0] == 0.0);
    CHECK(sup_abs(z.v.u) == 0.0);
    CHECK(sup_abs(z.v.p) == 0.0);
    CHECK(sup_abs(z.v.q) == 0.0);

    // phi(y) = y, psi == 0: sigma_0 = 1 and q == 1 on both sides of AC
    BoundaryData lin{ScalarFunction::from_expression("y", expr::Var::Y, 0.5),
                     ScalarFunction::zero()};
    NonlinearState a = base_step(lin, s.region, s.grid);
    CHECK(a.sigmas[0] == doctest::Approx(1.0));
    CHECK(max_over_masked(a.v.q, [](int, int, double v) { return std::abs(v - 1.0); }) <= 1e-13);

    // psi == 1, phi == 0: u0 = -(2y - x) on OAC, p0 == 1, sigma_0 = -2
    BoundaryData c1{ScalarFunction::zero(), ScalarFunction::constant(1.0)};
    NonlinearState b = base_step(c1, s.region, s.grid);
    CHECK(b.sigmas[0] == doctest::Approx(-2.0));
    CHECK(max_over_masked(b.v.p, [](int, int, double v) { return std::abs(v - 1.0); }) == 0.0);
    const GridSpec& g = *s.grid;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = g.row_lo(j); i <= g.row_hi(j); ++i) {
            if (!g.masked(i, j) || g.y(j) > s.region.y_A()) continue;
            CHECK(b.v.u(i, j) == doctest::Approx(-(2 * g.y(j) - g.x(i))).epsilon(1e-12));
        }
}

TEST_CASE("f == 0 is a fixed point of the very first sweep") {
    Setup s;
    BoundaryData data =
        BoundaryData::from_expressions("exp(3*y)", "exp(3*x)", s.region.y_A(), s.region.x_A());
    NonlinearState st = base_step(data, s.region, s.grid);
    FieldTriple before = st.v;
    st = iterate_step(std::move(st), RhsFunction::zero(), data, s.region, s.grid, s.rule);
    CHECK(sup_norm_diff(st.v, before) == 0.0);
    CHECK(st.deltas[0] == 0.0);
}

TEST_CASE("f = f(x, y) is stationary after one correction") {
    Setup s;
    BoundaryData zero = BoundaryData::zero();
    RhsFunction f = RhsFunction::from_expression("x*y + 1");
    NonlinearState st = base_step(zero, s.region, s.grid);
    st = iterate_step(std::move(st), f, zero, s.region, s.grid, s.rule);
    CHECK(st.deltas[0] > 0.0);
    FieldTriple v1 = st.v;
    st = iterate_step(std::move(st), f, zero, s.region, s.grid, s.rule);
    CHECK(sup_norm_diff(st.v, v1) == 0.0);
    CHECK(st.deltas[1] == 0.0);
}

TEST_CASE("contraction run: mu = 0.75 region") {
    Setup s(0.25);
    RhsFunction f = RhsFunction::from_expression("(sin(u)+cos(p))/4");
    NonlinearOptions opt;
    opt.tol = 1e-12;
    opt.max_iter = 30;
    opt.shrink = false;
    opt.lipschitz_override = 0.25;
    NonlinearSolveResult res = solve_nonlinear(f, BoundaryData::zero(), s.region, 65, 65, opt);

    CHECK(res.contraction.mu == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.converged);
    CHECK_FALSE(res.mu_flagged);

    const double L = res.contraction.L, g = res.contraction.gamma;
    const double l = res.contraction.l, h = res.contraction.h;
    for (std::size_t k = 1; k < res.deltas.size(); ++k) {
        double prev = res.deltas[k - 1];
        if (prev <= 1e-14) break;
        // measured contraction is far below mu; assert the audited bounds
        CHECK(res.deltas[k] / prev <= 0.85);
        auto c = res.component_deltas[k];
        CHECK(c[0] <= 1.1 * L * h * (g * h + l) * prev + 1e-15);
        CHECK(c[1] <= 1.1 * L * h * prev + 1e-15);
        CHECK(c[2] <= 1.1 * L * (g * h + l) * prev + 1e-15);
        CHECK(std::abs(res.sigmas[k + 1] - res.sigmas[k]) <= 1.1 * g * L * h * prev + 1e-15);
    }

    // consistency relations at the converged triple
    const GridSpec& gs = *res.grid;
    const Region& used = *res.region;
    // u(x_A, y) == theta(y) and q(x_A, y) == theta'(y) on AB exactly
    for (int j = 0; j < gs.ny(); ++j) {
        if (!gs.masked(gs.nx() - 1, j)) continue;
        double y = gs.y(j);
        if (y < used.y_A()) continue;
        CHECK(res.v.u(gs.nx() - 1, j) == doctest::Approx(res.theta(y)).epsilon(1e-12));
        CHECK(res.v.q(gs.nx() - 1, j) == doctest::Approx(res.theta.deriv(y)).epsilon(1e-12));
    }
    // u(a(y), y) == phi == 0 and p(x, b(x)) == psi == 0 within grid accuracy
    for (int k = 1; k < 30; ++k) {
        double y = used.y_A() * k / 30.0;
        CHECK(std::abs(interpolate(res.v.u, {used.curves().a(y), y})) <= 1e-6);
        double x = used.x_A() * k / 30.0;
        CHECK(std::abs(interpolate(res.v.p, {x, used.curves().b(x)})) <= 1e-4);
    }
}

TEST_CASE("shrink reaches mu < 1 for the linear right-hand side") {
    Setup s(1.0);
    BoundaryData data =
        BoundaryData::from_expressions("exp(3*y)", "exp(3*x)", s.region.y_A(), s.region.x_A());
    RhsFunction f = RhsFunction::from_expression("u");
    NonlinearOptions opt;
    opt.tol = 1e-12;
    opt.max_iter = 40;
    opt.shrink = true;
    opt.lipschitz_override = 1.0;
    NonlinearSolveResult res = solve_nonlinear(f, data, s.region, 65, 65, opt);
    CHECK(res.halvings == 4);
    CHECK(res.region->x_A() == doctest::Approx(0.0625));
    CHECK(res.contraction.mu == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.converged);

    // matched theta: the fixed affine data satisfies the linear compatibility
    // condition, so picard_linear converges to the same discrete field
    BoundaryData small_data = BoundaryData::from_expressions(
        "exp(3*y)", "exp(3*x)", res.region->y_A(), res.region->x_A());
    ThetaCompatibilityReport tc = check_theta_linear(res.theta, small_data, *res.region);
    CHECK(tc.defect <= 1e-10);
    QuadratureRule rule = QuadratureRule::for_grid(res.grid->hx(), res.grid->hy());
    LinearIterationState lin =
        picard_linear(small_data, res.theta, *res.region, res.grid, rule, 1e-12, 40);
    CHECK(lin.converged);
    CHECK(sup_diff(lin.u, res.v.u) <= 1e-10);
}

TEST_CASE("contraction unachievable for an enormous Lipschitz constant") {
    Setup s(1.0);
    RhsFunction f = RhsFunction::from_expression("u");
    NonlinearOptions opt;
    opt.shrink = true;
    opt.lipschitz_override = 1e6;
    CHECK_THROWS_AS(solve_nonlinear(f, BoundaryData::zero(), s.region, 65, 65, opt),
                    ContractionUnachievable);
}

TEST_CASE("mu >= 1 without shrink proceeds and is flagged") {
    Setup s(1.0);
    RhsFunction f = RhsFunction::from_expression("u/4");
    NonlinearOptions opt;
    opt.shrink = false;
    opt.max_iter = 8;
    opt.tol = 1e-12;
    opt.lipschitz_override = 0.25; // mu = 3 on the full region
    NonlinearSolveResult res = solve_nonlinear(f, BoundaryData::zero(), s.region, 33, 33, opt);
    CHECK(res.mu_flagged);
    CHECK(res.contraction.mu == doctest::Approx(3.0));
}

TEST_CASE("verify_fixed_point on the trivial solution and its sensitivity") {
    Setup s(1.0, 65);
    BoundaryData zero = BoundaryData::zero();
    RhsFunction f = RhsFunction::zero();
    NonlinearState st = base_step(zero, s.region, s.grid);
    ThetaFunction theta = st.theta;

    FixedPointReport rep = verify_fixed_point(st.v, theta, f, zero, s.region, s.grid, s.rule);
    CHECK(rep.probes > 50);
    CHECK(rep.max_defect_oac <= 1e-14);
    CHECK(rep.max_defect_abc <= 1e-14);
    CHECK(rep.max_p_defect <= 1e-14);
    CHECK(rep.max_q_defect <= 1e-14);

    // a 0.01 spike at a probe location must show up in the defect
    const GridSpec& g = *s.grid;
    int i = 32, j = 24; // (0.5, 0.75), on the 17x17 probe lattice
    REQUIRE(g.masked(i, j));
    st.v.u.at(i, j) += 0.01;
    FixedPointReport bumped = verify_fixed_point(st.v, theta, f, zero, s.region, s.grid, s.rule);
    CHECK(bumped.max_defect_abc >= 0.009);
}

TEST_CASE("estimated Lipschitz constant drives mu when no override is given") {
    Setup s(0.25);
    RhsFunction f = RhsFunction::from_expression("(sin(u)+cos(p))/4");
    NonlinearOptions opt;
    opt.shrink = false;
    opt.tol = 1e-10;
    opt.max_iter = 20;
    opt.lipschitz_density = 16;
    NonlinearSolveResult res = solve_nonlinear(f, BoundaryData::zero(), s.region, 33, 33, opt);
    CHECK(res.lipschitz_estimated);
    CHECK(res.contraction.L == doctest::Approx(0.25).epsilon(0.05));
    CHECK(res.converged);
}
