#include <doctest.h>

#include <cmath>

#include "charpic/linear_solver.hpp"
#include "charpic/verification.hpp"

using namespace charpic;

namespace {

Region demo_region() { return Region(CurvePair::affine(2.0, 2.0, 1.0)); }

struct Setup {
    Region region = demo_region();
    GridSpecPtr grid;
    QuadratureRule rule;
    Setup(int n = 65) {
        grid = GridSpec::for_region(region, n, n);
        rule = QuadratureRule::for_grid(grid->hx(), grid->hy());
    }
};

} // namespace

TEST_CASE("elementary solver: f == 1 with zero data") {
    Setup s;
    BoundaryData zero = BoundaryData::zero();
    auto f_one = [](double, double) { return 1.0; };
    ThetaFunction theta = build_theta_elementary(zero, f_one, s.region, s.rule);
    ElementarySolution sol = solve_elementary(f_one, zero, theta, s.region, s.grid, s.rule);

    // the trapezoid rule is exact here: u = 2y^2 + xy - x^2 on OAC nodes
    const GridSpec& g = *s.grid;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = g.row_lo(j); i <= g.row_hi(j); ++i) {
            if (!g.masked(i, j)) continue;
            double x = g.x(i), y = g.y(j);
            if (y > s.region.y_A()) continue;
            CHECK(sol.u(i, j) ==
                  doctest::Approx(2 * y * y + x * y - x * x).epsilon(1e-12));
        }
    CHECK(interpolate(sol.u, {0.5, 0.4}) == doctest::Approx(0.27).epsilon(2e-4));
    CHECK(sol.defect_phi <= 1e-9);
    CHECK(sol.defect_psi <= 1e-9);
    CHECK(sol.defect_theta <= 1e-9);
    CHECK_FALSE(sol.theta_slope_warning);
}

TEST_CASE("elementary solver: constant psi, f == 0") {
    Setup s;
    BoundaryData data{ScalarFunction::zero(), ScalarFunction::constant(2.0)};
    auto f0 = [](double, double) { return 0.0; };
    ThetaFunction theta = build_theta_elementary(data, f0, s.region, s.rule);
    CHECK(theta.slope() == doctest::Approx(-4.0)); // -a psi(x_A)
    ElementarySolution sol = solve_elementary(f0, data, theta, s.region, s.grid, s.rule);

    const GridSpec& g = *s.grid;
    int checked = 0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = g.row_lo(j); i <= g.row_hi(j); ++i) {
            if (!g.masked(i, j)) continue;
            double x = g.x(i), y = g.y(j);
            if (y > s.region.y_A()) continue;
            CHECK(sol.u(i, j) == doctest::Approx(-2.0 * (2 * y - x)).epsilon(1e-12));
            // u_x == psi by centered differences
            if (i > g.row_lo(j) && i < g.row_hi(j) && g.masked(i - 1, j) && g.masked(i + 1, j)) {
                double dx = (sol.u(i + 1, j) - sol.u(i - 1, j)) / (2 * g.hx());
                CHECK(dx == doctest::Approx(2.0).epsilon(1e-9));
                ++checked;
            }
        }
    CHECK(checked > 100);
}

TEST_CASE("elementary solver: all-zero problem") {
    Setup s;
    BoundaryData zero = BoundaryData::zero();
    ThetaFunction theta = ThetaFunction::affine(s.region.y_A(), 0.0, 0.0);
    auto f0 = [](double, double) { return 0.0; };
    ElementarySolution sol = solve_elementary(f0, zero, theta, s.region, s.grid, s.rule);
    CHECK(sup_abs(sol.u) == 0.0);
}

TEST_CASE("elementary solver rejects theta violating A5") {
    Setup s;
    BoundaryData zero = BoundaryData::zero();
    ThetaFunction bad = ThetaFunction::affine(s.region.y_A(), 1.0, 0.0);
    auto f0 = [](double, double) { return 0.0; };
    CHECK_THROWS_AS(solve_elementary(f0, zero, bad, s.region, s.grid, s.rule),
                    ThetaIncompatible);
}

TEST_CASE("picard: zero data with theta == 0 converges to zero in one sweep") {
    Setup s;
    ThetaFunction theta0 = ThetaFunction::affine(s.region.y_A(), 0.0, 0.0);
    LinearIterationState st =
        picard_linear(BoundaryData::zero(), theta0, s.region, s.grid, s.rule, 1e-10, 20);
    CHECK(st.converged);
    CHECK(st.n == 1);
    CHECK(st.deltas.size() == 1);
    CHECK(st.deltas[0] == 0.0);
    CHECK(sup_abs(st.u) == 0.0);
}

TEST_CASE("picard: exponential exact solution at unit-test scale") {
    Setup s;
    BoundaryData data =
        BoundaryData::from_expressions("exp(3*y)", "exp(3*x)", s.region.y_A(), s.region.x_A());
    ThetaFunction theta = ThetaFunction::from_expression("exp(1+y)", 0.5, 2.0);
    LinearIterationState st = picard_linear(data, theta, s.region, s.grid, s.rule, 1e-10, 40);
    CHECK(st.converged);

    const GridSpec& g = *s.grid;
    double err = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = g.row_lo(j); i <= g.row_hi(j); ++i)
            if (g.masked(i, j))
                err = std::max(err, std::abs(st.u(i, j) - std::exp(g.x(i) + g.y(j))));
    CHECK(err <= 1e-3);

    // differences decay faster than geometric
    for (std::size_t k = 2; k + 1 < st.deltas.size(); ++k)
        if (st.deltas[k] > 0)
            CHECK(st.deltas[k + 1] / st.deltas[k] < 0.5);
}

TEST_CASE("picard: max_iter exceeded flags and returns best so far") {
    Setup s;
    BoundaryData data =
        BoundaryData::from_expressions("exp(3*y)", "exp(3*x)", s.region.y_A(), s.region.x_A());
    ThetaFunction theta = ThetaFunction::from_expression("exp(1+y)", 0.5, 2.0);
    LinearIterationState st = picard_linear(data, theta, s.region, s.grid, s.rule, 1e-10, 1);
    CHECK_FALSE(st.converged);
    CHECK(st.max_iter_exceeded);
    CHECK(st.n == 1);
    CHECK(st.deltas.size() == 1);
}

TEST_CASE("non-uniqueness demo at unit-test scale") {
    Setup s;
    NonuniquenessDemo demo = demo_nonuniqueness(s.region, s.grid, s.rule, 1e-13, 25);

    CHECK(sup_abs(demo.u_zero) == 0.0);
    CHECK(demo.positivity.min_interior_oac > 0.0);
    CHECK(demo.positivity.interior_oac_nodes > 100);
    CHECK(demo.positivity.min_bands_123 > 0.0);

    // Claim 4.2: early iterates vanish on the nested triangles
    for (double m : demo.positivity.claim42_max)
        CHECK(m <= demo.positivity.claim42_tolerance);

    // Claims 4.3 / 4.4 at grid level: non-decreasing with zero slack here
    CHECK(demo.positivity.min_monotone_abc >= 0.0);
    CHECK(demo.positivity.min_monotone_bands >= 0.0);

    // decay-rate shape: ratios track z/(n+1)^2 within factor 3
    double z = s.region.x_A() * s.region.y_B();
    const auto& d = demo.state_theta.deltas;
    for (std::size_t n = 2; n + 1 < std::min<std::size_t>(d.size(), 7); ++n) {
        double ratio = d[n] / d[n - 1];
        double target = z / ((n + 1.0) * (n + 1.0));
        CHECK(ratio <= 3.0 * target);
        CHECK(ratio >= target / 3.0);
    }

    // the demo solution is a genuine solution of u_xy = u
    FieldTriple t = derive_gradient_triple(demo.u_theta);
    ResidualReport rr = residual_mixed_derivative(t, RhsFunction::from_expression("u"));
    double tol = (s.grid->hx() * s.grid->hx() + s.grid->hy() * s.grid->hy()) *
                 std::max(1.0, sup_abs(demo.u_theta));
    CHECK(rr.max_residual <= 10.0 * tol);
}

TEST_CASE("demo positivity requires the demo theta to exist") {
    Region wide(CurvePair::affine(2.0, 2.0, 1.2)); // a d^2 > 6
    GridSpecPtr grid = GridSpec::for_region(wide, 33, 33);
    QuadratureRule rule = QuadratureRule::for_grid(grid->hx(), grid->hy());
    CHECK_THROWS_AS(demo_nonuniqueness(wide, grid, rule, 1e-10, 10), PositivityUnachievable);
}
