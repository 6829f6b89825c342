#include <doctest.h>

#include <cmath>

#include "charpic/linear_solver.hpp"
#include "charpic/verification.hpp"

using namespace charpic;

TEST_CASE("bessel series partial sums") {
    CHECK(bessel_series(0.0, 1) == 1.0);
    CHECK(bessel_series(0.0, 20) == 1.0);

    // independent high-precision summation in extended precision
    auto oracle = [](double z, int terms) {
        long double sum = 0.0L, term = 1.0L, c = 0.0L;
        for (int n = 0; n < terms; ++n) {
            long double y = term - c;
            long double t = sum + y;
            c = (t - sum) - y;
            sum = t;
            long double k = n + 1;
            term *= z / (k * k);
        }
        return sum;
    };
    CHECK(std::abs(bessel_series(1.0, 20) - static_cast<double>(oracle(1.0, 60))) <= 1e-12);
    CHECK(std::abs(bessel_series(0.25, 20) - static_cast<double>(oracle(0.25, 60))) <= 1e-12);

    // frozen references: I0(2) and I0(1)
    CHECK(bessel_series(1.0, 20) == doctest::Approx(2.2795853023360673).epsilon(1e-14));
    CHECK(bessel_series(0.25, 20) == doctest::Approx(1.2660658777520084).epsilon(1e-14));
}

TEST_CASE("mixed-derivative residual") {
    Region region(CurvePair::affine(2.0, 2.0, 1.0));

    // u = x y with f == 1: the stencil is exact
    GridSpecPtr g65 = GridSpec::for_region(region, 65, 65);
    FieldTriple t;
    t.u = GridField::sample(g65, [](double x, double y) { return x * y; });
    t.p = GridField::sample(g65, [](double, double y) { return y; });
    t.q = GridField::sample(g65, [](double x, double) { return x; });
    ResidualReport r1 = residual_mixed_derivative(t, RhsFunction::from_expression("1"));
    CHECK(r1.probes > 500);
    CHECK(r1.max_residual <= 1e-10);

    // u == 0, f == 0
    FieldTriple z{GridField(g65), GridField(g65), GridField(g65)};
    CHECK(residual_mixed_derivative(z, RhsFunction::zero()).max_residual == 0.0);

    // u = e^{x+y} with f = u: O(h^2) with measured order >= 1.9
    double errs[3];
    int k = 0;
    for (int n : {65, 129, 257}) {
        GridSpecPtr g = GridSpec::for_region(region, n, n);
        FieldTriple s;
        s.u = GridField::sample(g, [](double x, double y) { return std::exp(x + y); });
        s.p = s.u;
        s.q = s.u;
        errs[k++] =
            residual_mixed_derivative(s, RhsFunction::from_expression("u")).max_residual;
    }
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
    CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("stable Case I solver") {
    CurvePair curves = CurvePair::affine(1.0, 0.5, 1.0);

    // zero data
    StableSolveResult z = solve_stable_case_I(BoundaryData::zero(), curves, 65, 65, 1e-10, 20);
    CHECK(z.converged);
    CHECK(sup_abs(z.u) == 0.0);

    // exact exponential: u* = e^{x+y}, phi = e^{2y}, psi = e^{1.5 x}
    BoundaryData data =
        BoundaryData::from_expressions("exp(2*y)", "exp(1.5*x)", curves.y_A(), curves.x_A());
    StableSolveResult res = solve_stable_case_I(data, curves, 129, 129, 1e-10, 30);
    CHECK(res.converged);
    const GridSpec& g = res.u.spec();
    double err = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = g.row_lo(j); i <= g.row_hi(j); ++i)
            if (g.masked(i, j))
                err = std::max(err, std::abs(res.u(i, j) - std::exp(g.x(i) + g.y(j))));
    CHECK(err <= 1e-4);

    // uniqueness proxy: tolerance tightening barely moves the output
    StableSolveResult loose = solve_stable_case_I(data, curves, 65, 65, 1e-8, 30);
    StableSolveResult tight = solve_stable_case_I(data, curves, 65, 65, 1e-12, 40);
    CHECK(sup_diff(loose.u, tight.u) <= 1e-7);

    CHECK_THROWS_AS(solve_stable_case_I(BoundaryData::zero(),
                                        CurvePair::affine(2.0, 2.0, 1.0), 65, 65, 1e-8, 10),
                    NotCaseI);
}

TEST_CASE("stable elementary single pass") {
    CurvePair curves = CurvePair::affine(1.0, 0.5, 1.0);
    // f == 1 with zero data: u(x,y) = int_{a(y)}^x (y - b(xi)) dxi
    //                              = (x - y) y - (x^2 - y^2)/4
    GridField u = solve_stable_elementary([](double, double) { return 1.0; },
                                          BoundaryData::zero(), curves, 65, 65);
    const GridSpec& g = u.spec();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = g.row_lo(j); i <= g.row_hi(j); ++i) {
            if (!g.masked(i, j)) continue;
            double x = g.x(i), y = g.y(j);
            double exact = (x - y) * y - (x * x - y * y) / 4.0;
            CHECK(u(i, j) == doctest::Approx(exact).epsilon(1e-10));
        }
}

TEST_CASE("grid convergence studies") {
    Region region(CurvePair::affine(2.0, 2.0, 1.0));

    // smooth elementary solve: second order
    auto solve = [&](int n) {
        GridSpecPtr grid = GridSpec::for_region(region, n, n);
        QuadratureRule rule = QuadratureRule::for_grid(grid->hx(), grid->hy());
        BoundaryData zero = BoundaryData::zero();
        auto f = [](double x, double y) { return std::exp(x + y); };
        ThetaFunction theta = build_theta_elementary(zero, f, region, rule);
        return solve_elementary(f, zero, theta, region, grid, rule).u;
    };
    ConvergenceStudy study = grid_convergence(solve, {33, 65, 129});
    CHECK_FALSE(study.non_monotone);
    CHECK(study.order >= 1.8);
    CHECK(study.order <= 2.2);
    CHECK(study.richardson_error > 0.0);
    CHECK(study.richardson_error < study.diffs.back());

    // constant output: flagged, order undefined
    auto constant = [&](int n) {
        return GridField(GridSpec::for_region(region, n, n), 1.0);
    };
    ConvergenceStudy flat = grid_convergence(constant, {33, 65, 129});
    CHECK(flat.non_monotone);

    GridSpecPtr a = GridSpec::for_region(region, 33, 33);
    GridSpecPtr b = GridSpec::for_region(region, 44, 44);
    CHECK_THROWS_AS(nested_sup_diff(GridField(a), GridField(b)), GridMismatch);
}

TEST_CASE("boundary reproduction of a converged linear solve") {
    Region region(CurvePair::affine(2.0, 2.0, 1.0));
    GridSpecPtr grid = GridSpec::for_region(region, 65, 65);
    QuadratureRule rule = QuadratureRule::for_grid(grid->hx(), grid->hy());
    BoundaryData data =
        BoundaryData::from_expressions("exp(3*y)", "exp(3*x)", region.y_A(), region.x_A());
    ThetaFunction theta = ThetaFunction::from_expression("exp(1+y)", 0.5, 2.0);
    LinearIterationState st = picard_linear(data, theta, region, grid, rule, 1e-10, 40);
    REQUIRE(st.converged);

    BoundaryReproduction rep = boundary_reproduction(st.u, data, &theta, region, rule,
                                                     IntegrandView::of_field(st.u));
    double eps_quad = (grid->hx() * grid->hx() + grid->hy() * grid->hy()) *
                      std::max(1.0, sup_abs(st.u));
    CHECK(rep.max_phi_defect <= 10.0 * eps_quad);
    CHECK(rep.max_theta_defect <= 10.0 * eps_quad);
    CHECK(rep.max_psi_defect <= 10.0 * eps_quad);
}
