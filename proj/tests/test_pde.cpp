#include <doctest.h>

#include <cmath>

#include "dnprobe/dnmap.hpp"
#include "dnprobe/pde.hpp"

using namespace dnprobe;

namespace {

GridConfig square(double h, double dt, double T) {
    GridConfig c;
    c.dim = 2;
    c.h = h;
    c.dt = dt;
    c.T = T;
    c.patch.face = Face::left;
    c.patch.interval = {{1.0 / 8, 7.0 / 8}};
    return c;
}

MaterialLaw quadratic_gamma() {
    MaterialLaw m;
    m.gamma_law = ScalarLaw::poly_s(1, 0, 1);
    return m;
}

double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

double max_abs(const SpaceTimeField& a) {
    double m = 0.0;
    for (double v : a.values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("zero data keeps the background state") {
    const Grid g = build_grid(square(1.0 / 16, 1.0 / 16, 1));
    SolveStats st;
    const SpaceTimeField u = solve_forward(quadratic_gamma(), MatrixField::identity(), g, 0.7, BoundaryField(g),
                                           nullptr, {}, &st);
    for (double v : u.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(st.newton_iterations <= 1);
    const SpaceTimeField w = solve_linearized(quadratic_gamma(), MatrixField::identity(), g, 0.7, BoundaryField(g));
    CHECK(max_abs(w) == 0.0);
    const SpaceTimeField wb = solve_adjoint(quadratic_gamma(), MatrixField::identity(), g, 0.7, BoundaryField(g));
    CHECK(max_abs(wb) == 0.0);
}

TEST_CASE("initial level and boundary traces are imposed exactly") {
    const Grid g = build_grid(square(1.0 / 16, 1.0 / 32, 1));
    const BoundaryField data = random_bumps(g, 1, 3)[0];
    const SpaceTimeField u = solve_forward(quadratic_gamma(), MatrixField::identity(), g, 0.2, data);
    for (double v : u.level(0)) CHECK(v == 0.2);
    for (int n = 0; n <= g.steps; ++n)
        for (std::size_t b = 0; b < g.boundary().size(); ++b) CHECK(u.at(n, g.boundary()[b]) == 0.2 + data.at(n, b));
}

TEST_CASE("data must be compatible at t = 0 (forward) and t = T (adjoint)") {
    const Grid g = build_grid(square(1.0 / 8, 1.0 / 8, 1));
    BoundaryField bad(g);
    bad.at(0, 0) = 1.0;
    CHECK_THROWS_AS(solve_linearized(MaterialLaw{}, MatrixField::identity(), g, 0, bad), PdeError);
    BoundaryField late(g);
    late.at(g.steps, 0) = 1.0;
    CHECK_THROWS_AS(solve_adjoint(MaterialLaw{}, MatrixField::identity(), g, 0, late), PdeError);
}

TEST_CASE("manufactured solutions converge at the expected orders") {
    SUBCASE("space") {
        const Manufactured m{Manufactured::Kind::space, 2, 0.0};
        const auto rows = mms_study(m, MaterialLaw{}, {square(1.0 / 8, 1.0 / 16, 0.5), square(1.0 / 16, 1.0 / 16, 0.5)});
        CHECK(std::log2(rows[0].error / rows[1].error) == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("time, nonlinear gamma") {
        const Manufactured m{Manufactured::Kind::time, 2, 0.5};
        const auto rows =
            mms_study(m, quadratic_gamma(), {square(1.0 / 32, 1.0 / 8, 1), square(1.0 / 32, 1.0 / 16, 1)});
        CHECK(std::log2(rows[0].error / rows[1].error) >= 0.9);
    }
    SUBCASE("linearized solver with the same source") {
        const Grid g = build_grid(square(1.0 / 16, 1.0 / 64, 0.5));
        const Manufactured m{Manufactured::Kind::space, 2, 0.0};
        const SpaceTimeField f = manufactured_source(m, MaterialLaw{}, g);
        const SpaceTimeField u = solve_forward(MaterialLaw{}, MatrixField::identity(), g, 0.0, manufactured_data(m, g), &f);
        const SpaceTimeField w = solve_linearized(MaterialLaw{}, MatrixField::identity(), g, 0.0, manufactured_data(m, g), &f);
        CHECK(max_abs_diff(u, w) < 1e-9);
        CHECK(manufactured_error(m, w, g) < 5e-3);
    }
}

TEST_CASE("nonlinear solution approaches the linearization quadratically in the amplitude") {
    const Grid g = build_grid(square(1.0 / 16, 1.0 / 16, 1));
    const BoundaryField base = random_bumps(g, 1, 11)[0];
    const MaterialLaw law = quadratic_gamma();
    const double lambda = 0.5;
    const SpaceTimeField w = solve_linearized(law, MatrixField::identity(), g, lambda, base);
    std::vector<double> err;
    for (double amp : {1e-2, 1e-3}) {
        const SpaceTimeField u = solve_forward(law, MatrixField::identity(), g, lambda, amp * base);
        double m = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i)
            m = std::max(m, std::abs(u.values[i] - lambda - amp * w.values[i]));
        err.push_back(m);
    }
    const double ratio = err[0] / err[1];
    CHECK(ratio > 50.0);
    CHECK(ratio < 200.0);
}

TEST_CASE("linearized solver is linear") {
    const Grid g = build_grid(square(1.0 / 16, 1.0 / 32, 1));
    const auto bumps = random_bumps(g, 2, 5);
    MaterialLaw law;
    law.gamma_law = ScalarLaw::trig_t(1.5, 0.3, 4);
    law.rho_law = ScalarLaw::affine_t(1, 0.5);
    const MatrixField A = MatrixField::parse("full 1.2 0.3 0.9", 2);
    const SpaceTimeField w1 = solve_linearized(law, A, g, 0.1, bumps[0]);
    const SpaceTimeField w2 = solve_linearized(law, A, g, 0.1, bumps[1]);
    const SpaceTimeField w12 = solve_linearized(law, A, g, 0.1, bumps[0] + bumps[1]);
    SpaceTimeField sum = w1;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += w2.values[i];
    CHECK(max_abs_diff(sum, w12) < 1e-9 * max_abs(w12));
}

TEST_CASE("adjoint with constant coefficients is the time-reversed forward solve") {
    const Grid g = build_grid(square(1.0 / 16, 1.0 / 32, 1));
    const BoundaryField data = random_bumps(g, 1, 8)[0];
    BoundaryField reflected(g);
    for (int n = 0; n <= g.steps; ++n)
        for (std::size_t b = 0; b < data.count; ++b) reflected.at(n, b) = data.at(g.steps - n, b);
    const MaterialLaw law;
    const SpaceTimeField w = solve_linearized(law, MatrixField::identity(), g, 0.0, data);
    const SpaceTimeField wb = solve_adjoint(law, MatrixField::identity(), g, 0.0, reflected);
    double m = 0.0;
    for (int n = 0; n <= g.steps; ++n)
        for (std::size_t k = 0; k < g.num_nodes(); ++k) m = std::max(m, std::abs(wb.at(g.steps - n, k) - w.at(n, k)));
    CHECK(m < 1e-9 * max_abs(w));
    for (double v : wb.level(g.steps)) CHECK(v == 0.0);
}

TEST_CASE("Newton failure inside the cap is reported as divergence") {
    const Grid g = build_grid(square(1.0 / 8, 1.0 / 8, 1));
    const BoundaryField data = random_bumps(g, 1, 2)[0];
    SolveOptions opt;
    opt.newton_cap = 1;
    CHECK_THROWS_AS(solve_forward(quadratic_gamma(), MatrixField::identity(), g, 0.0, data, nullptr, opt),
                    NewtonDivergence);
    MaterialLaw law;
    law.gamma_law = ScalarLaw::poly_s(1, 0, 1);
    const auto rows = linearization_check(law, MatrixField::identity(), g, 0.0, 1e12 * data, {1});
    CHECK(rows[0].diverged);
    CHECK(rows[0].note.find("smallness radius") != std::string::npos);
}

TEST_CASE("property: discrete maximum principle for the linearized solve with diagonal A") {
    const Grid g = build_grid(square(1.0 / 16, 1.0 / 32, 1));
    MaterialLaw law;
    law.gamma_law = ScalarLaw::trig_t(1.5, 0.4, 5);
    law.rho_law = ScalarLaw::affine_t(1, 0.5);
    for (const auto& A : {MatrixField::identity(), MatrixField::diagonal({2, 0.5, 1})})
        for (const auto& data : random_bumps(g, 4, 13)) {
            const SpaceTimeField w = solve_linearized(law, A, g, 0.0, data);
            CHECK(max_abs(w) <= data.max_abs() * (1 + 1e-12));
        }
}
