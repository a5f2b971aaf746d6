#include <doctest.h>

#include <cmath>

#include "dnprobe/grid.hpp"

using namespace dnprobe;

namespace {

GridConfig cfg2(double h = 1.0 / 32, double dt = 1.0 / 64, double T = 1.0) {
    GridConfig c;
    c.dim = 2;
    c.h = h;
    c.dt = dt;
    c.T = T;
    c.patch.face = Face::left;
    c.patch.interval = {{1.0 / 16, 15.0 / 16}};
    return c;
}

GridConfig cfg3() {
    GridConfig c;
    c.dim = 3;
    c.h = 1.0 / 16;
    c.dt = 1.0 / 32;
    c.T = 1;
    c.patch.face = Face::left;
    c.patch.interval = {{1.0 / 16, 15.0 / 16}, {1.0 / 16, 15.0 / 16}};
    return c;
}

}  // namespace

TEST_CASE("2D grid has 33^2 nodes and a 4h slab behind S") {
    const Grid g = build_grid(cfg2());
    CHECK(g.num_nodes() == 33u * 33u);
    CHECK(g.steps == 64);
    CHECK(g.pad_cells == 4);
    const Lattice& p = g.omega_prime();
    CHECK(p.n[0] == 37);
    CHECK(p.n[1] == 33);
    CHECK(g.interior().size() == 31u * 31u);
    CHECK(g.boundary().size() == 4u * 32u);
}

TEST_CASE("3D grid has 17^3 nodes") {
    const Grid g = build_grid(cfg3());
    CHECK(g.num_nodes() == 17u * 17u * 17u);
    CHECK(g.steps == 32);
}

TEST_CASE("non-dividing time step is rejected") {
    CHECK_THROWS_AS(build_grid(cfg2(1.0 / 32, 0.3, 1.0)), GeometryError);
}

TEST_CASE("invalid patches are rejected") {
    GridConfig c = cfg2();
    c.patch.interval = {{0.0, 0.5}};
    CHECK_THROWS_AS(build_grid(c), GeometryError);
    c.patch.interval = {{0.1, 0.5}};
    CHECK_THROWS_AS(build_grid(c), GeometryError);
    c = cfg2();
    c.pad = 2.0 / 32;
    CHECK_THROWS_AS(build_grid(c), GeometryError);
    c = cfg2();
    c.patch.face = Face::front;
    CHECK_THROWS_AS(build_grid(c), GeometryError);
}

TEST_CASE("face names round-trip") {
    for (Face f : {Face::left, Face::right, Face::bottom, Face::top, Face::front, Face::back})
        CHECK(parse_face(face_name(f)) == f);
    CHECK_THROWS_AS(parse_face("north"), GeometryError);
}

TEST_CASE("exterior point lies on the outward normal") {
    GridConfig c = cfg2();
    c.pad = 0.5;
    const Grid g = build_grid(c);
    const ProbeGeometry p = exterior_point(g, {0, 0.5, 0}, 0.1);
    CHECK(p.y[0] == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(p.y[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.tau0 == doctest::Approx(p.delta));
}

TEST_CASE("exterior point in 3D") {
    GridConfig c = cfg3();
    c.pad = 0.5;
    const Grid g = build_grid(c);
    const ProbeGeometry p = exterior_point(g, {0, 0.5, 0.5}, 0.125);
    CHECK(p.y[0] == doctest::Approx(-0.125));
    CHECK(p.y[1] == doctest::Approx(0.5));
    CHECK(p.y[2] == doctest::Approx(0.5));
}

TEST_CASE("resolution guard and admissibility radius") {
    GridConfig c = cfg2();
    c.pad = 0.5;
    const Grid g = build_grid(c);
    CHECK_THROWS_AS(exterior_point(g, {0, 0.5, 0}, g.h), GeometryError);
    CHECK_NOTHROW(exterior_point(g, {0, 0.5, 0}, 2 * g.h));
    const double delta = admissibility_radius(g, {0, 0.5, 0});
    CHECK(delta == doctest::Approx(0.25));  // pad/2 cap
    CHECK_THROWS_AS(exterior_point(g, {0, 0.5, 0}, delta), GeometryError);
    CHECK_THROWS_AS(exterior_point(g, {0, 0.99, 0}, 0.1), GeometryError);  // outside S
}

TEST_CASE("property: y_tau stays at distance >= delta from the outer boundary") {
    GridConfig c = cfg2(1.0 / 64, 1.0 / 64, 1.0);
    c.pad = 0.25;
    const Grid g = build_grid(c);
    for (double x1 : {0.1, 0.3, 0.5, 0.8}) {
        const Vec x0{0, x1, 0};
        const double delta = admissibility_radius(g, x0);
        for (double frac : {0.2, 0.5, 0.9}) {
            const double tau = std::max(2 * g.h, frac * delta);
            if (!(tau < delta)) continue;
            const ProbeGeometry p = exterior_point(g, x0, tau);
            CHECK(std::abs(p.y[0] + tau) < 1e-15);
            CHECK(distance_to_outer_boundary(g, p.y) >= delta * (1 - 1e-12));
        }
    }
}

TEST_CASE("boundary weights integrate the perimeter and mass weights the area") {
    const Grid g = build_grid(cfg2());
    double perimeter = 0.0, area = 0.0;
    for (double w : g.boundary_weights()) perimeter += w;
    for (double w : g.mass_weights()) area += w;
    CHECK(perimeter == doctest::Approx(4.0));
    CHECK(area == doctest::Approx(1.0));
}

TEST_CASE("patch nodes lie in the open patch") {
    const Grid g = build_grid(cfg2());
    CHECK(g.patch_nodes().size() == 27u);  // indices 3..29 exclusive of the ends
    for (std::size_t n : g.patch_nodes()) {
        const Vec x = g.coord(n);
        CHECK(x[0] == 0.0);
        CHECK(g.in_patch(x));
    }
}
