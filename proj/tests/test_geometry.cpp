#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "periheat/geometry.hpp"
#include "support/quadrature.hpp"

using namespace periheat;

namespace {

const Cell2 unit_cell({1.0, 1.0});
const ReferenceShape circle{{0.5, 0.5}, 0.25};

BoundaryMap wiggly_map() {
    BoundaryMap m = BoundaryMap::identity(circle);
    BoundaryMap bump = BoundaryMap::zero(3);
    bump.cos_x[2] = 0.25;
    bump.sin_y[3] = -0.2;
    bump.sin_x[1] = 0.1;
    return perturb(m, bump, 0.1);
}

} // namespace

TEST_CASE("identity circle grid: circumference, area element, normals") {
    const BoundaryGrid g = build_grid(circle, BoundaryMap::identity(circle), 64, unit_cell);
    REQUIRE(g.length == Catch::Approx(2.0 * M_PI * 0.25).epsilon(1e-12));
    for (int i = 0; i < g.N; ++i) {
        REQUIRE(g.sigma[i] == Catch::Approx(1.0).epsilon(1e-13));
        const Eigen::Vector2d expected = (g.point(i) - circle.center) / circle.radius;
        REQUIRE((g.normal(i) - expected).norm() < 1e-13);
        REQUIRE(std::abs(g.normal(i).norm() - 1.0) < 1e-14);
        REQUIRE(g.curvature[i] == Catch::Approx(1.0 / circle.radius).epsilon(1e-12));
    }
}

TEST_CASE("normals are orthogonal to tangents and outward for a wiggly map") {
    const BoundaryMap m = wiggly_map();
    const BoundaryGrid g = build_grid(circle, m, 128, unit_cell);
    for (int i = 0; i < g.N; ++i) {
        const Eigen::Vector2d tau = m.deriv(g.s[i]).normalized();
        REQUIRE(std::abs(g.normal(i).dot(tau)) < 1e-13);
    }
    // outward: stepping along the normal leaves the interior
    for (int i = 0; i < g.N; i += 8) {
        const Eigen::Vector2d out_pt = g.point(i) + 3.0 * g.max_spacing * g.normal(i);
        REQUIRE(locate(out_pt, g, unit_cell) == Region::exterior);
    }
}

TEST_CASE("ellipse weights match adaptive arc-length quadrature") {
    const BoundaryMap m = BoundaryMap::ellipse({0.5, 0.5}, 0.3, 0.2);
    const BoundaryGrid g = build_grid(circle, m, 256, unit_cell);
    const double ref = testsupport::adaptive_quadrature(
        [&](double s) { return std::hypot(0.3 * std::sin(s), 0.2 * std::cos(s)); }, 0.0,
        2.0 * M_PI, 1e-14);
    REQUIRE(std::abs(g.length - ref) < 1e-10);
}

TEST_CASE("weight sums converge spectrally for smooth maps") {
    const BoundaryMap m = wiggly_map();
    const double ref = testsupport::adaptive_quadrature(
        [&](double s) { return m.deriv(s).norm(); }, 0.0, 2.0 * M_PI, 1e-14);
    double prev = 1.0;
    for (const int N : {16, 32, 64, 128}) {
        const double err = std::abs(build_grid(circle, m, N, unit_cell).length - ref);
        if (N > 16 && prev > 1e-13) REQUIRE(err < 0.25 * prev); // far faster than O(N^-2) in practice
        prev = err;
    }
    REQUIRE(std::abs(build_grid(circle, m, 128, unit_cell).length - ref) < 1e-12);
}

TEST_CASE("validate_map diagnostics") {
    const MapDiagnostics ok = validate_map(BoundaryMap::identity(circle), circle, 64, unit_cell);
    REQUIRE(ok.pass);
    REQUIRE(ok.cell_margin == Catch::Approx(0.25).epsilon(1e-12));
    REQUIRE(ok.signed_area > 0.0);

    // constant map: all points coincide, zero differential
    BoundaryMap constant = BoundaryMap::zero(1);
    constant.cos_x[0] = 0.5;
    constant.cos_y[0] = 0.5;
    const MapDiagnostics bad = validate_map(constant, circle, 64, unit_cell);
    REQUIRE_FALSE(bad.pass);
    REQUIRE(bad.min_differential == Catch::Approx(0.0).margin(1e-15));

    // circle scaled to touch the cell boundary: zero margin
    const BoundaryMap touching = BoundaryMap::identity(ReferenceShape{{0.5, 0.5}, 0.5});
    const MapDiagnostics margin0 = validate_map(touching, circle, 64, unit_cell);
    REQUIRE_FALSE(margin0.pass);
    REQUIRE(margin0.cell_margin < 1e-12);

    // clockwise orientation flips the signed area and fails
    BoundaryMap cw = BoundaryMap::identity(circle);
    cw.sin_y[1] = -circle.radius;
    REQUIRE_FALSE(validate_map(cw, circle, 64, unit_cell).pass);
    REQUIRE(validate_map(cw, circle, 64, unit_cell).signed_area < 0.0);

    REQUIRE_THROWS_AS(build_grid(circle, constant, 64, unit_cell), std::invalid_argument);
    REQUIRE_THROWS_AS(build_grid(circle, BoundaryMap::identity(circle), 15, unit_cell),
                      std::invalid_argument);
}

TEST_CASE("perturb is exact coefficient arithmetic") {
    const BoundaryMap m = wiggly_map();
    BoundaryMap dir = BoundaryMap::zero(2);
    dir.cos_x[1] = 0.7;
    dir.sin_y[2] = -0.3;

    const BoundaryMap same = perturb(m, dir, 0.0);
    REQUIRE((same.cos_x - m.cos_x).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((same.sin_y - m.sin_y).cwiseAbs().maxCoeff() == 0.0);

    const BoundaryMap fwd = perturb(m, dir, 0.125); // powers of two keep the arithmetic exact
    const BoundaryMap back = perturb(fwd, dir, -0.125);
    REQUIRE((back.cos_x.head(m.cos_x.size()) - m.cos_x).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((back.sin_y.head(m.sin_y.size()) - m.sin_y).cwiseAbs().maxCoeff() == 0.0);

    const BoundaryMap diff = perturb(perturb(m, dir, 0.25), m, -1.0);
    REQUIRE(diff.coeff_norm() == Catch::Approx(0.25 * dir.coeff_norm()).epsilon(1e-14));
}

TEST_CASE("locate: interior, exterior, near-boundary, translation consistency") {
    const BoundaryGrid g = build_grid(circle, BoundaryMap::identity(circle), 64, unit_cell);
    REQUIRE(locate({0.5, 0.5}, g, unit_cell) == Region::interior);
    REQUIRE(locate({0.0, 0.0}, g, unit_cell) == Region::exterior);
    REQUIRE(locate({0.02, 0.98}, g, unit_cell) == Region::exterior);
    REQUIRE(locate(g.point(0), g, unit_cell) == Region::near_boundary);
    REQUIRE(locate(g.point(17) + 1e-4 * g.normal(17), g, unit_cell) == Region::near_boundary);

    for (const auto& pt : {Eigen::Vector2d{0.5, 0.55}, Eigen::Vector2d{0.9, 0.1}}) {
        const Region base = locate(pt, g, unit_cell);
        for (const auto& z : {Eigen::Vector2d{1, 0}, Eigen::Vector2d{-2, 3}, Eigen::Vector2d{0, -1}})
            REQUIRE(locate(pt + z, g, unit_cell) == base);
    }
}
