#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "periheat/detail/rng.hpp"
#include "periheat/potentials.hpp"
#include "support/quadrature.hpp"

using namespace periheat;

namespace {

const Cell2 unit_cell({1.0, 1.0});
const ReferenceShape circle{{0.5, 0.5}, 0.25};

BoundaryGrid desk_grid(int N) { return build_grid(circle, BoundaryMap::identity(circle), N, unit_cell); }

DensityGrid test_density(const BoundaryGrid& g, const TimeGrid& tg) {
    return sample_density(tg, g.s, [](double t, double s) { return t * (2.0 + std::cos(s)); });
}

DensityGrid random_density(int M, int N, std::uint64_t seed) {
    periheat::detail::SeededRng rng(seed);
    DensityGrid d(M, N);
    for (int k = 0; k < M; ++k)
        for (int i = 0; i < N; ++i) d.values(k, i) = rng.symmetric();
    return d;
}

// Naive single entry of the periodic single-layer block: plain image window,
// no shared truncation logic with the assembler.
double naive_vq_entry(const BoundaryGrid& g, int m, double dt, int i, int j, int Z = 12) {
    double acc = 0.0;
    for (int zx = -Z; zx <= Z; ++zx)
        for (int zy = -Z; zy <= Z; ++zy) {
            const Eigen::Vector2d d =
                g.point(i) - g.point(j) + Eigen::Vector2d(zx, zy);
            const double r = d.norm();
            if (r == 0.0 && m == 0) continue; // singular self term, corrected separately
            acc += slab_integrals(r, m * dt, (m + 1) * dt).single;
        }
    return g.weights[j] * acc;
}

double naive_wstar_entry(const BoundaryGrid& g, int m, double dt, int i, int j, int Z = 12) {
    double acc = 0.0;
    for (int zx = -Z; zx <= Z; ++zx)
        for (int zy = -Z; zy <= Z; ++zy) {
            const Eigen::Vector2d d =
                g.point(i) - g.point(j) + Eigen::Vector2d(zx, zy);
            const double r = d.norm();
            if (r == 0.0) continue;
            acc += slab_integrals(r, m * dt, (m + 1) * dt).grad_factor * d.dot(g.normal(i));
        }
    return g.weights[j] * acc;
}

} // namespace

TEST_CASE("assembled blocks match naive per-entry recomputation at any offset") {
    const BoundaryGrid g = desk_grid(16);
    const TimeGrid tg(0.5, 8);
    LatticeSumConfig cfg;
    const CausalOperator vq = assemble(OperatorKind::Vq, g, tg, unit_cell, cfg);
    const CausalOperator ws = assemble(OperatorKind::Wstar_q, g, tg, unit_cell, cfg);
    periheat::detail::SeededRng rng(7);
    for (int probe = 0; probe < 24; ++probe) {
        const int m = static_cast<int>(rng.uniform(0, tg.M));
        const int i = static_cast<int>(rng.uniform(0, g.N));
        int j = static_cast<int>(rng.uniform(0, g.N));
        if (m == 0 && i == j) j = (j + 1) % g.N; // the corrected self entry is checked elsewhere
        REQUIRE(vq.block(m)(i, j) == Catch::Approx(naive_vq_entry(g, m, tg.dt(), i, j)).margin(1e-12));
        if (!(m == 0 && i == j))
            REQUIRE(ws.block(m)(i, j) ==
                    Catch::Approx(naive_wstar_entry(g, m, tg.dt(), i, j)).margin(1e-12));
    }
}

TEST_CASE("singular self entry matches the panel rule plus nonzero images") {
    const BoundaryGrid g = desk_grid(32);
    const TimeGrid tg(0.25, 4);
    LatticeSumConfig cfg;
    const CausalOperator vq = assemble(OperatorKind::Vq, g, tg, unit_cell, cfg);
    for (const int i : {0, 5, 19}) {
        const double expected = g.weights[i] * slab_single_panel_avg(g.weights[i], tg.dt()) +
                                naive_vq_entry(g, 0, tg.dt(), i, i);
        REQUIRE(vq.block(0)(i, i) == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("gradient-kind diagonals carry the curvature limits") {
    const BoundaryGrid g = desk_grid(32);
    const TimeGrid tg(0.25, 4);
    LatticeSumConfig cfg;
    const CausalOperator ws = assemble(OperatorKind::Wstar_q, g, tg, unit_cell, cfg);
    const CausalOperator wd = assemble(OperatorKind::Wq, g, tg, unit_cell, cfg);
    for (const int i : {3, 11}) {
        const double img = naive_wstar_entry(g, 0, tg.dt(), i, i);
        const double expected = -g.weights[i] * g.curvature[i] / (4.0 * M_PI) + img;
        REQUIRE(ws.block(0)(i, i) == Catch::Approx(expected).margin(1e-12));
    }
    // on a circle the double-layer and adjoint matrices coincide entrywise
    for (int m = 0; m < tg.M; ++m)
        REQUIRE((ws.block(m) - wd.block(m)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("apply: zero density, additivity, causality") {
    const BoundaryGrid g = desk_grid(16);
    const TimeGrid tg(1.0, 6);
    LatticeSumConfig cfg;
    const CausalOperator vq = assemble(OperatorKind::Vq, g, tg, unit_cell, cfg);

    const DensityGrid zero(tg.M, g.N);
    REQUIRE(apply(vq, zero).max_norm() == 0.0);

    const DensityGrid r1 = random_density(tg.M, g.N, 11);
    const DensityGrid r2 = random_density(tg.M, g.N, 22);
    DensityGrid sum = r1;
    sum.values += r2.values;
    const DensityGrid lhs = apply(vq, sum);
    DensityGrid rhs = apply(vq, r1);
    rhs.values += apply(vq, r2).values;
    REQUIRE((lhs.values - rhs.values).cwiseAbs().maxCoeff() < 1e-14);

    // zeroing slabs > k never changes output up to slab k
    DensityGrid truncated = r1;
    const int k = 3;
    for (int kk = k + 1; kk <= tg.M; ++kk) truncated.values.row(kk - 1).setZero();
    const DensityGrid full_out = apply(vq, r1);
    const DensityGrid trunc_out = apply(vq, truncated);
    REQUIRE((full_out.values.topRows(k) - trunc_out.values.topRows(k)).cwiseAbs().maxCoeff() == 0.0);

    DensityGrid bad(tg.M + 1, g.N);
    REQUIRE_THROWS_AS(apply(vq, bad), std::invalid_argument);
}

TEST_CASE("splitting identity: periodic = free + remainder, entrywise") {
    LatticeSumConfig cfg;
    {
        const BoundaryGrid g = desk_grid(16);
        const TimeGrid tg(0.2, 2);
        REQUIRE(splitting_check(g, tg, unit_cell, cfg) < 1e-12);
    }
    {
        const BoundaryGrid g = desk_grid(32);
        const TimeGrid tg(1.0, 8);
        const double tight = splitting_check(g, tg, unit_cell, cfg);
        REQUIRE(tight < 1e-10);
        LatticeSumConfig loose = cfg;
        loose.tail_tol = 1e-7;
        const double coarse = splitting_check(g, tg, unit_cell, loose);
        REQUIRE(coarse > 10.0 * tight);
        REQUIRE(coarse < 1e-5);
    }
}

TEST_CASE("periodic vs free blocks: margin controls the difference") {
    LatticeSumConfig cfg;
    const TimeGrid tg(0.005, 4);
    auto block_gap = [&](double radius) {
        const ReferenceShape shape{{0.5, 0.5}, radius};
        const BoundaryGrid g = build_grid(shape, BoundaryMap::identity(shape), 32, unit_cell,
                                          MapThresholds{0.1, 1e-8, 1e-3});
        const CausalOperator vq = assemble(OperatorKind::Vq, g, tg, unit_cell, cfg);
        const CausalOperator v = assemble(OperatorKind::V, g, tg, unit_cell, cfg);
        double gap = 0.0;
        for (int m = 0; m < tg.M; ++m)
            gap = std::max(gap, (vq.block(m) - v.block(m)).cwiseAbs().maxCoeff());
        return gap;
    };
    REQUIRE(block_gap(0.45) > 1e-3);  // tiny cell margin: images close by
    REQUIRE(block_gap(0.05) < 1e-12); // huge margin: images invisible
}

TEST_CASE("representation choice does not change assembled blocks") {
    const BoundaryGrid g = desk_grid(16);
    const TimeGrid tg(1.0, 8);
    LatticeSumConfig direct_cfg, auto_cfg;
    direct_cfg.representation = Representation::direct;
    const CausalOperator vd = assemble(OperatorKind::Vq, g, tg, unit_cell, direct_cfg);
    const CausalOperator va = assemble(OperatorKind::Vq, g, tg, unit_cell, auto_cfg);
    const CausalOperator wd = assemble(OperatorKind::Wstar_q, g, tg, unit_cell, direct_cfg);
    const CausalOperator wa = assemble(OperatorKind::Wstar_q, g, tg, unit_cell, auto_cfg);
    for (int m = 0; m < tg.M; ++m) {
        REQUIRE((vd.block(m) - va.block(m)).cwiseAbs().maxCoeff() < 10.0 * direct_cfg.tail_tol);
        REQUIRE((wd.block(m) - wa.block(m)).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("eval_field: zero density, t<=0, q-periodicity") {
    const BoundaryGrid g = desk_grid(32);
    const TimeGrid tg(0.5, 8);
    LatticeSumConfig cfg;
    const DensityGrid zero(tg.M, g.N);
    const std::vector<SpaceTimePoint> pts{{0.3, {0.5, 0.52}}, {0.0, {0.1, 0.1}}};
    const auto vz = eval_field(FieldKind::single, g, tg, unit_cell, cfg, zero, pts);
    REQUIRE(vz[0] == 0.0);
    REQUIRE(vz[1] == 0.0);

    const DensityGrid rho = test_density(g, tg);
    const auto v0 = eval_field(FieldKind::single, g, tg, unit_cell, cfg, rho,
                               {{0.0, {0.5, 0.5}}});
    REQUIRE(v0[0] == 0.0);

    const SpaceTimePoint base{0.4, {0.52, 0.51}};
    const SpaceTimePoint shifted{0.4, {0.52, 1.51}};
    const auto vv = eval_field(FieldKind::single, g, tg, unit_cell, cfg, rho, {base, shifted});
    REQUIRE(std::abs(vv[0] - vv[1]) < 1e-10);
    const auto ww = eval_field(FieldKind::double_layer, g, tg, unit_cell, cfg, rho, {base, shifted});
    REQUIRE(std::abs(ww[0] - ww[1]) < 1e-10);

    REQUIRE_THROWS_AS(
        eval_field(FieldKind::single, g, tg, unit_cell, cfg, rho, {{0.3, g.point(4)}}),
        std::invalid_argument);
}

TEST_CASE("single-layer field at the center converges to the quadrature oracle") {
    // Small horizon keeps the lattice images below 1e-15, so the free-space
    // radial oracle applies to the periodic field.
    const double T = 0.01, R = circle.radius;
    auto h = [](double tau) { return tau * (1.0 + 40.0 * tau); };
    const SpaceTimePoint target{T, {0.5, 0.5}};
    const double oracle = testsupport::adaptive_quadrature(
        [&](double tau) {
            return h(tau) * 2.0 * M_PI * R *
                   std::exp(-R * R / (4.0 * (T - tau))) / (4.0 * M_PI * (T - tau));
        },
        0.0, T - 1e-16, 1e-15);
    double prev = 0.0;
    for (const int M : {8, 16, 32, 64}) {
        const TimeGrid tg(T, M);
        const BoundaryGrid g = desk_grid(32);
        const DensityGrid rho = sample_density(tg, g.s, [&](double t, double) { return h(t); });
        const double v = eval_field(FieldKind::single, g, tg, unit_cell, LatticeSumConfig{}, rho,
                                    {target})[0];
        const double err = std::abs(v - oracle);
        if (M > 8) REQUIRE(err < 0.7 * prev); // first-order decay in the slab width
        prev = err;
    }
    REQUIRE(prev < 2e-4 * std::abs(oracle) + 1e-12);
}

TEST_CASE("gradient evaluation matches finite differences of the field") {
    const BoundaryGrid g = desk_grid(32);
    const TimeGrid tg(0.5, 8);
    LatticeSumConfig cfg;
    const DensityGrid rho = test_density(g, tg);
    const SpaceTimePoint tp{0.37, {0.55, 0.48}};
    const auto grad = eval_single_grad(g, tg, unit_cell, cfg, rho, {tp})[0];
    const double h = 1e-5;
    for (int d = 0; d < 2; ++d) {
        SpaceTimePoint tpp = tp, tpm = tp;
        tpp.x[d] += h;
        tpm.x[d] -= h;
        const double fd = (eval_field(FieldKind::single, g, tg, unit_cell, cfg, rho, {tpp})[0] -
                           eval_field(FieldKind::single, g, tg, unit_cell, cfg, rho, {tpm})[0]) /
                          (2.0 * h);
        REQUIRE(grad[d] == Catch::Approx(fd).margin(1e-8));
    }
}

TEST_CASE("jump relations: zero density gives zero errors") {
    const BoundaryGrid g = desk_grid(16);
    const TimeGrid tg(0.5, 4);
    LatticeSumConfig cfg;
    const DensityGrid zero(tg.M, g.N);
    const JumpReport rs = jump_check(JumpKind::single_normal_derivative, g, tg, unit_cell, cfg, zero);
    REQUIRE(rs.max_error == 0.0);
    const JumpReport rd = jump_check(JumpKind::double_trace, g, tg, unit_cell, cfg, zero);
    REQUIRE(rd.max_error == 0.0);
}

TEST_CASE("jump relations hold for the standard density at desk resolution") {
    const BoundaryGrid g = desk_grid(64);
    const TimeGrid tg(0.5, 32);
    LatticeSumConfig cfg;
    const DensityGrid rho = test_density(g, tg);

    const JumpReport rs = jump_check(JumpKind::single_normal_derivative, g, tg, unit_cell, cfg, rho);
    INFO("single-layer one-sided " << rs.max_error << " jump " << rs.jump_max);
    REQUIRE(rs.jump_max < 5e-2);
    REQUIRE(rs.max_error < 5e-2);

    const JumpReport rd = jump_check(JumpKind::double_trace, g, tg, unit_cell, cfg, rho);
    INFO("double-layer one-sided " << rd.max_error << " jump " << rd.jump_max);
    REQUIRE(rd.jump_max < 5e-2);
    REQUIRE(rd.max_error < 5e-2);
}
