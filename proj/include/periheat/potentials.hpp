#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "periheat/cell.hpp"
#include "periheat/detail/parallel.hpp"
#include "periheat/geometry.hpp"
#include "periheat/grids.hpp"
#include "periheat/kernel.hpp"

namespace periheat {

/// Discretized layer operators on [0,T]×∂Ω. The q-suffixed kinds use the
/// periodic kernel, the plain ones its free-space part, Rq the smooth
/// remainder. V* are single-layer traces, V1/V2 its gradient components,
/// Wstar the normal derivative at the target, W the double-layer trace.
enum class OperatorKind { Vq, Vq1, Vq2, Wstar_q, Wq, Rq, V, V1, V2, Wstar, W };

inline bool kind_is_periodic(OperatorKind k) {
    return k == OperatorKind::Vq || k == OperatorKind::Vq1 || k == OperatorKind::Vq2 ||
           k == OperatorKind::Wstar_q || k == OperatorKind::Wq;
}
inline bool kind_is_remainder(OperatorKind k) { return k == OperatorKind::Rq; }
inline bool kind_is_single(OperatorKind k) {
    return k == OperatorKind::Vq || k == OperatorKind::V || k == OperatorKind::Rq;
}

/// Block lower-triangular Toeplitz realization of a causal space-time
/// operator: (Aρ)_k = Σ_{j<=k} A_{k-j} ρ_j.
struct CausalOperator {
    OperatorKind kind = OperatorKind::Vq;
    int M = 0;
    int N = 0;
    double dt = 0.0;
    std::vector<Eigen::MatrixXd> blocks; // A_0 .. A_{M-1}

    const Eigen::MatrixXd& block(int m) const { return blocks[m]; }
};

namespace detail {

struct AssemblyPlan {
    int m_switch = 0;                       ///< blocks below use image sums, at/above the dual series
    std::vector<Eigen::Vector2d> images;    ///< lattice translates qz for the direct part (z=0 first)
    std::vector<Eigen::Vector2d> modes;     ///< dual wavevectors k_z, z != 0
    std::vector<double> mode_k2;
    double r2_cut = 0.0;
    double u_max = 0.0;
};

inline AssemblyPlan make_plan(OperatorKind kind, const BoundaryGrid& grid, const TimeGrid& tg,
                              const Cell2& cell, const LatticeSumConfig& cfg, double extra_reach = 0.0) {
    cfg.validate();
    AssemblyPlan plan;
    const double dt = tg.dt();
    plan.u_max = -std::log(cfg.tail_tol * 1e-2);

    const bool periodic = kind_is_periodic(kind) || kind_is_remainder(kind);
    if (!periodic) {
        plan.m_switch = tg.M;
        plan.images.emplace_back(0.0, 0.0);
        plan.r2_cut = std::numeric_limits<double>::infinity();
        return plan;
    }

    // equal-cost crossover between image count and mode count
    if (kind_is_remainder(kind) || cfg.representation == Representation::direct) {
        plan.m_switch = tg.M;
    } else if (cfg.representation == Representation::spectral) {
        plan.m_switch = 1;
    } else {
        const double t_cross = cell.q[0] * cell.q[1] / (4.0 * M_PI);
        plan.m_switch = std::min<int>(tg.M, std::max<int>(1, static_cast<int>(std::ceil(t_cross / dt))));
    }

    // furthest pair distance on the grid
    double diam = extra_reach;
    for (int i = 0; i < grid.N; ++i)
        for (int j = i + 1; j < grid.N; ++j)
            diam = std::max(diam, (grid.point(i) - grid.point(j)).norm() + extra_reach);

    const double b_max = plan.m_switch * dt;
    plan.r2_cut = 4.0 * b_max * plan.u_max;
    const double r_reach = std::sqrt(plan.r2_cut) + diam;
    const int zmax = static_cast<int>(std::ceil(r_reach / cell.min_side())) + 1;
    if (zmax > cfg.max_shell)
        throw std::runtime_error("assemble: image shells exceed max_shell; loosen tail_tol or raise max_shell");
    for (int m = 0; m <= zmax; ++m)
        for_each_shell_point<2>(m, [&](const std::array<int, 2>& z) {
            if (kind_is_remainder(kind) && z[0] == 0 && z[1] == 0) return;
            plan.images.emplace_back(cell.q[0] * z[0], cell.q[1] * z[1]);
        });

    if (plan.m_switch < tg.M) {
        const double a_min = plan.m_switch * dt;
        const double k2_cut = plan.u_max / a_min;
        const int zk = static_cast<int>(std::ceil(std::sqrt(k2_cut) * cell.max_side() / (2.0 * M_PI))) + 1;
        for (int m = 1; m <= zk; ++m)
            for_each_shell_point<2>(m, [&](const std::array<int, 2>& z) {
                const Eigen::Vector2d k(2.0 * M_PI * z[0] / cell.q[0], 2.0 * M_PI * z[1] / cell.q[1]);
                const double k2 = k.squaredNorm();
                if (k2 <= k2_cut) {
                    plan.modes.push_back(k);
                    plan.mode_k2.push_back(k2);
                }
            });
    }
    return plan;
}

/// Per-pair slab sums: single-layer values S_m and gradient vectors G_m for
/// every block, combining truncated image sums (early blocks) with the dual
/// series (late blocks). The i==j, z=0 singular term is skipped here and
/// handled by the caller through the panel/curvature rules.
inline void pair_slab_sums(const AssemblyPlan& plan, const Eigen::Vector2d& d0, bool self_pair,
                           int M, double dt, double vol, bool want_single, bool want_grad,
                           std::vector<double>& S, std::vector<Eigen::Vector2d>& G) {
    if (want_single) std::fill(S.begin(), S.end(), 0.0);
    if (want_grad) std::fill(G.begin(), G.end(), Eigen::Vector2d::Zero().eval());

    const int ms = plan.m_switch;
    constexpr double inv4pi = 1.0 / (4.0 * M_PI);
    constexpr double inv2pi = 1.0 / (2.0 * M_PI);

    for (const auto& qz : plan.images) {
        const Eigen::Vector2d dd = d0 + qz;
        const double r2 = dd.squaredNorm();
        const bool origin_image = qz.x() == 0.0 && qz.y() == 0.0;
        if (r2 == 0.0) {
            if (!(self_pair && origin_image))
                throw std::runtime_error("assemble: coincident nodes (singular geometry)");
            // z=0 self term: block 0 is supplied by the caller; later blocks
            // have the exact r=0 limits log((m+1)/m)/4π resp. 0.
            if (want_single)
                for (int m = 1; m < ms; ++m) S[m] += inv4pi * std::log((m + 1.0) / m);
            continue;
        }
        if (r2 > plan.r2_cut) continue;
        // first block this image is visible in: E1(r²/(4(m+1)Δt)) ≥ cutoff
        int m0 = static_cast<int>(std::floor(r2 / (4.0 * dt * plan.u_max)));
        if (m0 >= ms) continue;
        if (m0 < 0) m0 = 0;
        double e_prev = 0.0, x_prev = 0.0; // E1 and exp at slab start t_{m0}
        if (m0 > 0) {
            const double u = r2 / (4.0 * m0 * dt);
            e_prev = want_single ? expint_e1(u) : 0.0;
            x_prev = std::exp(-u);
        }
        for (int m = m0; m < ms; ++m) {
            const double u = r2 / (4.0 * (m + 1) * dt);
            const double x = std::exp(-u);
            if (want_single) {
                const double e = expint_e1(u);
                S[m] += inv4pi * (e - e_prev);
                e_prev = e;
            }
            if (want_grad) {
                const double c = -(x - x_prev) * inv2pi / r2;
                G[m] += c * dd;
                x_prev = x;
            }
        }
    }

    if (ms < M) {
        // dual series: ∫_a^b S_q = (b-a)/|Q| + Σ_{z≠0} cos(k·d)(e^{-k²a}-e^{-k²b})/(k²|Q|)
        if (want_single)
            for (int m = ms; m < M; ++m) S[m] += dt / vol;
        for (std::size_t zi = 0; zi < plan.modes.size(); ++zi) {
            const Eigen::Vector2d& k = plan.modes[zi];
            const double k2 = plan.mode_k2[zi];
            const double kd = k.dot(d0);
            const double dec = std::exp(-k2 * dt);
            double e_a = std::exp(-k2 * (ms * dt));
            const double cs = std::cos(kd) / (k2 * vol);
            const double sn = std::sin(kd) / (k2 * vol);
            for (int m = ms; m < M; ++m) {
                const double e_b = e_a * dec;
                const double diff = e_a - e_b;
                if (want_single) S[m] += cs * diff;
                if (want_grad) G[m] -= (sn * diff) * k;
                e_a = e_b;
                if (e_a < 1e-300) break;
            }
        }
    }
}

} // namespace detail

/// Assemble the causal block-Toeplitz matrix of the requested layer operator
/// by exact time-slab integration and trapezoid collocation in space. The
/// log-singular self entries of the single-layer kinds use the exact panel
/// integral of the local straight-panel model; the gradient kinds use the
/// curvature limits of their kernels.
inline CausalOperator assemble(OperatorKind kind, const BoundaryGrid& grid, const TimeGrid& tg,
                               const Cell2& cell, const LatticeSumConfig& cfg) {
    const int N = grid.N, M = tg.M;
    const double dt = tg.dt();
    const double vol = cell.volume();
    const auto plan = detail::make_plan(kind, grid, tg, cell, cfg);

    const bool want_single = kind_is_single(kind);
    const bool want_grad = !want_single;

    CausalOperator op;
    op.kind = kind;
    op.M = M;
    op.N = N;
    op.dt = dt;
    op.blocks.assign(M, Eigen::MatrixXd::Zero(N, N));

    detail::parallel_for(N, [&](int i) {
        std::vector<double> S(want_single ? M : 0);
        std::vector<Eigen::Vector2d> G(want_grad ? M : 0);
        const Eigen::Vector2d pi = grid.point(i);
        const Eigen::Vector2d ni = grid.normal(i);
        for (int j = 0; j < N; ++j) {
            const Eigen::Vector2d d0 = pi - grid.point(j);
            const double wj = grid.weights[j];
            detail::pair_slab_sums(plan, d0, i == j, M, dt, vol, want_single, want_grad, S, G);
            switch (kind) {
                case OperatorKind::Vq:
                case OperatorKind::V:
                case OperatorKind::Rq:
                    if (i == j && !kind_is_remainder(kind)) S[0] += slab_single_panel_avg(wj, dt);
                    for (int m = 0; m < M; ++m) op.blocks[m](i, j) = wj * S[m];
                    break;
                case OperatorKind::Vq1:
                case OperatorKind::V1:
                case OperatorKind::Vq2:
                case OperatorKind::V2: {
                    const int l = (kind == OperatorKind::Vq1 || kind == OperatorKind::V1) ? 0 : 1;
                    for (int m = 0; m < M; ++m) op.blocks[m](i, j) = wj * G[m][l];
                    if (i == j)
                        op.blocks[0](i, j) += wj * (-grid.curvature[i] * grid.normals(i, l)) / (4.0 * M_PI);
                    break;
                }
                case OperatorKind::Wstar_q:
                case OperatorKind::Wstar:
                    for (int m = 0; m < M; ++m) op.blocks[m](i, j) = wj * G[m].dot(ni);
                    if (i == j) op.blocks[0](i, j) += wj * (-grid.curvature[i]) / (4.0 * M_PI);
                    break;
                case OperatorKind::Wq:
                case OperatorKind::W: {
                    const Eigen::Vector2d nj = grid.normal(j);
                    for (int m = 0; m < M; ++m) op.blocks[m](i, j) = -wj * G[m].dot(nj);
                    if (i == j) op.blocks[0](i, j) += -wj * grid.curvature[i] / (4.0 * M_PI);
                    break;
                }
            }
        }
    });
    return op;
}

/// Causal block convolution.
inline DensityGrid apply(const CausalOperator& op, const DensityGrid& rho) {
    if (rho.slabs() != op.M || rho.nodes() != op.N)
        throw std::invalid_argument("apply: density shape does not match operator");
    DensityGrid out(op.M, op.N);
    for (int k = 1; k <= op.M; ++k) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(op.N);
        for (int j = 1; j <= k; ++j) acc += op.blocks[k - j] * rho.values.row(j - 1).transpose();
        out.values.row(k - 1) = acc.transpose();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Off-boundary potential evaluation
// ---------------------------------------------------------------------------

struct SpaceTimePoint {
    double t;
    Eigen::Vector2d x;
};

enum class FieldKind { single, double_layer };

namespace detail {

/// Slab integral of the periodic kernel between two arbitrary times,
/// image sum or dual series picked per slab. Only the requested parts
/// (scalar, gradient vector) are computed.
inline double periodic_slab(const Eigen::Vector2d& d, double a, double b, const Cell2& cell,
                            const LatticeSumConfig& cfg, bool want_single, bool want_grad,
                            Eigen::Vector2d* grad_out) {
    const double vol = cell.volume();
    const double u_max = -std::log(cfg.tail_tol * 1e-2);
    Representation rep = cfg.representation;
    if (rep == Representation::automatic) {
        const double t_cross = cell.q[0] * cell.q[1] / (4.0 * M_PI);
        rep = (a > t_cross) ? Representation::spectral : Representation::direct;
    }
    if (a == 0.0) rep = Representation::direct;

    double single = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    if (rep == Representation::direct) {
        const double r2_cut = 4.0 * b * u_max;
        const int zmax = static_cast<int>(std::ceil((std::sqrt(r2_cut) + d.norm()) / cell.min_side())) + 1;
        if (zmax > cfg.max_shell) throw std::runtime_error("periodic_slab: image shells exceed max_shell");
        for (int m = 0; m <= zmax; ++m)
            for_each_shell_point<2>(m, [&](const std::array<int, 2>& z) {
                const Eigen::Vector2d dd = d + Eigen::Vector2d(cell.q[0] * z[0], cell.q[1] * z[1]);
                const double r2 = dd.squaredNorm();
                if (r2 > r2_cut) return;
                const double ub = r2 / (4.0 * b);
                if (want_single) {
                    double s = expint_e1(ub);
                    if (a > 0.0) s -= expint_e1(r2 / (4.0 * a));
                    single += s / (4.0 * M_PI);
                }
                if (want_grad) {
                    double c;
                    if (a > 0.0) {
                        const double ua = r2 / (4.0 * a);
                        c = std::exp(-ub) * std::expm1(-(ua - ub)) / (2.0 * M_PI * r2);
                    } else {
                        c = -std::exp(-ub) / (2.0 * M_PI * r2);
                    }
                    grad += c * dd;
                }
            });
    } else {
        if (want_single) single = (b - a) / vol;
        const double k2_cut = u_max / a;
        const int zk = static_cast<int>(std::ceil(std::sqrt(k2_cut) * cell.max_side() / (2.0 * M_PI))) + 1;
        for (int m = 1; m <= zk; ++m)
            for_each_shell_point<2>(m, [&](const std::array<int, 2>& z) {
                const Eigen::Vector2d k(2.0 * M_PI * z[0] / cell.q[0], 2.0 * M_PI * z[1] / cell.q[1]);
                const double k2 = k.squaredNorm();
                if (k2 > k2_cut) return;
                const double diff = std::exp(-k2 * a) - std::exp(-k2 * b);
                if (want_single) single += std::cos(k.dot(d)) * diff / (k2 * vol);
                if (want_grad) grad -= (std::sin(k.dot(d)) * diff / (k2 * vol)) * k;
            });
    }
    if (grad_out) *grad_out = grad;
    return single;
}

} // namespace detail

/// Evaluate the single- or double-layer potential of a slab density at
/// off-boundary space-time targets. Values are q-periodic in x and vanish
/// for t <= 0. Refuses targets within `guard` of the node set
/// (default two grid spacings).
inline std::vector<double> eval_field(FieldKind kind, const BoundaryGrid& grid, const TimeGrid& tg,
                                      const Cell2& cell, const LatticeSumConfig& cfg,
                                      const DensityGrid& rho, const std::vector<SpaceTimePoint>& targets,
                                      double guard = -1.0) {
    if (rho.slabs() != tg.M || rho.nodes() != grid.N)
        throw std::invalid_argument("eval_field: density shape mismatch");
    if (guard < 0.0) guard = 2.0 * grid.max_spacing;
    std::vector<double> out(targets.size(), 0.0);
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        const auto& tp = targets[ti];
        if (tp.t <= 0.0) continue;
        if (locate(tp.x, grid, cell, guard) == Region::near_boundary)
            throw std::invalid_argument("eval_field: target within guard distance of the boundary");
        double acc = 0.0;
        const bool grad = (kind == FieldKind::double_layer);
        for (int j = 1; j <= tg.M && tg.t(j - 1) < tp.t; ++j) {
            const double a = std::max(tp.t - tg.t(j), 0.0);
            const double b = tp.t - tg.t(j - 1);
            for (int l = 0; l < grid.N; ++l) {
                const Eigen::Vector2d d = tp.x - grid.point(l);
                Eigen::Vector2d gvec;
                const double s = detail::periodic_slab(d, a, b, cell, cfg, !grad, grad, &gvec);
                if (kind == FieldKind::single)
                    acc += grid.weights[l] * rho.at(j, l) * s;
                else
                    acc += -grid.weights[l] * rho.at(j, l) * gvec.dot(grid.normal(l));
            }
        }
        out[ti] = acc;
    }
    return out;
}

/// Gradient of the periodic single-layer potential at off-boundary targets.
inline std::vector<Eigen::Vector2d> eval_single_grad(const BoundaryGrid& grid, const TimeGrid& tg,
                                                     const Cell2& cell, const LatticeSumConfig& cfg,
                                                     const DensityGrid& rho,
                                                     const std::vector<SpaceTimePoint>& targets,
                                                     double guard = -1.0) {
    if (guard < 0.0) guard = 2.0 * grid.max_spacing;
    std::vector<Eigen::Vector2d> out(targets.size(), Eigen::Vector2d::Zero());
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        const auto& tp = targets[ti];
        if (tp.t <= 0.0) continue;
        if (locate(tp.x, grid, cell, guard) == Region::near_boundary)
            throw std::invalid_argument("eval_single_grad: target within guard distance of the boundary");
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int j = 1; j <= tg.M && tg.t(j - 1) < tp.t; ++j) {
            const double a = std::max(tp.t - tg.t(j), 0.0);
            const double b = tp.t - tg.t(j - 1);
            for (int l = 0; l < grid.N; ++l) {
                const Eigen::Vector2d d = tp.x - grid.point(l);
                Eigen::Vector2d gvec;
                detail::periodic_slab(d, a, b, cell, cfg, false, true, &gvec);
                acc += grid.weights[l] * rho.at(j, l) * gvec;
            }
        }
        out[ti] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verification operations
// ---------------------------------------------------------------------------

/// Assemble Vq directly and as V + R with identical quadrature; the max
/// entrywise block discrepancy witnesses the periodic/free splitting.
inline double splitting_check(const BoundaryGrid& grid, const TimeGrid& tg, const Cell2& cell,
                              const LatticeSumConfig& cfg) {
    const CausalOperator vq = assemble(OperatorKind::Vq, grid, tg, cell, cfg);
    const CausalOperator v = assemble(OperatorKind::V, grid, tg, cell, cfg);
    const CausalOperator r = assemble(OperatorKind::Rq, grid, tg, cell, cfg);
    double disc = 0.0;
    for (int m = 0; m < tg.M; ++m)
        disc = std::max(disc, (vq.block(m) - v.block(m) - r.block(m)).cwiseAbs().maxCoeff());
    return disc;
}

enum class JumpKind { single_normal_derivative, double_trace };

struct JumpOptions {
    std::vector<double> h_factors = {4.0, 3.0, 2.0}; ///< multiples of max grid spacing
};

struct JumpReport {
    Eigen::MatrixXd plus_error;  ///< |extrapolated one-sided limit - operator prediction|, M×N
    Eigen::MatrixXd minus_error;
    Eigen::MatrixXd jump_error;  ///< |extrapolated jump - density relation|
    double max_error = 0.0;      ///< max over the one-sided errors
    double jump_max = 0.0;       ///< max over the jump-relation errors
    double nonmonotone_share = 0.0; ///< share of probes whose h-residuals failed to shrink
    std::string note;
};

namespace detail {

/// Polynomial (Neville) extrapolation of f(h) to h = 0.
inline double neville_to_zero(const std::vector<double>& h, std::vector<double> f) {
    const std::size_t n = h.size();
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            f[i] = (h[i + m] * f[i] - h[i] * f[i + m]) / (h[i + m] - h[i]);
    return f[0];
}

/// Field probe at p_i + h ν_i for all collocation times at once, reusing the
/// Toeplitz structure of the uniform time grid and the per-pair image/mode
/// chains of the assembler.
inline Eigen::MatrixXd boundary_offset_values(bool grad_dot_normal, bool double_layer,
                                              const BoundaryGrid& grid, const TimeGrid& tg,
                                              const Cell2& cell, const LatticeSumConfig& cfg,
                                              const DensityGrid& rho, double h) {
    const int N = grid.N, M = tg.M;
    const double dt = tg.dt();
    const double vol = cell.volume();
    const bool want_grad = grad_dot_normal || double_layer;
    const auto plan = make_plan(OperatorKind::Vq, grid, tg, cell, cfg, std::abs(h));
    Eigen::MatrixXd out(M, N);
    parallel_for(N, [&](int i) {
        const Eigen::Vector2d x = grid.point(i) + h * grid.normal(i);
        Eigen::MatrixXd rows(M, N);
        std::vector<double> S(want_grad ? 0 : M);
        std::vector<Eigen::Vector2d> G(want_grad ? M : 0);
        for (int l = 0; l < N; ++l) {
            const Eigen::Vector2d d0 = x - grid.point(l);
            pair_slab_sums(plan, d0, false, M, dt, vol, !want_grad, want_grad, S, G);
            for (int m = 0; m < M; ++m) {
                if (grad_dot_normal)
                    rows(m, l) = grid.weights[l] * G[m].dot(grid.normal(i));
                else if (double_layer)
                    rows(m, l) = -grid.weights[l] * G[m].dot(grid.normal(l));
                else
                    rows(m, l) = grid.weights[l] * S[m];
            }
        }
        for (int k = 1; k <= M; ++k) {
            double acc = 0.0;
            for (int j = 1; j <= k; ++j) acc += rows.row(k - j).dot(rho.values.row(j - 1));
            out(k - 1, i) = acc;
        }
    });
    return out;
}

} // namespace detail

/// Verify the one-sided boundary relations of the layer potentials by
/// Richardson extrapolation of off-boundary probes toward the interface.
/// For the single layer the normal derivative limits are compared against
/// ±ρ/2 + W*_q ρ; for the double layer the traces against ∓ρ/2 + W_q ρ.
/// The interior (+) side sits at p - hν, the exterior (−) side at p + hν.
inline JumpReport jump_check(JumpKind kind, const BoundaryGrid& grid, const TimeGrid& tg,
                             const Cell2& cell, const LatticeSumConfig& cfg, const DensityGrid& rho,
                             const JumpOptions& opt = {}) {
    const int N = grid.N, M = tg.M;
    JumpReport rep;
    rep.plus_error.resize(M, N);
    rep.minus_error.resize(M, N);
    rep.jump_error.resize(M, N);
    rep.note = "one-sided limits by Neville extrapolation over h = {";
    for (double f : opt.h_factors) rep.note += std::to_string(f) + ",";
    rep.note += "} x max spacing; ladder and order are implementation choices";

    const bool single = (kind == JumpKind::single_normal_derivative);
    const CausalOperator bo =
        assemble(single ? OperatorKind::Wstar_q : OperatorKind::Wq, grid, tg, cell, cfg);
    const DensityGrid op_rho = apply(bo, rho);

    std::vector<double> hs;
    for (double f : opt.h_factors) hs.push_back(f * grid.max_spacing);

    std::vector<Eigen::MatrixXd> plus_vals, minus_vals;
    for (double h : hs) {
        plus_vals.push_back(
            detail::boundary_offset_values(single, !single, grid, tg, cell, cfg, rho, -h));
        minus_vals.push_back(
            detail::boundary_offset_values(single, !single, grid, tg, cell, cfg, rho, +h));
    }

    std::vector<double> fp(hs.size()), fm(hs.size());
    long nonmono = 0, checked = 0;
    for (int k = 0; k < M; ++k)
        for (int i = 0; i < N; ++i) {
            for (std::size_t m = 0; m < hs.size(); ++m) {
                fp[m] = plus_vals[m](k, i);
                fm[m] = minus_vals[m](k, i);
            }
            const double gp = detail::neville_to_zero(hs, fp);
            const double gm = detail::neville_to_zero(hs, fm);
            if (hs.size() >= 3) {
                ++checked;
                if (std::abs(fp[1] - fp[0]) < std::abs(fp[2] - fp[1]) ||
                    std::abs(fm[1] - fm[0]) < std::abs(fm[2] - fm[1]))
                    ++nonmono;
            }
            const double r = rho.values(k, i);
            const double w = op_rho.values(k, i);
            if (single) {
                rep.plus_error(k, i) = std::abs(gp - (0.5 * r + w));
                rep.minus_error(k, i) = std::abs(gm - (-0.5 * r + w));
                rep.jump_error(k, i) = std::abs((gp - gm) - r);
            } else {
                rep.plus_error(k, i) = std::abs(gp - (-0.5 * r + w));
                rep.minus_error(k, i) = std::abs(gm - (0.5 * r + w));
                rep.jump_error(k, i) = std::abs((gp - gm) - (-r));
            }
        }
    rep.max_error = std::max({rep.plus_error.maxCoeff(), rep.minus_error.maxCoeff()});
    rep.jump_max = rep.jump_error.maxCoeff();
    rep.nonmonotone_share = checked > 0 ? static_cast<double>(nonmono) / checked : 0.0;
    return rep;
}

} // namespace periheat
