#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "periheat/geometry.hpp"
#include "periheat/grids.hpp"
#include "periheat/potentials.hpp"

namespace periheat {

/// Contrast parameter (λ⁻-λ⁺)/(λ⁻+λ⁺) ∈ (-1,1).
inline double contrast(double lambda_plus, double lambda_minus) {
    if (!(lambda_plus > 0.0) || !(lambda_minus > 0.0))
        throw std::invalid_argument("contrast: transmission parameters must be positive");
    return (lambda_minus - lambda_plus) / (lambda_minus + lambda_plus);
}

/// Interface data of the transmission problem: jump of the trace (f) and of
/// the λ-weighted normal derivative (g), both vanishing at t = 0.
struct TransmissionData {
    double lambda_plus = 1.0;
    double lambda_minus = 1.0;
    DensityGrid f;
    DensityGrid g;
};

/// The two assembled boundary operators every solver needs, kept together
/// with the discretization they were built on.
struct TransmissionOperators {
    BoundaryGrid grid;
    TimeGrid tg;
    Cell2 cell{std::array<double, 2>{1.0, 1.0}};
    LatticeSumConfig cfg;
    CausalOperator Vq;
    CausalOperator Wstar;
};

inline TransmissionOperators assemble_transmission(const BoundaryGrid& grid, const TimeGrid& tg,
                                                   const Cell2& cell, const LatticeSumConfig& cfg) {
    TransmissionOperators ops{grid, tg, cell, cfg,
                              assemble(OperatorKind::Vq, grid, tg, cell, cfg),
                              assemble(OperatorKind::Wstar_q, grid, tg, cell, cfg)};
    return ops;
}

/// Single-layer densities solving the discrete interface system, plus the
/// discretization handles the field evaluators need.
struct TransmissionSolution {
    DensityGrid rho_plus;
    DensityGrid rho_minus;
    BoundaryGrid grid;
    TimeGrid tg;
    Cell2 cell{std::array<double, 2>{1.0, 1.0}};
    LatticeSumConfig cfg;
    double diag_rcond = 0.0; ///< reciprocal condition estimate of the slab-0 block
};

namespace detail {

inline void check_rcond(double rcond, const char* what) {
    if (!(rcond > 1e-15))
        throw std::runtime_error(std::string(what) + ": slab-0 block numerically singular (rcond=" +
                                 std::to_string(rcond) + ")");
}

} // namespace detail

/// Causal first-kind solve A σ = f by time marching; one factorization of
/// the slab-0 block serves every step.
inline DensityGrid solve_first_kind(const CausalOperator& A, const DensityGrid& f,
                                    double* rcond_out = nullptr) {
    if (f.slabs() != A.M || f.nodes() != A.N) throw std::invalid_argument("solve_first_kind: shape mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A.block(0));
    const double rc = lu.rcond();
    if (rcond_out) *rcond_out = rc;
    detail::check_rcond(rc, "solve_first_kind");
    DensityGrid sigma(A.M, A.N);
    for (int k = 1; k <= A.M; ++k) {
        Eigen::VectorXd rhs = f.values.row(k - 1).transpose();
        for (int m = 1; m < k; ++m) rhs -= A.block(m) * sigma.values.row(k - m - 1).transpose();
        sigma.values.row(k - 1) = lu.solve(rhs).transpose();
    }
    return sigma;
}

/// Causal second-kind solve (I - 2γ B) ρ = rhs by time marching.
inline DensityGrid solve_resolvent(const CausalOperator& B, double gamma, const DensityGrid& rhs,
                                   double* rcond_out = nullptr) {
    if (rhs.slabs() != B.M || rhs.nodes() != B.N) throw std::invalid_argument("solve_resolvent: shape mismatch");
    const Eigen::MatrixXd D = Eigen::MatrixXd::Identity(B.N, B.N) - 2.0 * gamma * B.block(0);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(D);
    const double rc = lu.rcond();
    if (rcond_out) *rcond_out = rc;
    detail::check_rcond(rc, "solve_resolvent");
    DensityGrid rho(B.M, B.N);
    for (int k = 1; k <= B.M; ++k) {
        Eigen::VectorXd r = rhs.values.row(k - 1).transpose();
        for (int m = 1; m < k; ++m) r += 2.0 * gamma * (B.block(m) * rho.values.row(k - m - 1).transpose());
        rho.values.row(k - 1) = lu.solve(r).transpose();
    }
    return rho;
}

/// Time-marching solve of the coupled 2N×2N interface system
///   Vq ρ⁺ - Vq ρ⁻ = f
///   λ⁻(-½ρ⁻ + W*_q ρ⁻) - λ⁺(½ρ⁺ + W*_q ρ⁺) = g.
inline TransmissionSolution solve_full(const TransmissionOperators& ops, const TransmissionData& data) {
    const int N = ops.Vq.N, M = ops.Vq.M;
    if (data.f.slabs() != M || data.f.nodes() != N || data.g.slabs() != M || data.g.nodes() != N)
        throw std::invalid_argument("solve_full: data shape mismatch");
    if (!(data.lambda_plus > 0.0) || !(data.lambda_minus > 0.0))
        throw std::invalid_argument("solve_full: transmission parameters must be positive");
    const double lp = data.lambda_plus, lm = data.lambda_minus;

    const Eigen::MatrixXd& A0 = ops.Vq.block(0);
    const Eigen::MatrixXd& B0 = ops.Wstar.block(0);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
    Eigen::MatrixXd D(2 * N, 2 * N);
    D.topLeftCorner(N, N) = A0;
    D.topRightCorner(N, N) = -A0;
    D.bottomLeftCorner(N, N) = -lp * (0.5 * I + B0);
    D.bottomRightCorner(N, N) = lm * (-0.5 * I + B0);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(D);
    const double rc = lu.rcond();
    detail::check_rcond(rc, "solve_full");

    TransmissionSolution sol{DensityGrid(M, N), DensityGrid(M, N), ops.grid, ops.tg, ops.cell, ops.cfg, rc};
    Eigen::VectorXd rhs(2 * N);
    for (int k = 1; k <= M; ++k) {
        Eigen::VectorXd r1 = data.f.values.row(k - 1).transpose();
        Eigen::VectorXd r2 = data.g.values.row(k - 1).transpose();
        for (int m = 1; m < k; ++m) {
            const Eigen::VectorXd dp = sol.rho_plus.values.row(k - m - 1).transpose();
            const Eigen::VectorXd dm = sol.rho_minus.values.row(k - m - 1).transpose();
            r1 -= ops.Vq.block(m) * (dp - dm);
            r2 -= ops.Wstar.block(m) * (lm * dm - lp * dp);
        }
        rhs << r1, r2;
        const Eigen::VectorXd x = lu.solve(rhs);
        sol.rho_plus.values.row(k - 1) = x.head(N).transpose();
        sol.rho_minus.values.row(k - 1) = x.tail(N).transpose();
    }
    return sol;
}

/// Base term of the contrast-reduced second-kind equation,
/// ρ⁻₀ = -2/(λ⁻+λ⁺) (λ⁺(½I + W*_q)(Vq⁻¹ f) + g).
inline DensityGrid reduced_base_term(const TransmissionOperators& ops, const TransmissionData& data,
                                     const DensityGrid& sigma) {
    const double lp = data.lambda_plus, lm = data.lambda_minus;
    DensityGrid rho0 = apply(ops.Wstar, sigma);
    rho0.values += 0.5 * sigma.values;
    rho0.values *= lp;
    rho0.values += data.g.values;
    rho0.values *= -2.0 / (lm + lp);
    return rho0;
}

/// Contrast-reduction route: σ = Vq⁻¹f, then (I - 2λ_c W*_q)ρ⁻ = ρ⁻₀,
/// then ρ⁺ = ρ⁻ + σ. Algebraically equivalent to solve_full.
inline TransmissionSolution solve_reduced(const TransmissionOperators& ops, const TransmissionData& data) {
    const double lc = contrast(data.lambda_plus, data.lambda_minus);
    double rc_first = 0.0, rc_res = 0.0;
    const DensityGrid sigma = solve_first_kind(ops.Vq, data.f, &rc_first);
    const DensityGrid rho0 = reduced_base_term(ops, data, sigma);
    DensityGrid rho_minus = solve_resolvent(ops.Wstar, lc, rho0, &rc_res);
    DensityGrid rho_plus = rho_minus;
    rho_plus.values += sigma.values;
    return TransmissionSolution{std::move(rho_plus), std::move(rho_minus), ops.grid, ops.tg,
                                ops.cell,            ops.cfg,              std::min(rc_first, rc_res)};
}

/// Probe of the resolvent family (I - 2γ W*_q) across γ ∈ [-1,1].
struct GammaProbeResult {
    DensityGrid rho;
    double rcond = 0.0;
    double residual = 0.0; ///< max norm of (I-2γW*_q)ρ - rhs
};

inline GammaProbeResult solve_gamma_probe(const TransmissionOperators& ops, double gamma,
                                          const DensityGrid& rhs) {
    if (gamma < -1.0 || gamma > 1.0) throw std::invalid_argument("solve_gamma_probe: gamma outside [-1,1]");
    GammaProbeResult out;
    out.rho = solve_resolvent(ops.Wstar, gamma, rhs, &out.rcond);
    DensityGrid res = apply(ops.Wstar, out.rho);
    res.values = out.rho.values - 2.0 * gamma * res.values - rhs.values;
    out.residual = res.max_norm();
    return out;
}

enum class Side { plus, minus };

/// Field values u± at off-boundary targets via the single-layer
/// representation with the solved densities; q-periodic, zero at t=0.
/// Targets must lie in the matching region.
inline std::vector<double> eval_solution(const TransmissionSolution& sol, Side side,
                                         const std::vector<SpaceTimePoint>& targets) {
    for (const auto& tp : targets) {
        const Region r = locate(tp.x, sol.grid, sol.cell);
        if (side == Side::plus && r != Region::interior)
            throw std::invalid_argument("eval_solution: plus-side target not strictly interior");
        if (side == Side::minus && r != Region::exterior)
            throw std::invalid_argument("eval_solution: minus-side target not strictly exterior");
    }
    const DensityGrid& rho = (side == Side::plus) ? sol.rho_plus : sol.rho_minus;
    return eval_field(FieldKind::single, sol.grid, sol.tg, sol.cell, sol.cfg, rho, targets);
}

struct ResidualReport {
    double trace_max = 0.0;
    double trace_l2 = 0.0;
    double flux_max = 0.0;
    double flux_l2 = 0.0;
};

/// Interface residuals of a candidate density pair, evaluated through the
/// assembled operators and the one-sided trace relations (no off-boundary
/// extrapolation): trace residual Vqρ⁺ - Vqρ⁻ - f and flux residual
/// λ⁻(-½ρ⁻ + W*ρ⁻) - λ⁺(½ρ⁺ + W*ρ⁺) - g.
inline ResidualReport residuals(const TransmissionOperators& ops, const TransmissionSolution& sol,
                                const TransmissionData& data) {
    const double lp = data.lambda_plus, lm = data.lambda_minus;
    DensityGrid trace = apply(ops.Vq, sol.rho_plus);
    trace.values -= apply(ops.Vq, sol.rho_minus).values;
    trace.values -= data.f.values;

    DensityGrid flux = apply(ops.Wstar, sol.rho_minus);
    flux.values = lm * (flux.values - 0.5 * sol.rho_minus.values);
    DensityGrid wp = apply(ops.Wstar, sol.rho_plus);
    flux.values -= lp * (0.5 * sol.rho_plus.values + wp.values);
    flux.values -= data.g.values;

    ResidualReport rep;
    rep.trace_max = trace.max_norm();
    rep.flux_max = flux.max_norm();
    rep.trace_l2 = trace.grid_l2(ops.tg.dt(), ops.grid.weights);
    rep.flux_l2 = flux.grid_l2(ops.tg.dt(), ops.grid.weights);
    return rep;
}

/// Interface data whose exact discrete solution is the given density pair:
/// f := Vqμ⁺ - Vqμ⁻ and g := λ⁻(-½μ⁻ + W*μ⁻) - λ⁺(½μ⁺ + W*μ⁺).
inline TransmissionData manufactured(const TransmissionOperators& ops, const DensityGrid& mu_plus,
                                     const DensityGrid& mu_minus, double lambda_plus,
                                     double lambda_minus) {
    TransmissionData data;
    data.lambda_plus = lambda_plus;
    data.lambda_minus = lambda_minus;
    data.f = apply(ops.Vq, mu_plus);
    data.f.values -= apply(ops.Vq, mu_minus).values;
    DensityGrid g = apply(ops.Wstar, mu_minus);
    g.values = lambda_minus * (g.values - 0.5 * mu_minus.values);
    DensityGrid wp = apply(ops.Wstar, mu_plus);
    g.values -= lambda_plus * (0.5 * mu_plus.values + wp.values);
    data.g = g;
    return data;
}

} // namespace periheat
