#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "periheat/geometry.hpp"
#include "periheat/potentials.hpp"
#include "periheat/transmission.hpp"

namespace periheat {

/// Central-difference probe record: quotient norms over a shrinking step
/// ladder, their successive differences and the observed consistency orders.
struct ProbeReport {
    std::vector<double> h;               ///< strictly decreasing steps
    std::vector<double> quotient_norm;   ///< ‖Q(h_m)‖ in the grid max norm
    std::vector<double> second_difference; ///< ‖Q(h_m) - Q(h_{m+1})‖
    std::vector<double> observed_order;  ///< from consecutive difference pairs
    double noise_floor = 0.0;
    std::string note = "probes test the action on one fixed density in a grid norm, "
                       "not an operator-norm statement";

    /// Smallest observed order among differences above the noise floor;
    /// +inf when nothing is observable (all differences at the floor).
    double min_observed_order() const {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < second_difference.size(); ++i) {
            if (second_difference[i] <= noise_floor || second_difference[i + 1] <= noise_floor) continue;
            mn = std::min(mn, observed_order[i]);
        }
        return mn;
    }
};

inline std::vector<double> default_h_ladder() { return {1e-2, 5e-3, 2.5e-3, 1.25e-3}; }

namespace detail {

inline void finish_report(ProbeReport& rep, const std::vector<Eigen::VectorXd>& quotients) {
    for (const auto& q : quotients) rep.quotient_norm.push_back(q.size() ? q.cwiseAbs().maxCoeff() : 0.0);
    for (std::size_t m = 0; m + 1 < quotients.size(); ++m)
        rep.second_difference.push_back((quotients[m] - quotients[m + 1]).cwiseAbs().maxCoeff());
    for (std::size_t m = 0; m + 1 < rep.second_difference.size(); ++m) {
        const double num = rep.second_difference[m], den = rep.second_difference[m + 1];
        const double hr = rep.h[m] / rep.h[m + 1];
        rep.observed_order.push_back((num > 0.0 && den > 0.0) ? std::log(num / den) / std::log(hr)
                                                              : std::numeric_limits<double>::infinity());
    }
}

inline Eigen::VectorXd flatten(const DensityGrid& d) {
    return Eigen::Map<const Eigen::VectorXd>(d.values.data(), d.values.size());
}

} // namespace detail

/// Central difference quotients of φ ↦ Op[φ]μ along the direction ψ:
/// Q(h) = (Op[φ₀+hψ]μ - Op[φ₀-hψ]μ) / 2h. Second differences shrinking at
/// order 2 witness a first derivative with smooth remainder.
inline ProbeReport fd_operator_derivative(const ReferenceShape& shape, const BoundaryMap& map0,
                                          const BoundaryMap& psi, const DensityGrid& mu,
                                          OperatorKind kind, int N, const TimeGrid& tg,
                                          const Cell2& cell, const LatticeSumConfig& cfg,
                                          std::vector<double> h_list = default_h_ladder()) {
    ProbeReport rep;
    rep.h = h_list;
    rep.noise_floor = 10.0 * cfg.tail_tol / (2.0 * h_list.back());
    std::vector<Eigen::VectorXd> quotients;
    for (double h : h_list) {
        const BoundaryGrid gp = build_grid(shape, perturb(map0, psi, +h), N, cell);
        const BoundaryGrid gm = build_grid(shape, perturb(map0, psi, -h), N, cell);
        const DensityGrid fp = apply(assemble(kind, gp, tg, cell, cfg), mu);
        const DensityGrid fm = apply(assemble(kind, gm, tg, cell, cfg), mu);
        quotients.push_back((detail::flatten(fp) - detail::flatten(fm)) / (2.0 * h));
    }
    detail::finish_report(rep, quotients);
    return rep;
}

/// Chain-rule derivative of the single-layer assembly along a direction
/// whose area element and normals are unchanged (rigid translations):
/// dA_m(i,j) = w_j ∇(slab kernel)·(ψ_i - ψ_j). For ψ ≡ const this vanishes
/// identically, the analytic counterpart of translation invariance.
inline DensityGrid translation_derivative_vq(const BoundaryGrid& grid, const TimeGrid& tg,
                                             const Cell2& cell, const LatticeSumConfig& cfg,
                                             const BoundaryMap& psi, const DensityGrid& mu) {
    const int N = grid.N, M = tg.M;
    const double dt = tg.dt();
    const double vol = cell.volume();
    const auto plan = detail::make_plan(OperatorKind::Vq, grid, tg, cell, cfg);
    std::vector<Eigen::MatrixXd> dblocks(M, Eigen::MatrixXd::Zero(N, N));
    detail::parallel_for(N, [&](int i) {
        std::vector<double> S;
        std::vector<Eigen::Vector2d> G(M);
        const Eigen::Vector2d psi_i = psi.eval(grid.s[i]);
        for (int j = 0; j < N; ++j) {
            const Eigen::Vector2d dpsi = psi_i - psi.eval(grid.s[j]);
            if (i == j) continue; // ψ_i - ψ_j = 0
            const Eigen::Vector2d d0 = grid.point(i) - grid.point(j);
            detail::pair_slab_sums(plan, d0, false, M, dt, vol, false, true, S, G);
            for (int m = 0; m < M; ++m) dblocks[m](i, j) = grid.weights[j] * G[m].dot(dpsi);
        }
    });
    CausalOperator dop;
    dop.kind = OperatorKind::Vq;
    dop.M = M;
    dop.N = N;
    dop.dt = dt;
    dop.blocks = std::move(dblocks);
    return apply(dop, mu);
}

/// Targets for solution-sensitivity probes, split by side.
struct SolutionProbeTargets {
    std::vector<SpaceTimePoint> interior;
    std::vector<SpaceTimePoint> exterior;
};

/// Central difference quotients of the solution fields u± at fixed
/// off-interface targets under φ₀ ± hψ. Every perturbed interface must keep
/// the targets in their region with the off-boundary margin.
inline ProbeReport fd_solution_derivative(const ReferenceShape& shape, const BoundaryMap& map0,
                                          const BoundaryMap& psi, const TransmissionData& data,
                                          const SolutionProbeTargets& targets, int N,
                                          const TimeGrid& tg, const Cell2& cell,
                                          const LatticeSumConfig& cfg,
                                          std::vector<double> h_list = default_h_ladder()) {
    ProbeReport rep;
    rep.h = h_list;
    rep.noise_floor = 1e-11 / (2.0 * h_list.back());
    std::vector<Eigen::VectorXd> quotients;
    auto eval_at = [&](const BoundaryMap& m) {
        const BoundaryGrid g = build_grid(shape, m, N, cell);
        for (const auto& tp : targets.interior)
            if (locate(tp.x, g, cell) != Region::interior)
                throw std::invalid_argument("fd_solution_derivative: interior target lost its margin");
        for (const auto& tp : targets.exterior)
            if (locate(tp.x, g, cell) != Region::exterior)
                throw std::invalid_argument("fd_solution_derivative: exterior target lost its margin");
        const TransmissionOperators ops = assemble_transmission(g, tg, cell, cfg);
        const TransmissionSolution sol = solve_full(ops, data);
        const auto ui = eval_solution(sol, Side::plus, targets.interior);
        const auto ue = eval_solution(sol, Side::minus, targets.exterior);
        Eigen::VectorXd all(ui.size() + ue.size());
        for (std::size_t k = 0; k < ui.size(); ++k) all[static_cast<int>(k)] = ui[k];
        for (std::size_t k = 0; k < ue.size(); ++k) all[static_cast<int>(ui.size() + k)] = ue[k];
        return all;
    };
    for (double h : h_list) {
        const Eigen::VectorXd fp = eval_at(perturb(map0, psi, +h));
        const Eigen::VectorXd fm = eval_at(perturb(map0, psi, -h));
        quotients.push_back((fp - fm) / (2.0 * h));
    }
    detail::finish_report(rep, quotients);
    return rep;
}

/// Central difference quotients of the solution in a transmission parameter
/// at a fixed interface.
inline ProbeReport fd_lambda_derivative(const TransmissionOperators& ops, const TransmissionData& data,
                                        Side which, const SolutionProbeTargets& targets,
                                        std::vector<double> h_list = default_h_ladder()) {
    ProbeReport rep;
    rep.h = h_list;
    rep.noise_floor = 1e-11 / (2.0 * h_list.back());
    std::vector<Eigen::VectorXd> quotients;
    auto eval_at = [&](double dl) {
        TransmissionData d = data;
        (which == Side::plus ? d.lambda_plus : d.lambda_minus) += dl;
        const TransmissionSolution sol = solve_full(ops, d);
        const auto ui = eval_solution(sol, Side::plus, targets.interior);
        const auto ue = eval_solution(sol, Side::minus, targets.exterior);
        Eigen::VectorXd all(ui.size() + ue.size());
        for (std::size_t k = 0; k < ui.size(); ++k) all[static_cast<int>(k)] = ui[k];
        for (std::size_t k = 0; k < ue.size(); ++k) all[static_cast<int>(ui.size() + k)] = ue[k];
        return all;
    };
    for (double h : h_list) quotients.push_back((eval_at(+h) - eval_at(-h)) / (2.0 * h));
    detail::finish_report(rep, quotients);
    return rep;
}

/// Exact-superposition check of the data-to-solution map:
/// ‖sol(αd₁+βd₂) - (α sol(d₁) + β sol(d₂))‖ over both densities.
inline double linearity_check(const TransmissionOperators& ops, const TransmissionData& d1,
                              const TransmissionData& d2, double alpha, double beta) {
    if (d1.lambda_plus != d2.lambda_plus || d1.lambda_minus != d2.lambda_minus)
        throw std::invalid_argument("linearity_check: data pairs must share transmission parameters");
    TransmissionData comb = d1;
    comb.f.values = alpha * d1.f.values + beta * d2.f.values;
    comb.g.values = alpha * d1.g.values + beta * d2.g.values;
    const TransmissionSolution s = solve_full(ops, comb);
    const TransmissionSolution s1 = solve_full(ops, d1);
    const TransmissionSolution s2 = solve_full(ops, d2);
    const double ep = (s.rho_plus.values - alpha * s1.rho_plus.values - beta * s2.rho_plus.values)
                          .cwiseAbs()
                          .maxCoeff();
    const double em = (s.rho_minus.values - alpha * s1.rho_minus.values - beta * s2.rho_minus.values)
                          .cwiseAbs()
                          .maxCoeff();
    return std::max(ep, em);
}

} // namespace periheat
