#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

namespace periheat {

/// Uniform partition of [0,T] into M slabs (t_{k-1}, t_k], k = 1..M.
struct TimeGrid {
    double T = 1.0;
    int M = 2;

    TimeGrid() = default;
    TimeGrid(double horizon, int steps) : T(horizon), M(steps) {
        if (!(T > 0.0) || M < 2) throw std::invalid_argument("TimeGrid: need T > 0 and M >= 2");
    }

    double dt() const { return T / M; }
    double t(int k) const { return k * dt(); } // k = 0..M
};

/// Slab-by-node coefficients of a function on [0,T]×∂Ω that is piecewise
/// constant in time and nodal in space; implicitly zero at t = 0.
/// Row k-1 holds slab k = (t_{k-1}, t_k], collocated at t_k.
struct DensityGrid {
    Eigen::MatrixXd values; // M×N

    DensityGrid() = default;
    DensityGrid(int M, int N) : values(Eigen::MatrixXd::Zero(M, N)) {}

    int slabs() const { return static_cast<int>(values.rows()); }
    int nodes() const { return static_cast<int>(values.cols()); }

    double& at(int k, int i) { return values(k - 1, i); }       // slab index k = 1..M
    double at(int k, int i) const { return values(k - 1, i); }

    double max_norm() const { return slabs() == 0 ? 0.0 : values.cwiseAbs().maxCoeff(); }
    double grid_l2(double dt, const Eigen::VectorXd& w) const {
        double s = 0.0;
        for (int k = 0; k < slabs(); ++k)
            for (int i = 0; i < nodes(); ++i) s += values(k, i) * values(k, i) * dt * w[i];
        return std::sqrt(s);
    }

    DensityGrid& operator+=(const DensityGrid& o) { values += o.values; return *this; }
    DensityGrid& operator-=(const DensityGrid& o) { values -= o.values; return *this; }
    DensityGrid& operator*=(double c) { values *= c; return *this; }

    friend DensityGrid operator+(DensityGrid a, const DensityGrid& b) { return a += b; }
    friend DensityGrid operator-(DensityGrid a, const DensityGrid& b) { return a -= b; }
    friend DensityGrid operator*(double c, DensityGrid a) { return a *= c; }
};

/// Sample f(t_k, s_i) at the slab collocation times.
inline DensityGrid sample_density(const TimeGrid& tg, const Eigen::VectorXd& s,
                                  const std::function<double(double, double)>& f) {
    DensityGrid rho(tg.M, static_cast<int>(s.size()));
    for (int k = 1; k <= tg.M; ++k)
        for (int i = 0; i < s.size(); ++i) rho.at(k, i) = f(tg.t(k), s[i]);
    return rho;
}

/// Sample f at slab midpoints t_{k-1/2}; second-order representation of a
/// smooth density by slab constants, used when manufacturing reference data.
inline DensityGrid sample_density_midpoint(const TimeGrid& tg, const Eigen::VectorXd& s,
                                           const std::function<double(double, double)>& f) {
    DensityGrid rho(tg.M, static_cast<int>(s.size()));
    for (int k = 1; k <= tg.M; ++k)
        for (int i = 0; i < s.size(); ++i) rho.at(k, i) = f(tg.t(k) - 0.5 * tg.dt(), s[i]);
    return rho;
}

} // namespace periheat
