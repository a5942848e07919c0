#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "periheat/cell.hpp"
#include "periheat/expint.hpp"

namespace periheat {

template <int Dim>
using Point = std::array<double, Dim>;

namespace detail {

template <int Dim>
inline double sq_norm(const Point<Dim>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

/// Lattice points with |z|_inf == m in dimension Dim.
inline long shell_count(int dim, int m) {
    if (m == 0) return 1;
    const long w1 = 2L * m + 1, w0 = 2L * m - 1;
    return dim == 2 ? w1 * w1 - w0 * w0 : w1 * w1 * w1 - w0 * w0 * w0;
}

inline double gauss_prefactor(int dim, double t) {
    const double f = 4.0 * M_PI * t;
    return dim == 2 ? 1.0 / f : 1.0 / (f * std::sqrt(f));
}

/// Visit all z in Z^Dim with |z|_inf == m.
template <int Dim, class F>
inline void for_each_shell_point(int m, F&& f) {
    std::array<int, Dim> z{};
    auto rec = [&](auto&& self, int j) -> void {
        if (j == Dim) {
            int zin = 0;
            for (int v : z) zin = std::max(zin, std::abs(v));
            if (zin == m) f(z);
            return;
        }
        for (int v = -m; v <= m; ++v) {
            z[j] = v;
            self(self, j + 1);
        }
    };
    rec(rec, 0);
}

/// Sum of per-shell upper bounds U(m') over m' > m, estimated from the first
/// two omitted shells. The successive ratios U(m'+1)/U(m') decrease in m'
/// whenever U has the form count(m)·g(m) with log-concave-decaying g, so the
/// geometric bound U(m+1)/(1 - q), q = U(m+2)/U(m+1), is an upper bound.
template <class ShellBound>
inline bool tail_below(int m, ShellBound&& U, double tol, double& est_tail) {
    const double u1 = U(m + 1);
    if (u1 <= 0.0) {
        est_tail = 0.0;
        return true;
    }
    const double q = U(m + 2) / u1;
    if (q >= 0.9) return false;
    est_tail = u1 / (1.0 - q);
    return est_tail < tol;
}

} // namespace detail

/// Free-space heat kernel S_n(t,x); zero for t <= 0 away from the origin.
template <int Dim>
inline double free_kernel(double t, const Point<Dim>& x) {
    const double r2 = detail::sq_norm<Dim>(x);
    if (t == 0.0 && r2 == 0.0) throw std::domain_error("free_kernel: undefined at (t,x)=(0,0)");
    if (t <= 0.0) return 0.0;
    return detail::gauss_prefactor(Dim, t) * std::exp(-r2 / (4.0 * t));
}

/// Spatial gradient of S_n: component l equals -x_l/(2t) S_n(t,x).
template <int Dim>
inline Point<Dim> free_kernel_grad(double t, const Point<Dim>& x) {
    const double r2 = detail::sq_norm<Dim>(x);
    if (t == 0.0 && r2 == 0.0) throw std::domain_error("free_kernel_grad: undefined at (t,x)=(0,0)");
    Point<Dim> g{};
    if (t <= 0.0) return g;
    const double s = free_kernel<Dim>(t, x) / (2.0 * t);
    for (int j = 0; j < Dim; ++j) g[j] = -x[j] * s;
    return g;
}

/// Result of a truncated lattice sum: the value plus an upper bound on the
/// omitted tail and bookkeeping about how it was computed.
struct LatticeSumResult {
    double value = 0.0;
    double est_tail = 0.0;
    int shells = 0;
    Representation used = Representation::direct;
};

template <int Dim>
struct LatticeGradResult {
    Point<Dim> value{};
    double est_tail = 0.0;
    int shells = 0;
    Representation used = Representation::direct;
};

namespace detail {

/// Crossover time between the image sum and the dual series; set where the
/// shell count of one roughly equals the mode count of the other.
template <int Dim>
inline double spectral_crossover(const PeriodicityCell<Dim>& cell) {
    const double qmax = cell.max_side();
    return qmax * qmax / 12.0;
}

template <int Dim>
inline Representation pick_representation(double t, const PeriodicityCell<Dim>& cell,
                                          const LatticeSumConfig& cfg) {
    if (cfg.representation != Representation::automatic) return cfg.representation;
    return (t > spectral_crossover(cell)) ? Representation::spectral : Representation::direct;
}

} // namespace detail

/// q-periodic heat kernel S_{q,n}(t,x), extended bookkeeping version.
///
/// Direct mode sums Gaussian images by shells until the analytic tail bound
/// drops below tail_tol. Spectral mode uses the dual series
/// |Q|^{-1} sum_z e^{-4pi^2|q^{-1}z|^2 t} cos(2pi q^{-1}z . x), preferable
/// for large t.
template <int Dim>
inline LatticeSumResult periodic_kernel_ex(double t, const Point<Dim>& x,
                                           const PeriodicityCell<Dim>& cell,
                                           const LatticeSumConfig& cfg) {
    cfg.validate();
    if (t == 0.0 && cell.on_lattice(x)) throw std::domain_error("periodic_kernel: singular lattice point at t=0");
    LatticeSumResult res;
    if (t <= 0.0) return res;
    res.used = detail::pick_representation(t, cell, cfg);

    if (res.used == Representation::direct) {
        const auto xw = cell.wrap_centered(x);
        const double qmin = cell.min_side();
        const double pref = detail::gauss_prefactor(Dim, t);
        auto shell_bound = [&](int m) {
            const double d = qmin * (m - 0.5);
            return pref * detail::shell_count(Dim, m) * std::exp(-d * d / (4.0 * t));
        };
        double sum = 0.0;
        for (int m = 0;; ++m) {
            detail::for_each_shell_point<Dim>(m, [&](const std::array<int, Dim>& z) {
                Point<Dim> y;
                for (int d = 0; d < Dim; ++d) y[d] = xw[d] + cell.q[d] * z[d];
                sum += free_kernel<Dim>(t, y);
            });
            if (detail::tail_below(m, shell_bound, cfg.tail_tol, res.est_tail)) {
                res.shells = m;
                break;
            }
            if (m >= cfg.max_shell)
                throw std::runtime_error("periodic_kernel: max_shell reached before tail_tol met");
        }
        res.value = sum;
        return res;
    }

    const double vol = cell.volume();
    const double qmax = cell.max_side();
    const double aa = 4.0 * M_PI * M_PI * t / (qmax * qmax);
    auto mode_bound = [&](int m) { return detail::shell_count(Dim, m) * std::exp(-aa * m * m) / vol; };
    double sum = 1.0; // z = 0 mode
    for (int m = 0;; ++m) {
        if (m > 0) {
            detail::for_each_shell_point<Dim>(m, [&](const std::array<int, Dim>& z) {
                double k2 = 0.0, kx = 0.0;
                for (int d = 0; d < Dim; ++d) {
                    const double kd = 2.0 * M_PI * z[d] / cell.q[d];
                    k2 += kd * kd;
                    kx += kd * x[d];
                }
                sum += std::exp(-k2 * t) * std::cos(kx);
            });
        }
        if (detail::tail_below(m, mode_bound, cfg.tail_tol, res.est_tail)) {
            res.shells = m;
            break;
        }
        if (m >= cfg.max_shell)
            throw std::runtime_error("periodic_kernel: max_shell reached in spectral mode");
    }
    res.value = sum / vol;
    return res;
}

template <int Dim>
inline double periodic_kernel(double t, const Point<Dim>& x, const PeriodicityCell<Dim>& cell,
                              const LatticeSumConfig& cfg) {
    return periodic_kernel_ex<Dim>(t, x, cell, cfg).value;
}

/// Gradient of S_{q,n}, term-wise over images (or dual modes).
template <int Dim>
inline LatticeGradResult<Dim> periodic_kernel_grad_ex(double t, const Point<Dim>& x,
                                                      const PeriodicityCell<Dim>& cell,
                                                      const LatticeSumConfig& cfg) {
    cfg.validate();
    if (t == 0.0 && cell.on_lattice(x)) throw std::domain_error("periodic_kernel_grad: singular lattice point at t=0");
    LatticeGradResult<Dim> res;
    if (t <= 0.0) return res;
    res.used = detail::pick_representation(t, cell, cfg);

    if (res.used == Representation::direct) {
        // wrapping shifts x by a lattice vector; the gradient is unchanged
        const auto xw = cell.wrap_centered(x);
        const double qmin = cell.min_side();
        const double pref = detail::gauss_prefactor(Dim, t);
        auto shell_bound = [&](int m) {
            const double d = qmin * (m - 0.5);
            const double rho = std::max(d, std::sqrt(2.0 * t)); // argmax of (r/2t)e^{-r^2/4t}
            return pref * detail::shell_count(Dim, m) * (rho / (2.0 * t)) * std::exp(-d * d / (4.0 * t));
        };
        Point<Dim> sum{};
        for (int m = 0;; ++m) {
            detail::for_each_shell_point<Dim>(m, [&](const std::array<int, Dim>& z) {
                Point<Dim> y;
                for (int d = 0; d < Dim; ++d) y[d] = xw[d] + cell.q[d] * z[d];
                const auto g = free_kernel_grad<Dim>(t, y);
                for (int d = 0; d < Dim; ++d) sum[d] += g[d];
            });
            if (detail::tail_below(m, shell_bound, cfg.tail_tol, res.est_tail)) {
                res.shells = m;
                break;
            }
            if (m >= cfg.max_shell)
                throw std::runtime_error("periodic_kernel_grad: max_shell reached before tail_tol met");
        }
        res.value = sum;
        return res;
    }

    const double vol = cell.volume();
    const double qmax = cell.max_side();
    const double qmin = cell.min_side();
    const double aa = 4.0 * M_PI * M_PI * t / (qmax * qmax);
    auto mode_bound = [&](int m) {
        const double kmag = 2.0 * M_PI * m * std::sqrt(static_cast<double>(Dim)) / qmin;
        return detail::shell_count(Dim, m) * kmag * std::exp(-aa * m * m) / vol;
    };
    Point<Dim> sum{};
    for (int m = 1;; ++m) {
        detail::for_each_shell_point<Dim>(m, [&](const std::array<int, Dim>& z) {
            double k2 = 0.0, kx = 0.0;
            std::array<double, Dim> k;
            for (int d = 0; d < Dim; ++d) {
                k[d] = 2.0 * M_PI * z[d] / cell.q[d];
                k2 += k[d] * k[d];
                kx += k[d] * x[d];
            }
            const double w = std::exp(-k2 * t) * std::sin(kx);
            for (int d = 0; d < Dim; ++d) sum[d] -= k[d] * w;
        });
        if (detail::tail_below(m, mode_bound, cfg.tail_tol, res.est_tail)) {
            res.shells = m;
            break;
        }
        if (m >= cfg.max_shell)
            throw std::runtime_error("periodic_kernel_grad: max_shell reached in spectral mode");
    }
    for (int d = 0; d < Dim; ++d) res.value[d] = sum[d] / vol;
    return res;
}

template <int Dim>
inline Point<Dim> periodic_kernel_grad(double t, const Point<Dim>& x, const PeriodicityCell<Dim>& cell,
                                       const LatticeSumConfig& cfg) {
    return periodic_kernel_grad_ex<Dim>(t, x, cell, cfg).value;
}

/// Smooth remainder R_{q,n} = S_{q,n} - S_n, summed over the nonzero images
/// only. Restricted to |x| < min_j q_jj so that z=0 is the singular image.
template <int Dim>
inline double remainder_kernel(double t, const Point<Dim>& x, const PeriodicityCell<Dim>& cell,
                               const LatticeSumConfig& cfg) {
    cfg.validate();
    const double r = std::sqrt(detail::sq_norm<Dim>(x));
    if (!(r < cell.min_side()))
        throw std::domain_error("remainder_kernel: |x| must be < min cell side");
    if (t <= 0.0) return 0.0; // continuous extension through t=0

    const double qmin = cell.min_side();
    const double pref = detail::gauss_prefactor(Dim, t);
    auto shell_bound = [&](int m) {
        const double d = std::max(qmin * m - r, 0.25 * qmin);
        return pref * detail::shell_count(Dim, m) * std::exp(-d * d / (4.0 * t));
    };
    double sum = 0.0;
    double est_tail = 0.0;
    for (int m = 1;; ++m) {
        detail::for_each_shell_point<Dim>(m, [&](const std::array<int, Dim>& z) {
            Point<Dim> y;
            for (int d = 0; d < Dim; ++d) y[d] = x[d] + cell.q[d] * z[d];
            sum += free_kernel<Dim>(t, y);
        });
        if (detail::tail_below(m, shell_bound, cfg.tail_tol, est_tail)) break;
        if (m >= cfg.max_shell)
            throw std::runtime_error("remainder_kernel: max_shell reached before tail_tol met");
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Exact time-slab integrals of the 2d kernel, the workhorse of assembly.
// ---------------------------------------------------------------------------

struct SlabIntegrals {
    double single;      ///< ∫_a^b S_2(σ, r) dσ
    double grad_factor; ///< c with ∫_a^b ∂_{x_l}S_2(σ,d) dσ = d_l · c(|d|,a,b)
};

/// ∫_a^b S_2(σ,r)dσ = (1/4π)[E1(r²/4b) − E1(r²/4a)] and the matching
/// gradient factor −(1/2πr²)(e^{−r²/4b} − e^{−r²/4a}); a=0 uses E1(∞)=0 and
/// the r→0 limit of the factor is −(1/8π)(1/a − 1/b).
inline SlabIntegrals slab_integrals(double r, double a, double b) {
    if (a < 0.0 || b < a) throw std::invalid_argument("slab_integrals: need 0 <= a <= b");
    if (r < 0.0) throw std::invalid_argument("slab_integrals: negative distance");
    if (b == a) return {0.0, 0.0};

    constexpr double inv4pi = 1.0 / (4.0 * M_PI);
    const double r2 = r * r;

    if (r == 0.0) {
        if (a == 0.0) throw std::domain_error("slab_integrals: r=0 with a=0 diverges");
        return {inv4pi * std::log(b / a), -(1.0 / (8.0 * M_PI)) * (1.0 / a - 1.0 / b)};
    }

    const double ub = r2 / (4.0 * b);
    SlabIntegrals out;
    if (a == 0.0) {
        out.single = inv4pi * expint_e1(ub);
        out.grad_factor = -std::exp(-ub) / (2.0 * M_PI * r2);
    } else {
        const double ua = r2 / (4.0 * a);
        out.single = inv4pi * (expint_e1(ub) - expint_e1(ua));
        // e^{-ub} - e^{-ua} = -e^{-ub} expm1(-(ua-ub)), stable for ua ≈ ub
        out.grad_factor = std::exp(-ub) * std::expm1(-(ua - ub)) / (2.0 * M_PI * r2);
    }
    return out;
}

/// Self-interaction value of the single-layer slab integral averaged over a
/// straight panel of length w centered at the target:
/// (1/w)∫_{-w/2}^{w/2} (1/4π) E1(s²/(4Δt)) ds, via the exact antiderivative
/// ∫_0^L E1(s²/c)ds = L·E1(L²/c) + √(πc)·erf(L/√c).
inline double slab_single_panel_avg(double w, double dt) {
    if (!(w > 0.0) || !(dt > 0.0)) throw std::invalid_argument("slab_single_panel_avg: need w,dt > 0");
    const double L = 0.5 * w;
    const double c = 4.0 * dt;
    const double sc = std::sqrt(c);
    const double val = L * expint_e1(L * L / c) + std::sqrt(M_PI) * sc * std::erf(L / sc);
    return val / (2.0 * M_PI * w);
}

} // namespace periheat
