#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace periheat {

/// Axis-aligned periodicity cell (0,q_11)×…×(0,q_nn), stored as the
/// diagonal of the lattice matrix.
template <int Dim>
struct PeriodicityCell {
    static_assert(Dim == 2 || Dim == 3, "cells are 2- or 3-dimensional");

    std::array<double, Dim> q;

    explicit PeriodicityCell(const std::array<double, Dim>& diag) : q(diag) {
        for (double v : q)
            if (!(v > 0.0)) throw std::invalid_argument("PeriodicityCell: side lengths must be positive");
    }

    double volume() const {
        double v = 1.0;
        for (double s : q) v *= s;
        return v;
    }

    double min_side() const {
        double m = q[0];
        for (double s : q) m = std::min(m, s);
        return m;
    }

    double max_side() const {
        double m = q[0];
        for (double s : q) m = std::max(m, s);
        return m;
    }

    /// Translate x by an integer lattice vector into the centered cell
    /// [-q_jj/2, q_jj/2)^Dim. The kernel sums are invariant under this.
    std::array<double, Dim> wrap_centered(const std::array<double, Dim>& x) const {
        std::array<double, Dim> w;
        for (int j = 0; j < Dim; ++j) {
            w[j] = x[j] - q[j] * std::floor(x[j] / q[j] + 0.5);
        }
        return w;
    }

    /// True when x lies on the lattice qZ^n (within tol, after wrapping).
    bool on_lattice(const std::array<double, Dim>& x, double tol = 1e-14) const {
        const auto w = wrap_centered(x);
        double r2 = 0.0;
        for (int j = 0; j < Dim; ++j) r2 += w[j] * w[j];
        return r2 <= tol * tol;
    }
};

using Cell2 = PeriodicityCell<2>;
using Cell3 = PeriodicityCell<3>;

enum class Representation { direct, spectral, automatic };

/// Truncation policy for the lattice sums.
struct LatticeSumConfig {
    double tail_tol = 1e-13;
    int max_shell = 64;
    Representation representation = Representation::automatic;

    void validate() const {
        if (!(tail_tol > 0.0)) throw std::invalid_argument("LatticeSumConfig: tail_tol must be positive");
        if (max_shell < 1) throw std::invalid_argument("LatticeSumConfig: max_shell must be >= 1");
    }
};

} // namespace periheat
