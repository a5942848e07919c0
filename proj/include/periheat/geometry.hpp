#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "periheat/cell.hpp"

namespace periheat {

/// Reference interface: a counterclockwise circle of radius r0 about the
/// given center (the cell center in the default setups).
struct ReferenceShape {
    Eigen::Vector2d center{0.5, 0.5};
    double radius = 0.25;

    Eigen::Vector2d point(double s) const { return center + radius * Eigen::Vector2d(std::cos(s), std::sin(s)); }
    Eigen::Vector2d tangent(double s) const { return radius * Eigen::Vector2d(-std::sin(s), std::cos(s)); }
    double speed(double) const { return radius; }
};

/// Perturbing map composed with the reference parametrization: each image
/// component is a truncated Fourier series in the reference parameter.
/// The identity map for a circle is degree-1 with the circle's coefficients.
struct BoundaryMap {
    // coefficient k of cos(ks)/sin(ks), k = 0..degree (sin at k=0 unused)
    Eigen::VectorXd cos_x, sin_x, cos_y, sin_y;

    int degree() const { return static_cast<int>(cos_x.size()) - 1; }

    static BoundaryMap zero(int degree) {
        BoundaryMap m;
        m.cos_x = Eigen::VectorXd::Zero(degree + 1);
        m.sin_x = Eigen::VectorXd::Zero(degree + 1);
        m.cos_y = Eigen::VectorXd::Zero(degree + 1);
        m.sin_y = Eigen::VectorXd::Zero(degree + 1);
        return m;
    }

    /// Map whose image is the reference circle itself.
    static BoundaryMap identity(const ReferenceShape& shape) {
        BoundaryMap m = zero(1);
        m.cos_x[0] = shape.center.x();
        m.cos_y[0] = shape.center.y();
        m.cos_x[1] = shape.radius;
        m.sin_y[1] = shape.radius;
        return m;
    }

    /// Axis-aligned ellipse with semi-axes (a,b) about `center`.
    static BoundaryMap ellipse(const Eigen::Vector2d& center, double a, double b) {
        BoundaryMap m = zero(1);
        m.cos_x[0] = center.x();
        m.cos_y[0] = center.y();
        m.cos_x[1] = a;
        m.sin_y[1] = b;
        return m;
    }

    Eigen::Vector2d eval(double s) const {
        double x = 0.0, y = 0.0;
        for (int k = 0; k <= degree(); ++k) {
            const double c = std::cos(k * s), sn = std::sin(k * s);
            x += cos_x[k] * c + sin_x[k] * sn;
            y += cos_y[k] * c + sin_y[k] * sn;
        }
        return {x, y};
    }

    Eigen::Vector2d deriv(double s) const {
        double x = 0.0, y = 0.0;
        for (int k = 1; k <= degree(); ++k) {
            const double c = std::cos(k * s), sn = std::sin(k * s);
            x += k * (-cos_x[k] * sn + sin_x[k] * c);
            y += k * (-cos_y[k] * sn + sin_y[k] * c);
        }
        return {x, y};
    }

    Eigen::Vector2d deriv2(double s) const {
        double x = 0.0, y = 0.0;
        for (int k = 1; k <= degree(); ++k) {
            const double c = std::cos(k * s), sn = std::sin(k * s);
            x -= k * k * (cos_x[k] * c + sin_x[k] * sn);
            y -= k * k * (cos_y[k] * c + sin_y[k] * sn);
        }
        return {x, y};
    }

    double coeff_norm() const {
        return std::sqrt(cos_x.squaredNorm() + sin_x.squaredNorm() + cos_y.squaredNorm() + sin_y.squaredNorm());
    }
};

/// map + h·dir, coefficientwise; degrees are aligned by zero padding.
inline BoundaryMap perturb(const BoundaryMap& map, const BoundaryMap& dir, double h) {
    const int deg = std::max(map.degree(), dir.degree());
    BoundaryMap out = BoundaryMap::zero(deg);
    auto acc = [&](Eigen::VectorXd BoundaryMap::* f) {
        for (int k = 0; k <= map.degree(); ++k) (out.*f)[k] += (map.*f)[k];
        for (int k = 0; k <= dir.degree(); ++k) (out.*f)[k] += h * (dir.*f)[k];
    };
    acc(&BoundaryMap::cos_x);
    acc(&BoundaryMap::sin_x);
    acc(&BoundaryMap::cos_y);
    acc(&BoundaryMap::sin_y);
    return out;
}

struct MapThresholds {
    double min_chord_arc_ratio = 0.1;
    double min_differential = 1e-8;
    double min_cell_margin = 1e-3;
};

struct MapDiagnostics {
    double chord_arc_ratio = 0.0; ///< min over i<j of |p_i-p_j| / circ-dist(s_i,s_j)
    double min_differential = 0.0;
    double cell_margin = 0.0;
    double signed_area = 0.0;
    bool pass = false;
};

/// Discrete injectivity/differential/margin diagnostics on an N-point grid.
inline MapDiagnostics validate_map(const BoundaryMap& map, const ReferenceShape&, int N,
                                   const Cell2& cell, const MapThresholds& thr = {}) {
    if (N < 4) throw std::invalid_argument("validate_map: N too small");
    MapDiagnostics d;
    const double ds = 2.0 * M_PI / N;
    std::vector<Eigen::Vector2d> p(N);
    double min_speed = std::numeric_limits<double>::infinity();
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
        const double s = i * ds;
        p[i] = map.eval(s);
        min_speed = std::min(min_speed, map.deriv(s).norm());
        for (int j = 0; j < 2; ++j) margin = std::min({margin, p[i][j], cell.q[j] - p[i][j]});
    }
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            const double circ = std::min(static_cast<double>(j - i), static_cast<double>(N - (j - i))) * ds;
            ratio = std::min(ratio, (p[i] - p[j]).norm() / circ);
        }
    double area2 = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % N];
        area2 += u.x() * v.y() - u.y() * v.x();
    }
    d.chord_arc_ratio = ratio;
    d.min_differential = min_speed;
    d.cell_margin = margin;
    d.signed_area = 0.5 * area2;
    d.pass = ratio >= thr.min_chord_arc_ratio && min_speed >= thr.min_differential &&
             margin >= thr.min_cell_margin && d.signed_area > 0.0;
    return d;
}

/// Discretized image interface: nodes, outward normals, trapezoid weights
/// (arclength elements of the image curve) and area-element samples.
struct BoundaryGrid {
    int N = 0;
    Eigen::VectorXd s;          ///< uniform parameters s_i
    Eigen::MatrixX2d points;    ///< p_i = (φ∘x)(s_i)
    Eigen::MatrixX2d normals;   ///< outward unit normals at p_i
    Eigen::VectorXd weights;    ///< |(φ∘x)'(s_i)| · 2π/N
    Eigen::VectorXd sigma;      ///< |(φ∘x)'(s_i)| / |x'(s_i)|
    Eigen::VectorXd curvature;  ///< signed curvature of the image curve
    double length = 0.0;        ///< Σ w_i
    double max_spacing = 0.0;   ///< max_i w_i

    Eigen::Vector2d point(int i) const { return points.row(i).transpose(); }
    Eigen::Vector2d normal(int i) const { return normals.row(i).transpose(); }
};

inline BoundaryGrid build_grid(const ReferenceShape& shape, const BoundaryMap& map, int N,
                               const Cell2& cell, const MapThresholds& thr = {}) {
    if (N < 16 || N % 2 != 0) throw std::invalid_argument("build_grid: N must be even and >= 16");
    const MapDiagnostics diag = validate_map(map, shape, N, cell, thr);
    if (!diag.pass) throw std::invalid_argument("build_grid: map failed validation");

    BoundaryGrid g;
    g.N = N;
    g.s.resize(N);
    g.points.resize(N, 2);
    g.normals.resize(N, 2);
    g.weights.resize(N);
    g.sigma.resize(N);
    g.curvature.resize(N);
    const double ds = 2.0 * M_PI / N;
    for (int i = 0; i < N; ++i) {
        const double s = i * ds;
        g.s[i] = s;
        const Eigen::Vector2d p = map.eval(s);
        const Eigen::Vector2d d1 = map.deriv(s);
        const Eigen::Vector2d d2 = map.deriv2(s);
        const double sp = d1.norm();
        g.points.row(i) = p;
        // clockwise rotation of the unit tangent: outward for a ccw curve
        g.normals.row(i) = Eigen::Vector2d(d1.y(), -d1.x()) / sp;
        g.weights[i] = sp * ds;
        g.sigma[i] = sp / shape.speed(s);
        g.curvature[i] = (d1.x() * d2.y() - d1.y() * d2.x()) / (sp * sp * sp);
    }
    g.length = g.weights.sum();
    g.max_spacing = g.weights.maxCoeff();
    return g;
}

enum class Region { interior, exterior, near_boundary };

/// Classify a point against the q-periodized curve: wrap into the curve's
/// cell, then take the winding number of the discrete polygon.
inline Region locate(const Eigen::Vector2d& pt, const BoundaryGrid& grid, const Cell2& cell,
                     double safety_radius = -1.0) {
    if (safety_radius < 0.0) safety_radius = 2.0 * grid.max_spacing;
    Eigen::Vector2d w(pt.x() - cell.q[0] * std::floor(pt.x() / cell.q[0]),
                      pt.y() - cell.q[1] * std::floor(pt.y() / cell.q[1]));
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.N; ++i) {
        const auto d = cell.wrap_centered({w.x() - grid.points(i, 0), w.y() - grid.points(i, 1)});
        dmin = std::min(dmin, std::hypot(d[0], d[1]));
    }
    if (dmin < safety_radius) return Region::near_boundary;

    double angle = 0.0;
    for (int i = 0; i < grid.N; ++i) {
        const Eigen::Vector2d a = grid.point(i) - w;
        const Eigen::Vector2d b = grid.point((i + 1) % grid.N) - w;
        angle += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    }
    return std::abs(angle) > M_PI ? Region::interior : Region::exterior;
}

} // namespace periheat
