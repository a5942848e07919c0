#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace periheat {

/// Exponential integral E1(x) = ∫_x^∞ e^{-u}/u du for x > 0.
///
/// Power series below the crossover, modified-Lentz continued fraction
/// above it. Relative accuracy is a few ulp over the whole range; values
/// underflow to 0 for x beyond ~745.
inline double expint_e1(double x) {
    constexpr double euler_gamma = 0.57721566490153286060651209;
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x < 0.0) throw std::domain_error("expint_e1: negative argument");
    if (x == 0.0) return std::numeric_limits<double>::infinity();

    if (x <= 1.0) {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        double sum = 0.0;
        double term = 1.0;
        for (int k = 1; k <= 40; ++k) {
            term *= -x / k;
            const double del = -term / k;
            sum += del;
            if (std::abs(del) < 1e-18 * (std::abs(sum) + 1.0)) break;
        }
        return -euler_gamma - std::log(x) + sum;
    }

    // Continued fraction e^{-x}/(x+1- 1/(x+3- 4/(x+5- ...))), Lentz form.
    double b = x + 1.0;
    double c = 1.0 / std::numeric_limits<double>::min();
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

} // namespace periheat
