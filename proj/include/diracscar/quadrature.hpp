#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace diracscar::quadrature {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n from Chebyshev guesses).
inline Rule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    const auto nn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const auto kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = nn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        if (n == 1) {
            x = 0.0;
            dp = 1.0;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

/// Radial rule on r in (0, 1] for integrands f(r) r dr: Gauss-Legendre in t with r = t^2.
/// Weights already include the Jacobian 2t and the area factor r, so that
/// sum_i w_i f(r_i) approximates int_0^1 f(r) r dr. The substitution tames r^(2nu+1)
/// endpoint behaviour of fractional-order modes.
inline Rule radial_area_rule(std::size_t n) {
    Rule t = gauss_legendre(n, 0.0, 1.0);
    Rule out;
    out.nodes.resize(n);
    out.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = t.nodes[i];
        out.nodes[i] = ti * ti;
        out.weights[i] = t.weights[i] * 2.0 * ti * ti * ti;  // dr = 2t dt, times r = t^2
    }
    return out;
}

}  // namespace diracscar::quadrature
