#pragma once

#include <vector>

namespace svinvopt {

/// Gauss-Legendre rule mapped to [0,1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(nodes.size()); }

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (int i = 0; i < size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// Cached n-point Gauss-Legendre rule on [0,1].
const QuadratureRule& gauss_legendre(int n);

/// Fixed rule used for projections and quadrature oracles. 96 nodes resolve
/// the frequency-64pi basis products (n <= 32) to ~1e-14.
inline constexpr int kProjectionNodes = 96;
const QuadratureRule& projection_rule();

}  // namespace svinvopt
