#pragma once

// Exact representation of a factored univariate polynomial
//
//     P(x) = C * prod_i (x - x_i) * prod_j (x^2 + a_j x + b_j)
//
// by a network of identity-activation quadratic neurons: the first layer
// evaluates one factor per neuron, and each later layer multiplies adjacent
// pairs (a quadratic neuron with w_r = (1,0), w_g = (0,1) is a product gate).
// Depth is ceil(log2(l1 + l2)) + 1 and width at most l1 + l2.

#include "qae/quadratic.hpp"

#include <utility>
#include <vector>

namespace qae {

struct FactoredPoly {
    double scale{1.0};
    std::vector<double> roots;
    /// (a_j, b_j) for x^2 + a_j x + b_j.
    std::vector<std::pair<double, double>> quadratics;

    std::size_t factor_count() const noexcept { return roots.size() + quadratics.size(); }
    std::size_t degree() const noexcept { return roots.size() + 2 * quadratics.size(); }

    /// Direct product-form evaluation.
    double evaluate(double x) const;
};

struct PolyNeuron {
    /// Indices into the previous layer's outputs (into {x} for the first layer).
    std::vector<std::size_t> inputs;
    QuadraticParams params;
};

struct PolyNet {
    std::vector<std::vector<PolyNeuron>> layers;

    std::size_t depth() const noexcept { return layers.size(); }
    std::size_t max_width() const noexcept;
};

/// Throws ArgumentError when the polynomial has no factors.
PolyNet build_polynet(const FactoredPoly& poly);
double eval_polynet(const PolyNet& net, double x);

/// ceil(log2(factors)) + 1.
std::size_t polynet_depth_bound(std::size_t factors);

} // namespace qae
