#include "qae/polynet.hpp"

#include "qae/errors.hpp"

#include <algorithm>

namespace qae {

double FactoredPoly::evaluate(double x) const {
    double v = scale;
    for (double r : roots) v *= x - r;
    for (const auto& [a, b] : quadratics) v *= x * x + a * x + b;
    return v;
}

std::size_t PolyNet::max_width() const noexcept {
    std::size_t w = 0;
    for (const auto& layer : layers) w = std::max(w, layer.size());
    return w;
}

std::size_t polynet_depth_bound(std::size_t factors) {
    std::size_t depth = 1;
    for (std::size_t span = 1; span < factors; span *= 2) ++depth;
    return depth;
}

namespace {

QuadraticParams scalar_neuron(double w_r, double b_r, double w_g, double b_g, double c) {
    return QuadraticParams{{w_r}, {w_g}, {0.0}, b_r, b_g, c};
}

} // namespace

PolyNet build_polynet(const FactoredPoly& poly) {
    if (poly.factor_count() == 0) throw ArgumentError("polynomial needs at least one factor");
    PolyNet net;
    std::vector<PolyNeuron> leaves;
    bool scaled = false;
    const double C = poly.scale;

    for (double root : poly.roots) {
        const double s = scaled ? 1.0 : C;
        // s * (x - root) * 1
        leaves.push_back({{0}, scalar_neuron(s, -s * root, 0.0, 1.0, 0.0)});
        scaled = true;
    }
    for (const auto& [a, b] : poly.quadratics) {
        const double s = scaled ? 1.0 : C;
        // x * (s x + s a) + s b
        leaves.push_back({{0}, scalar_neuron(1.0, 0.0, s, s * a, s * b)});
        scaled = true;
    }
    net.layers.push_back(std::move(leaves));

    while (net.layers.back().size() > 1) {
        const std::size_t n = net.layers.back().size();
        std::vector<PolyNeuron> next;
        for (std::size_t i = 0; i + 1 < n; i += 2) {
            next.push_back({{i, i + 1}, QuadraticParams{{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}, 0.0, 0.0, 0.0}});
        }
        if (n % 2 == 1) next.push_back({{n - 1}, scalar_neuron(1.0, 0.0, 0.0, 1.0, 0.0)});
        net.layers.push_back(std::move(next));
    }
    return net;
}

double eval_polynet(const PolyNet& net, double x) {
    std::vector<double> values{x};
    std::vector<double> gathered;
    for (const auto& layer : net.layers) {
        std::vector<double> next;
        next.reserve(layer.size());
        for (const PolyNeuron& neuron : layer) {
            gathered.clear();
            for (std::size_t idx : neuron.inputs) gathered.push_back(values.at(idx));
            next.push_back(quad_forward(gathered, neuron.params, Activation::identity()));
        }
        values = std::move(next);
    }
    return values.at(0);
}

} // namespace qae
