#include "commands.hpp"

#include "qae/errors.hpp"
#include "qae/metrics.hpp"
#include "qae/model.hpp"
#include "qae/polynet.hpp"
#include "qae/rng.hpp"
#include "qae/training.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace qae::cli {

namespace {

class Report {
public:
    explicit Report(const GlobalFlags& g) : g_(g) {}

    void check(bool ok, const std::string& name, const std::string& detail) {
        ++total_;
        if (!ok) failures_.push_back(name);
        const std::string line = std::string(ok ? "PASS " : "FAIL ") + name + (detail.empty() ? "" : "  " + detail);
        text_ += line + "\n";
        if (!ok || !g_.quiet) std::cout << line << '\n';
    }

    int finish(const std::string& what, const KeyValueConfig& cfg) {
        const std::string summary = what + ": " + std::to_string(total_ - failures_.size()) + "/" +
                                    std::to_string(total_) + " checks passed";
        text_ += summary + "\n";
        std::cout << summary << '\n';
        if (const std::string dir = cfg.get_string("out_dir", ""); !dir.empty()) {
            OutputSet out;
            out.add("report.txt", text_);
            out.commit(dir, cfg, "verify " + what);
        }
        if (!failures_.empty()) {
            std::string list;
            for (const auto& f : failures_) list += (list.empty() ? "" : ", ") + f;
            throw CheckFailed(what + " failed: " + list);
        }
        return 0;
    }

private:
    const GlobalFlags& g_;
    std::size_t total_{0};
    std::vector<std::string> failures_;
    std::string text_;
};

std::string sci(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

void randomize(QAEModel& m, std::uint64_t seed, double spread) {
    Rng rng = make_rng(seed, "verify-params");
    std::uniform_real_distribution<double> d(-spread, spread);
    for_each_group(m.params(), [&](std::span<double> v) {
        for (double& x : v) x = d(rng);
    });
}

// Without ReLU the ten layers compose into a degree-1024 polynomial, so a
// wide uniform draw overflows. Stay near the reduction configuration.
void randomize_near_linear(QAEModel& m, std::uint64_t seed) {
    Rng rng = make_rng(seed, "verify-params");
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        auto& p = m.quadratic(i);
        for (double& x : p.w_r.values()) x = 0.4 * d(rng);
        for (double& x : p.w_g.values()) x = 0.1 * d(rng);
        for (double& x : p.w_b.values()) x = 0.1 * d(rng);
        for (double& x : p.b_r) x = 0.1 * d(rng);
        for (double& x : p.b_g) x = 1.0 + 0.1 * d(rng);
        for (double& x : p.c) x = 0.1 * d(rng);
    }
}

Tensor random_image(std::uint64_t seed, const char* stream, std::size_t size) {
    Rng rng = make_rng(seed, stream);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Tensor t(Shape{1, size, size});
    for (double& v : t.values()) v = d(rng);
    return t;
}

int verify_grad_check(const KeyValueConfig& cfg, const GlobalFlags& g) {
    const auto seed = setting([&] { return cfg.get_u64("seed", 1); });
    const auto samples = setting([&] { return cfg.get_size("samples", 200); });
    const auto size = setting([&] { return cfg.get_size("probe_size", 8); });
    const double tol = 1e-5;
    Report report(g);

    for (auto act : {Activation::identity(), Activation::relu()}) {
        QAEConfig c{2, 3, NeuronKind::Quadratic, act};
        QAEModel m(c);
        const Tensor probe = random_image(seed, "verify-probe", size);
        const Tensor target = random_image(seed, "verify-target", size);
        // ReLU is only differentiable away from its kink: search for a
        // parameter draw whose pre-activations all keep a margin.
        std::uint64_t s = seed;
        GradCheckReport r;
        if (act.kind == Activation::Kind::Identity) {
            randomize_near_linear(m, s);
            r = grad_check(m, probe, target, {1e-5, samples, s});
        } else {
            // ReLU is only differentiable away from its kink: search for a
            // parameter draw whose pre-activations all keep a margin.
            for (int attempt = 0; attempt < 1000; ++attempt, ++s) {
                randomize(m, s, 0.5);
                r = grad_check(m, probe, target, {1e-5, samples, s});
                if (r.min_preactivation_margin > 1e-3 && r.max_analytic > 0.0) break;
            }
        }
        const bool margin_ok = act.kind != Activation::Kind::ReLU || r.min_preactivation_margin > 1e-3;
        report.check(margin_ok && r.max_analytic > 0.0 && r.max_relative_error < tol,
                     "grad-check " + activation_name(act.kind),
                     "max_rel_err=" + sci(r.max_relative_error) + " tol=" + sci(tol) + " checked=" +
                         std::to_string(r.checked) + " min_margin=" + sci(r.min_preactivation_margin) +
                         " param_seed=" + std::to_string(s));
    }
    return report.finish("grad-check", cfg);
}

int verify_count_params(const KeyValueConfig& cfg, const GlobalFlags& g) {
    Report report(g);
    const std::pair<std::size_t, std::size_t> table[] = {{8, 14475}, {15, 49818}, {32, 223779}, {48, 501555}};
    for (auto [width, expected] : table) {
        const std::size_t got = QAEModel(QAEConfig{width, 3, NeuronKind::Quadratic, Activation::relu()}).count_params();
        report.check(got == expected, "count-params Q-AE(" + std::to_string(width) + ")",
                     "expected=" + std::to_string(expected) + " got=" + std::to_string(got));
    }
    const std::size_t ae = count_params(QAEConfig{15, 3, NeuronKind::Conventional, Activation::relu()});
    const std::size_t ae_biases = 9 * 15 + 1;
    report.check(ae - ae_biases == 16470, "count-params AE(15)",
                 "with_biases=" + std::to_string(ae) + " without_biases=" + std::to_string(ae - ae_biases));
    return report.finish("count-params", cfg);
}

int verify_xor(const KeyValueConfig& cfg, const GlobalFlags& g) {
    Report report(g);
    const QuadraticParams p{{1, 1}, {-2, 0}, {3, 1}, 0, 0, 0};
    const double inputs[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (const auto& in : inputs) {
        const double want = in[0] != in[1] ? 1.0 : 0.0;
        const double got = quad_forward(in, p, Activation::identity());
        report.check(got == want, "xor(" + format_number(in[0]) + "," + format_number(in[1]) + ")",
                     "expected=" + format_number(want) + " got=" + format_number(got));
    }
    return report.finish("xor", cfg);
}

std::vector<double> expand(const FactoredPoly& p) {
    std::vector<double> c{p.scale};
    auto times = [&](std::vector<double> f) {
        std::vector<double> out(c.size() + f.size() - 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < f.size(); ++j) out[i + j] += c[i] * f[j];
        c = std::move(out);
    };
    for (double r : p.roots) times({-r, 1.0});
    for (const auto& [a, b] : p.quadratics) times({b, a, 1.0});
    return c;
}

void check_poly(Report& report, const FactoredPoly& p, const std::string& name) {
    const PolyNet net = build_polynet(p);
    const auto coeffs = expand(p);
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double x = -1.0 + 0.02 * i;
        double value = 0.0, scale = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) {
            value = value * x + coeffs[k];
            scale = scale * std::abs(x) + std::abs(coeffs[k]);
        }
        const double err = std::abs(eval_polynet(net, x) - value) / std::max(scale, 1e-300);
        worst = std::max(worst, err);
    }
    const std::size_t bound = polynet_depth_bound(p.factor_count());
    const bool ok = worst < 1e-8 && net.depth() <= bound && net.max_width() <= p.degree();
    report.check(ok, name,
                 "degree=" + std::to_string(p.degree()) + " depth=" + std::to_string(net.depth()) + "/" +
                     std::to_string(bound) + " width=" + std::to_string(net.max_width()) + " max_rel_err=" + sci(worst));
}

int verify_polynet(const KeyValueConfig& cfg, const GlobalFlags& g) {
    Report report(g);
    const std::string linear = cfg.get_string("linear", "");
    const std::string quadratic = cfg.get_string("quadratic", "");
    if (!linear.empty() || !quadratic.empty()) {
        FactoredPoly p = setting([&] {
            FactoredPoly q;
            q.scale = cfg.get_double("scale", 1.0);
            q.roots = cfg.get_double_list("linear", {});
            for (const std::string& item : split_list(quadratic)) {
                const auto parts = split_list(item, ':');
                if (parts.size() != 2) throw ArgumentError("quadratic factor '" + item + "' is not A:B");
                q.quadratics.emplace_back(parse_double_value(parts[0], "quadratic"),
                                          parse_double_value(parts[1], "quadratic"));
            }
            return q;
        });
        check_poly(report, p, "polynet");
        std::cout << "P(0) = " << format_number(eval_polynet(build_polynet(p), 0.0)) << ", P(1) = "
                  << format_number(eval_polynet(build_polynet(p), 1.0)) << '\n';
        return report.finish("polynet", cfg);
    }
    const auto count = setting([&] { return cfg.get_size("count", 50); });
    const auto max_degree = setting([&] { return cfg.get_size("max_degree", 16); });
    Rng rng = make_rng(setting([&] { return cfg.get_u64("seed", 1); }), "verify-polynet");
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_int_distribution<std::size_t> deg(1, std::max<std::size_t>(1, max_degree));
    for (std::size_t i = 0; i < count; ++i) {
        FactoredPoly p;
        p.scale = u(rng);
        const std::size_t n = deg(rng);
        while (p.degree() < n) {
            if (n - p.degree() >= 2 && rng() % 2) p.quadratics.emplace_back(u(rng), u(rng));
            else p.roots.push_back(u(rng));
        }
        check_poly(report, p, "polynet random #" + std::to_string(i + 1));
    }
    return report.finish("polynet", cfg);
}

int verify_reduce_equiv(const KeyValueConfig& cfg, const GlobalFlags& g) {
    Report report(g);
    const auto seed = setting([&] { return cfg.get_u64("seed", 1); });
    Rng rng = make_rng(seed, "verify-reduce");
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    auto fill = [&](std::span<double> v) {
        for (double& x : v) x = d(rng);
    };

    double layer_err = 0.0;
    const std::size_t layers = 100;
    for (std::size_t i = 0; i < layers; ++i) {
        const std::size_t in = 1 + i % 3, out = 1 + (i / 3) % 3;
        const SpatialOp op{i % 2 ? ConvDirection::Transposed : ConvDirection::Forward,
                           (i / 2) % 2 ? PadMode::Valid : PadMode::Same, 3};
        auto q = QuadraticConvParams::zeros(out, in, 3);
        fill(q.w_r.values());
        fill(q.b_r);
        std::ranges::fill(q.b_g, 1.0);
        Tensor x(Shape{in, 4 + i % 4, 5});
        fill(x.values());
        const Tensor a = quad_conv_forward(x, q, op, Activation::relu());
        const Tensor b = relu(convolve(x, q.w_r, q.b_r, op));
        for (std::size_t k = 0; k < a.size(); ++k) layer_err = std::max(layer_err, std::abs(a[k] - b[k]));
    }
    report.check(layer_err <= 1e-12, "reduce-equiv layers",
                 "layers=" + std::to_string(layers) + " max_abs_diff=" + sci(layer_err) + " tol=1e-12");

    double model_err = 0.0, transfer_err = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        QAEModel q(QAEConfig{4, 3, NeuronKind::Quadratic, Activation::relu()});
        randomize(q, seed + s, 0.4);
        apply_reduction(q);
        const QAEModel twin = conventional_twin(q);

        QAEModel source(QAEConfig{4, 3, NeuronKind::Conventional, Activation::relu()});
        randomize(source, seed + 100 + s, 0.4);
        QAEModel transferred(QAEConfig{4, 3, NeuronKind::Quadratic, Activation::relu()});
        init_transfer(transferred, source);

        const Tensor x = random_image(seed + s, "verify-reduce-image", 16);
        const Tensor a = q.forward(x), b = twin.forward(x);
        const Tensor c = transferred.forward(x), e = source.forward(x);
        for (std::size_t k = 0; k < a.size(); ++k) {
            model_err = std::max(model_err, std::abs(a[k] - b[k]));
            transfer_err = std::max(transfer_err, std::abs(c[k] - e[k]));
        }
    }
    report.check(model_err <= 1e-12, "reduce-equiv model", "max_abs_diff=" + sci(model_err) + " tol=1e-12");
    report.check(transfer_err <= 1e-9, "reduce-equiv transfer", "max_abs_diff=" + sci(transfer_err) + " tol=1e-9");
    return report.finish("reduce-equiv", cfg);
}

using VerifyFn = int (*)(const KeyValueConfig&, const GlobalFlags&);

Command add_check(CLI::App& verify, const GlobalFlags& g, const std::string& name, const std::string& help,
                  std::vector<KeySpec> keys, VerifyFn fn) {
    keys.insert(keys.begin(), {"out_dir", "", "also write report.txt and a manifest here"});
    CLI::App* sub = verify.add_subcommand(name, help);
    auto opts = std::make_shared<CommandOptions>(*sub, "verify " + name, std::move(keys));
    return {sub, [opts, &g, fn] { return fn(opts->resolve(), g); }};
}

} // namespace

std::vector<Command> add_verify(CLI::App& app, const GlobalFlags& g) {
    CLI::App* verify = app.add_subcommand("verify", "self-contained property checks");
    verify->require_subcommand(1);
    return {
        add_check(*verify, g, "grad-check", "analytic vs finite-difference gradients of a small Q-AE",
                  {{"seed", "1", "seed for parameters and probe"},
                   {"samples", "200", "parameters sampled per model"},
                   {"probe_size", "8", "probe image side length"}},
                  verify_grad_check),
        add_check(*verify, g, "count-params", "parameter counts of Q-AE(8/15/32/48) and AE(15)", {},
                  verify_count_params),
        add_check(*verify, g, "xor", "single quadratic neuron computing XOR", {}, verify_xor),
        add_check(*verify, g, "polynet", "quadratic network representing a factored polynomial",
                  {{"seed", "1", "seed for the random polynomials"},
                   {"linear", "", "roots x_i of the linear factors (x - x_i), comma separated"},
                   {"quadratic", "", "A:B pairs for quadratic factors (x^2 + A x + B), comma separated"},
                   {"scale", "1", "leading coefficient"},
                   {"count", "50", "random polynomials when no factors are given"},
                   {"max_degree", "16", "maximum degree of the random polynomials"}},
                  verify_polynet),
        add_check(*verify, g, "reduce-equiv", "reduction and transfer equivalence with conventional networks",
                  {{"seed", "1", "seed for parameters and inputs"}}, verify_reduce_equiv),
    };
}

} // namespace qae::cli
