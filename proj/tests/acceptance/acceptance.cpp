// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. Exit status is 1 if any gated criterion fails.

#include "unit/oracles.hpp"

#include "qae/experiments.hpp"
#include "qae/metrics.hpp"
#include "qae/model.hpp"
#include "qae/polynet.hpp"
#include "qae/quadratic.hpp"
#include "qae/rng.hpp"
#include "qae/training.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

using namespace qae;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string sci(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

// Central differences with step 1e-5 on O(10) losses resolve gradients only
// to ~1e-10 absolutely (eps |L| / h rounding, plus h^2 f''' through stacked
// quadratic layers). An entry passes if its relative error is below the
// tolerance or its absolute error is below kGradAtol, i.e. the relative error
// is taken against max(|a|, |n|, kGradAtol / tol).
constexpr double kGradAtol = 1e-9;

struct GradErr {
    double tol;
    double floored{0.0};
    double tight{0.0};  // denominator floor 1e-7 instead, for the report
    double max_abs{0.0};

    explicit GradErr(double t) : tol(t) {}
    void add(double a, double n) {
        const double d = std::abs(a - n), m = std::max(std::abs(a), std::abs(n));
        floored = std::max(floored, d / std::max(m, kGradAtol / tol));
        tight = std::max(tight, d / std::max(m, 1e-7));
        max_abs = std::max(max_abs, d);
    }
    void merge(const GradErr& o) {
        floored = std::max(floored, o.floored);
        tight = std::max(tight, o.tight);
        max_abs = std::max(max_abs, o.max_abs);
    }
    bool ok() const { return floored < tol; }
    std::string str() const {
        return sci(floored) + " (unfloored " + sci(tight) + ", max abs " + sci(max_abs) + ")";
    }
};

// 1 ---------------------------------------------------------------------

// Per layer: three k*k*in*out banks plus three per-output bias vectors.
std::size_t hand_count(std::size_t n, std::size_t k = 3) {
    auto layer = [&](std::size_t in, std::size_t out) { return 3 * k * k * in * out + 3 * out; };
    return layer(1, n) + 8 * layer(n, n) + layer(n, 1);
}

Outcome parameter_counts() {
    const std::array<std::pair<std::size_t, std::size_t>, 4> table{{{8, 14475}, {15, 49818}, {32, 223779}, {48, 501555}}};
    bool ok = true;
    std::string detail;
    for (auto [width, expected] : table) {
        const std::size_t got = QAEModel(QAEConfig{width, 3, NeuronKind::Quadratic, Activation::relu()}).count_params();
        ok = ok && got == expected && hand_count(width) == expected;
        detail += "Q-AE(" + std::to_string(width) + ")=" + std::to_string(got) + " ";
    }
    return {ok, detail + "(expected 14475/49818/223779/501555)"};
}

// 2 ---------------------------------------------------------------------

SpatialOp random_op(std::mt19937_64& rng) {
    const std::size_t k = rng() % 2 ? 3 : 1;
    return {rng() % 2 ? ConvDirection::Transposed : ConvDirection::Forward,
            rng() % 2 ? PadMode::Valid : PadMode::Same, k};
}

double min_abs(const Tensor& t) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : t.values()) m = std::min(m, std::abs(v));
    return m;
}

// L = sum(u * act(layer(x))); every parameter and input entry is checked.
GradErr layer_check(const Tensor& x, QuadraticConvParams p, const SpatialOp& op, const Activation& act,
                    const Tensor& u, double step, double tol) {
    Tensor xv = x;
    auto loss = [&] {
        const Tensor y = quad_conv_forward(xv, p, op, act);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += u[i] * y[i];
        return s;
    };
    QuadraticConvGrads g = quad_backward(x, p, op, act, u);
    GradErr worst(tol);
    for (ParamGroup grp : QuadraticConvParams::kGroups) {
        auto values = p.group(grp);
        auto analytic = g.params.group(grp);
        for (std::size_t i = 0; i < values.size(); ++i) {
            worst.add(analytic[i], oracle::central_difference(loss, values[i], step));
        }
    }
    for (std::size_t i = 0; i < xv.size(); ++i) {
        worst.add(g.input[i], oracle::central_difference(loss, xv.values()[i], step));
    }
    return worst;
}

void near_linear(QAEModel& m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        auto& p = m.quadratic(i);
        for (double& v : p.w_r.values()) v = 0.4 * d(rng);
        for (double& v : p.w_g.values()) v = 0.1 * d(rng);
        for (double& v : p.w_b.values()) v = 0.1 * d(rng);
        for (double& v : p.b_r) v = 0.1 * d(rng);
        for (double& v : p.b_g) v = 1.0 + 0.1 * d(rng);
        for (double& v : p.c) v = 0.1 * d(rng);
    }
}

struct ModelCheck {
    GradErr worst{1.0};
    double margin{0.0};
    std::size_t checked{0};
};

ModelCheck model_check(QAEModel m, const Tensor& x, const Tensor& u, double step, double tol) {
    auto loss = [&] {
        const Tensor y = m.forward(x);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += u[i] * y[i];
        return s;
    };
    const ForwardTrace trace = m.trace(x);
    ModelCheck out;
    out.worst = GradErr(tol);
    out.margin = std::numeric_limits<double>::infinity();
    for (const Tensor& s : trace.sums) out.margin = std::min(out.margin, min_abs(s));
    ModelGradients g = m.backward(trace, u);
    std::vector<std::span<double>> values, analytic;
    for_each_group(m.params(), [&](std::span<double> v) { values.push_back(v); });
    for_each_group(g.layers, [&](std::span<double> v) { analytic.push_back(v); });
    for (std::size_t k = 0; k < values.size(); ++k) {
        for (std::size_t i = 0; i < values[k].size(); ++i) {
            out.worst.add(analytic[k][i], oracle::central_difference(loss, values[k][i], step));
            ++out.checked;
        }
    }
    return out;
}

Outcome gradients() {
    const double step = 1e-5;
    std::mt19937_64 rng(2024);
    GradErr id_layers(1e-6), relu_layers(1e-5);
    std::size_t layers = 0, relu_count = 0;
    while (layers < 120) {
        const std::size_t in = 1 + rng() % 3, out = 1 + rng() % 3;
        const SpatialOp op = random_op(rng);
        QuadraticConvParams p = QuadraticConvParams::zeros(out, in, op.kernel);
        for (ParamGroup grp : QuadraticConvParams::kGroups)
            for (double& v : p.group(grp)) v = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        const Tensor x = oracle::random_tensor(Shape{in, 3 + rng() % 4, 3 + rng() % 4}, rng);
        const Shape ys = quad_conv_forward(x, p, op, Activation::identity()).shape();
        const Tensor u = oracle::random_tensor(ys, rng);
        id_layers.merge(layer_check(x, p, op, Activation::identity(), u, step, 1e-6));
        // ReLU only where every pre-activation is at least 1e-3 from the kink
        if (min_abs(quad_conv_forward_cached(x, p, op).pre) > 1e-3) {
            relu_layers.merge(layer_check(x, p, op, Activation::relu(), u, step, 1e-5));
            ++relu_count;
        }
        ++layers;
    }

    std::mt19937_64 mrng(7);
    const Tensor x = oracle::random_tensor(Shape{1, 8, 8}, mrng, 0.0, 1.0);
    const Tensor u = oracle::random_tensor(Shape{1, 8, 8}, mrng);
    QAEModel id(QAEConfig{2, 3, NeuronKind::Quadratic, Activation::identity()});
    near_linear(id, mrng);
    const ModelCheck mid = model_check(id, x, u, step, 1e-6);

    ModelCheck mrelu;
    std::size_t attempts = 0;
    for (; attempts < 2000; ++attempts) {
        QAEModel r(QAEConfig{2, 3, NeuronKind::Quadratic, Activation::relu()});
        for_each_group(r.params(), [&](std::span<double> v) {
            for (double& e : v) e = std::uniform_real_distribution<double>(-0.5, 0.5)(mrng);
        });
        if (min_abs(r.trace(x).output()) == 0.0) continue;  // dead output gives no signal
        double margin = std::numeric_limits<double>::infinity();
        for (const Tensor& s : r.trace(x).sums) margin = std::min(margin, min_abs(s));
        if (margin <= 1e-3) continue;
        mrelu = model_check(r, x, u, step, 1e-5);
        break;
    }
    const bool relu_found = mrelu.checked > 0;

    const bool ok = layers >= 100 && relu_count > 0 && id_layers.ok() && relu_layers.ok() && mid.worst.ok() &&
                    relu_found && mrelu.worst.ok();
    return {ok, std::to_string(layers) + " layers: identity " + id_layers.str() + ", relu on " +
                    std::to_string(relu_count) + " " + relu_layers.str() + "; Q-AE(2) 8x8 over " +
                    std::to_string(mid.checked) + " params: identity " + mid.worst.str() + ", relu " +
                    (relu_found ? mrelu.worst.str() + " margin " + sci(mrelu.margin)
                                : std::string("no draw with margin")) +
                    "; atol " + sci(kGradAtol)};
}

// 3 ---------------------------------------------------------------------

Outcome reduction() {
    std::mt19937_64 rng(11);
    double layer_err = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t in = 1 + rng() % 3, out = 1 + rng() % 3;
        const bool same = rng() % 2;
        const bool transposed = rng() % 2;
        auto p = QuadraticConvParams::zeros(out, in, 3);
        p.w_r = oracle::random_bank(out, in, 3, rng);
        p.b_r = oracle::random_vector(out, rng);
        std::ranges::fill(p.b_g, 1.0);
        const Tensor x = oracle::random_tensor(Shape{in, 4 + rng() % 4, 4 + rng() % 4}, rng);
        const SpatialOp op{transposed ? ConvDirection::Transposed : ConvDirection::Forward,
                           same ? PadMode::Same : PadMode::Valid, 3};
        const Tensor a = quad_conv_forward(x, p, op, Activation::identity());
        const Tensor b = transposed ? oracle::direct_conv_transpose(x, p.w_r, p.b_r, same)
                                    : oracle::direct_conv(x, p.w_r, p.b_r, same);
        for (std::size_t k = 0; k < a.size(); ++k) layer_err = std::max(layer_err, std::abs(a[k] - b[k]));
    }

    double model_err = 0.0, transfer_err = 0.0;
    for (int s = 0; s < 5; ++s) {
        QAEModel q(QAEConfig{4, 3, NeuronKind::Quadratic, Activation::relu()});
        for_each_group(q.params(), [&](std::span<double> v) {
            for (double& e : v) e = std::uniform_real_distribution<double>(-0.4, 0.4)(rng);
        });
        apply_reduction(q);
        const QAEModel twin = conventional_twin(q);

        QAEModel source(QAEConfig{4, 3, NeuronKind::Conventional, Activation::relu()});
        for_each_group(source.params(), [&](std::span<double> v) {
            for (double& e : v) e = std::uniform_real_distribution<double>(-0.4, 0.4)(rng);
        });
        QAEModel transferred(QAEConfig{4, 3, NeuronKind::Quadratic, Activation::relu()});
        init_transfer(transferred, source);

        const Tensor x = oracle::random_tensor(Shape{1, 16, 16}, rng, 0.0, 1.0);
        const Tensor a = q.forward(x), b = twin.forward(x);
        const Tensor c = transferred.forward(x), d = source.forward(x);
        for (std::size_t k = 0; k < a.size(); ++k) {
            model_err = std::max(model_err, std::abs(a[k] - b[k]));
            transfer_err = std::max(transfer_err, std::abs(c[k] - d[k]));
        }
    }
    return {layer_err <= 1e-12 && model_err <= 1e-12 && transfer_err <= 1e-9,
            "layers " + sci(layer_err) + ", models " + sci(model_err) + " (tol 1e-12); transfer " +
                sci(transfer_err) + " (tol 1e-9)"};
}

// 4 ---------------------------------------------------------------------

Outcome xor_neuron() {
    // (x1 + x2)(-2 x1) + 3 x1^2 + x2^2 = (x1 - x2)^2
    const QuadraticParams p{{1, 1}, {-2, 0}, {3, 1}, 0, 0, 0};
    const double inputs[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    const double want[4] = {0, 1, 1, 0};
    bool ok = true;
    std::string got;
    for (int i = 0; i < 4; ++i) {
        const double y = quad_forward(inputs[i], p, Activation::identity());
        ok = ok && y == want[i];
        got += format_number(y) + (i < 3 ? "," : "");
    }
    return {ok, "outputs (" + got + ")"};
}

// 5 ---------------------------------------------------------------------

Outcome polynomials() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst = 0.0;
    bool bounds = true;
    std::size_t max_deg = 0;
    for (int i = 0; i < 50; ++i) {
        FactoredPoly p;
        p.scale = u(rng);
        const std::size_t n = 1 + rng() % 16;
        while (p.degree() < n) {
            if (n - p.degree() >= 2 && rng() % 2) p.quadratics.emplace_back(u(rng), u(rng));
            else p.roots.push_back(u(rng));
        }
        max_deg = std::max(max_deg, p.degree());
        const PolyNet net = build_polynet(p);
        const auto coeffs = oracle::expand(p.scale, p.roots, p.quadratics);
        for (int k = 0; k <= 100; ++k) {
            const double x = -1.0 + 0.02 * k;
            const double err = std::abs(eval_polynet(net, x) - oracle::horner(coeffs, x)) /
                               std::max(oracle::abs_horner(coeffs, x), 1e-300);
            worst = std::max(worst, err);
        }
        const std::size_t l = p.factor_count();
        const auto depth_bound = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(l)))) + 1;
        bounds = bounds && net.depth() <= depth_bound && net.max_width() <= p.degree();
    }
    return {worst < 1e-8 && bounds, "50 polynomials (max degree " + std::to_string(max_deg) +
                                        "), max relative error " + sci(worst) +
                                        (bounds ? ", depth/width within bounds" : ", BOUND VIOLATED")};
}

// 6 ---------------------------------------------------------------------

Outcome denoising() {
    CorpusSpec cs;
    cs.images = 6;
    cs.image_size = 128;
    cs.patch_size = 64;
    cs.train_patches = 2000;
    cs.val_patches = 200;
    cs.heldout_images = 2;
    const Corpus corpus = build_corpus(cs);
    const MetricReport noisy = noisy_baseline(corpus);

    // init seed 1, shuffle seed 0 (the TrainConfig default)
    TrainConfig tc;
    tc.epochs = 5;
    tc.schedule = LrSchedule::standard(5);
    const QAEModel init = build_qae(QAEConfig{8, 3, NeuronKind::Quadratic, Activation::relu()}, 1);
    const TrainResult r = train(init, corpus.train, corpus.val, tc);
    const MetricReport model = heldout_metrics(r.best, corpus);
    const double gain = model.psnr - noisy.psnr;
    const bool ok = gain >= 2.0 && r.final_val_loss() < r.initial_val_loss();
    return {ok, "PSNR " + format_number(noisy.psnr) + " -> " + format_number(model.psnr) + " dB (gain " +
                    sci(gain) + ", need 2), val loss " + sci(r.initial_val_loss()) + " -> " +
                    sci(r.final_val_loss()) + ", init seed 1, shuffle seed " + std::to_string(tc.seed)};
}

// 7 ---------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& cwd) {
    const std::string cmd = "cd '" + cwd.string() + "' && '" + QAE_CLI_PATH + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("qae_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const int a = run_cli("train --channels 4 --epochs 2 --train-patches 200 --val-patches 20 --patch-size 32 "
                          "--images 2 --image-size 64 --heldout-images 1 --batch-size 20 --out-dir first -q",
                          dir);
    std::ofstream(dir / "manifest.txt") << slurp(dir / "first" / "manifest.txt");
    const int b = run_cli("train --config manifest.txt --out-dir second -q", dir);
    const int c = run_cli("train --config manifest.txt --out-dir third -q --threads 1", dir);
    bool same = a == 0 && b == 0 && c == 0;
    for (const char* f : {"model.qae", "history.csv"}) {
        const std::string x = slurp(dir / "second" / f);
        same = same && !x.empty() && x == slurp(dir / "third" / f) && x == slurp(dir / "first" / f);
    }
    fs::remove_all(dir);
    return {same, "exit codes " + std::to_string(a) + "/" + std::to_string(b) + "/" + std::to_string(c) +
                      (same ? ", history.csv and model.qae byte-identical" : ", outputs differ")};
}

// 8 ---------------------------------------------------------------------

Outcome swap_study() {
    SweepSpec s;
    s.widths = {8, 15};
    s.corpus.train_patches = 400;
    s.corpus.val_patches = 50;
    s.train.epochs = 3;
    s.train.schedule = LrSchedule::standard(3);
    const SwapResult r = run_swap_study(s);
    std::string detail = "reported, not gated:";
    bool finite = !r.pairs.empty();
    for (const SwapPair& p : r.pairs) {
        finite = finite && std::isfinite(p.relative_gap);
        detail += " Q-AE(" + std::to_string(p.qae_width) + ") " + format_number(p.qae_rmse) + " vs AE(" +
                  std::to_string(p.ae_width) + ") " + format_number(p.ae_rmse) + " gap " + sci(100 * p.relative_gap) +
                  "%;";
    }
    return {finite, detail};
}

// 9 ---------------------------------------------------------------------

Outcome activation_study() {
    ActivationStudySpec s;
    s.width = 8;
    s.base.corpus.train_patches = 300;
    s.base.corpus.val_patches = 50;
    s.base.train.epochs = 3;
    s.base.train.schedule = LrSchedule::standard(3);
    const SweepResult r = run_activation_study(s);
    bool quad_finite = false;
    std::string detail;
    for (const RunRow& row : r.rows) {
        if (row.kind == ModelKind::AEQuadraticAct) quad_finite = !row.diverged && std::isfinite(row.final_val_loss);
        detail += row.label + "=" + status_name(classify(row)) + "(" + sci(row.final_val_loss) + ") ";
    }
    return {quad_finite && r.rows.size() == 3, detail};
}

struct Criterion {
    int id;
    const char* name;
    Outcome (*fn)();
};

} // namespace

int main(int argc, char** argv) {
    const Criterion all[] = {
        {1, "parameter counts", parameter_counts},
        {2, "gradient correctness", gradients},
        {3, "reduction equivalence", reduction},
        {4, "XOR realization", xor_neuron},
        {5, "polynomial representation", polynomials},
        {6, "desk-scale denoising", denoising},
        {7, "determinism", determinism},
        {8, "swap-study ordering", swap_study},
        {9, "quadratic-activation study", activation_study},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const Criterion& c : all) {
        if (!wanted.empty() && !wanted.contains(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
                  << " [" << sci(secs) << " s]" << std::endl;
        if (!o.pass) ++failed;
    }
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : std::string("acceptance: all criteria passed"))
              << std::endl;
    return failed ? 1 : 0;
}
