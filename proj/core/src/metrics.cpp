#include "qae/metrics.hpp"

#include "qae/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace qae {

double rmse(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "rmse");
    if (a.size() == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

double psnr(const Tensor& a, const Tensor& b) {
    const double e = rmse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(1.0 / e);
}

namespace {

std::vector<double> gaussian_weights(std::size_t n, double sigma) {
    std::vector<double> w(n);
    const double mid = static_cast<double>(n - 1) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i) - mid;
        w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

// Valid-mode separable filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
    const std::size_t n = k.size();
    const std::size_t ow = w - n + 1;
    const std::size_t oh = h - n + 1;
    std::vector<double> rows(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += k[t] * plane[y * w + x + t];
            rows[y * ow + x] = s;
        }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += k[t] * rows[(y + t) * ow + x];
            out[y * ow + x] = s;
        }
    return out;
}

} // namespace

double ssim(const Tensor& a, const Tensor& b, const SsimOptions& options) {
    require_same_shape(a, b, "ssim");
    const std::size_t h = a.height();
    const std::size_t w = a.width();
    if (a.size() == 0) return 1.0;
    std::size_t n = std::min({options.window, h, w});
    if (n % 2 == 0) --n;
    const std::vector<double> k = gaussian_weights(n, options.sigma);
    const double c1 = std::pow(options.k1 * options.dynamic_range, 2);
    const double c2 = std::pow(options.k2 * options.dynamic_range, 2);

    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        std::vector<double> pa(a.channel(c).begin(), a.channel(c).end());
        std::vector<double> pb(b.channel(c).begin(), b.channel(c).end());
        std::vector<double> aa(pa.size()), bb(pa.size()), ab(pa.size());
        for (std::size_t i = 0; i < pa.size(); ++i) {
            aa[i] = pa[i] * pa[i];
            bb[i] = pb[i] * pb[i];
            ab[i] = pa[i] * pb[i];
        }
        const auto mu_a = filter_valid(pa, h, w, k);
        const auto mu_b = filter_valid(pb, h, w, k);
        const auto e_aa = filter_valid(aa, h, w, k);
        const auto e_bb = filter_valid(bb, h, w, k);
        const auto e_ab = filter_valid(ab, h, w, k);
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
            const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
            const double cov = e_ab[i] - mu_a[i] * mu_b[i];
            total += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
                     ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2));
        }
        windows += mu_a.size();
    }
    return total / static_cast<double>(windows);
}

MetricReport evaluate(const Tensor& prediction, const Tensor& target) {
    const double e = rmse(prediction, target);
    return MetricReport{e == 0.0 ? std::numeric_limits<double>::infinity() : 20.0 * std::log10(1.0 / e),
                        ssim(prediction, target), e};
}

MetricReport mean_report(std::span<const MetricReport> reports) {
    MetricReport m{};
    if (reports.empty()) return m;
    for (const MetricReport& r : reports) {
        m.psnr += r.psnr;
        m.ssim += r.ssim;
        m.rmse += r.rmse;
    }
    const double n = static_cast<double>(reports.size());
    return MetricReport{m.psnr / n, m.ssim / n, m.rmse / n};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8g", v);
    return buf;
}

std::string metric_csv_row(const std::string& name, const MetricReport& r) {
    return name + "," + format_number(r.psnr) + "," + format_number(r.ssim) + "," + format_number(r.rmse);
}

} // namespace qae
