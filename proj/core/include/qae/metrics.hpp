#pragma once

#include "qae/tensor.hpp"

#include <span>
#include <string>

namespace qae {

/// Image-quality triple on [0,1]-normalized images. psnr is +infinity for identical images.
struct MetricReport {
    double psnr{0.0};
    double ssim{0.0};
    double rmse{0.0};
};

double rmse(const Tensor& a, const Tensor& b);
/// 20 log10(1 / rmse), peak 1.
double psnr(const Tensor& a, const Tensor& b);

struct SsimOptions {
    std::size_t window{11};
    double sigma{1.5};
    double k1{0.01};
    double k2{0.03};
    double dynamic_range{1.0};
};

/// Mean local SSIM over every fully-contained Gaussian-weighted window (per
/// channel, averaged). Images smaller than the window use the largest odd
/// window that fits.
double ssim(const Tensor& a, const Tensor& b, const SsimOptions& options = {});

MetricReport evaluate(const Tensor& prediction, const Tensor& target);

/// Arithmetic mean of each field. An infinite psnr in any report makes the mean infinite.
MetricReport mean_report(std::span<const MetricReport> reports);

/// "name,psnr,ssim,rmse" row; infinity prints as "inf".
std::string metric_csv_row(const std::string& name, const MetricReport& r);
inline constexpr const char* kMetricCsvHeader = "name,psnr,ssim,rmse";

/// %.8g formatting used for every CSV number; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

} // namespace qae
