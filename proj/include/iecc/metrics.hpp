#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "iecc/errors.hpp"
#include "iecc/raster.hpp"

namespace iecc {

struct MetricsReport {
    double mse = 0.0;
    double rmse = 0.0;
    double psnr = 0.0; // dB, +inf when mse == 0
    double ssim = 0.0;
    std::optional<double> ratio_eq1;
    std::optional<double> ratio_on_disk;
};

// Mean of squared sample differences, all channels pooled.
inline double mse(const RasterImage& original, const RasterImage& reconstructed) {
    require_valid(original, "mse");
    require_same_shape(original, reconstructed, "mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < original.samples.size(); ++i) {
        const double d = double(original.samples[i]) - double(reconstructed.samples[i]);
        sum += d * d;
    }
    return sum / double(original.samples.size());
}

inline double rmse(const RasterImage& original, const RasterImage& reconstructed) {
    return std::sqrt(mse(original, reconstructed));
}

// 10 log10(255^2 / MSE); +inf for identical images.
inline double psnr(const RasterImage& original, const RasterImage& reconstructed) {
    const double e = mse(original, reconstructed);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / e);
}

namespace detail {

constexpr int ssim_window = 11;
constexpr double ssim_sigma = 1.5;
constexpr double ssim_c1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double ssim_c2 = (0.03 * 255.0) * (0.03 * 255.0);

inline std::vector<double> ssim_kernel() {
    std::vector<double> k(ssim_window);
    double sum = 0.0;
    for (int i = 0; i < ssim_window; ++i) {
        const double x = i - (ssim_window - 1) / 2.0;
        k[std::size_t(i)] = std::exp(-x * x / (2.0 * ssim_sigma * ssim_sigma));
        sum += k[std::size_t(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Valid-mode separable convolution: output is (w-10) x (h-10).
inline std::vector<double> gaussian_filter(const std::vector<double>& plane, std::size_t w,
                                           std::size_t h, const std::vector<double>& kernel) {
    const std::size_t ow = w - ssim_window + 1;
    const std::size_t oh = h - ssim_window + 1;
    std::vector<double> tmp(ow * h);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int t = 0; t < ssim_window; ++t)
                s += kernel[std::size_t(t)] * plane[r * w + c + std::size_t(t)];
            tmp[r * ow + c] = s;
        }
    std::vector<double> out(ow * oh);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int t = 0; t < ssim_window; ++t)
                s += kernel[std::size_t(t)] * tmp[(r + std::size_t(t)) * ow + c];
            out[r * ow + c] = s;
        }
    return out;
}

inline double ssim_formula(double mu_x, double mu_y, double var_x, double var_y, double cov) {
    return ((2.0 * mu_x * mu_y + ssim_c1) * (2.0 * cov + ssim_c2)) /
           ((mu_x * mu_x + mu_y * mu_y + ssim_c1) * (var_x + var_y + ssim_c2));
}

inline double ssim_channel(const std::vector<double>& x, const std::vector<double>& y,
                           std::size_t w, std::size_t h) {
    if (w < ssim_window || h < ssim_window) {
        // Single global window for small images.
        const double n = double(x.size());
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += x[i];
            sy += y[i];
        }
        const double mx = sx / n, my = sy / n;
        double vx = 0.0, vy = 0.0, cov = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            vx += (x[i] - mx) * (x[i] - mx);
            vy += (y[i] - my) * (y[i] - my);
            cov += (x[i] - mx) * (y[i] - my);
        }
        return ssim_formula(mx, my, vx / n, vy / n, cov / n);
    }
    const std::vector<double> kernel = ssim_kernel();
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const std::vector<double> mu_x = gaussian_filter(x, w, h, kernel);
    const std::vector<double> mu_y = gaussian_filter(y, w, h, kernel);
    const std::vector<double> e_xx = gaussian_filter(xx, w, h, kernel);
    const std::vector<double> e_yy = gaussian_filter(yy, w, h, kernel);
    const std::vector<double> e_xy = gaussian_filter(xy, w, h, kernel);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double var_x = e_xx[i] - mu_x[i] * mu_x[i];
        const double var_y = e_yy[i] - mu_y[i] * mu_y[i];
        const double cov = e_xy[i] - mu_x[i] * mu_y[i];
        sum += ssim_formula(mu_x[i], mu_y[i], var_x, var_y, cov);
    }
    return sum / double(mu_x.size());
}

} // namespace detail

// Mean local SSIM over 11x11 Gaussian-weighted windows (sigma 1.5), with a
// global-window fallback below 11 pixels a side. RGB averages channel SSIMs.
inline double ssim(const RasterImage& original, const RasterImage& reconstructed) {
    require_valid(original, "ssim");
    require_same_shape(original, reconstructed, "ssim");
    const std::size_t n = original.pixel_count();
    double total = 0.0;
    std::vector<double> x(n), y(n);
    for (int c = 0; c < original.channels; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = original.samples[i * original.channels + c];
            y[i] = reconstructed.samples[i * original.channels + c];
        }
        total += detail::ssim_channel(x, y, original.width, original.height);
    }
    return total / original.channels;
}

inline MetricsReport metrics_report(const RasterImage& original, const RasterImage& reconstructed) {
    MetricsReport r;
    r.mse = mse(original, reconstructed);
    r.rmse = std::sqrt(r.mse);
    r.psnr = psnr(original, reconstructed);
    r.ssim = ssim(original, reconstructed);
    return r;
}

} // namespace iecc
