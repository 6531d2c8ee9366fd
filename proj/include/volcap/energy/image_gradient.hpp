#pragma once

#include <cmath>
#include <vector>

#include "volcap/core/image.hpp"
#include "volcap/core/types.hpp"
#include "volcap/energy/config.hpp"

namespace volcap {

/// Per-pixel 2D image gradient field, channel-summed and magnitude-clamped.
struct GradientImage {
    MatX gx, gy;  // height x width

    int width() const { return static_cast<int>(gx.cols()); }
    int height() const { return static_cast<int>(gx.rows()); }

    Vec2 at(int x, int y) const { return Vec2(gx(y, x), gy(y, x)); }
};

namespace detail {

// reflect-101 index: ..., 2, 1, 0, 1, 2, ...
inline int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

inline MatX separable_blur(const MatX& in, const std::vector<double>& kernel) {
    const int h = static_cast<int>(in.rows()), w = static_cast<int>(in.cols());
    const int radius = static_cast<int>(kernel.size() / 2);
    MatX tmp(h, w), out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * in(y, reflect(x + k, w));
            tmp(y, x) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * tmp(reflect(y + k, h), x);
            out(y, x) = acc;
        }
    return out;
}

}  // namespace detail

/// Sobel gradients (normalized to intensity-per-pixel units), smoothed with
/// a Gaussian, summed over channels and clamped to delta_high preserving
/// direction.
inline GradientImage image_gradients(const Image& image, const EnergyConfig& cfg = {}) {
    if (image.empty()) throw InvalidArgumentError("image_gradients: empty image");
    const int w = image.width(), h = image.height();
    MatX gx = MatX::Zero(h, w), gy = MatX::Zero(h, w);

    for (int c = 0; c < image.channels(); ++c) {
        MatX sx(h, w), sy(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                auto px = [&](int xx, int yy) {
                    return static_cast<double>(
                        image.at(detail::reflect(xx, w), detail::reflect(yy, h), c));
                };
                sx(y, x) = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1) -
                            px(x - 1, y - 1) - 2.0 * px(x - 1, y) - px(x - 1, y + 1)) /
                           8.0;
                sy(y, x) = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1) -
                            px(x - 1, y - 1) - 2.0 * px(x, y - 1) - px(x + 1, y - 1)) /
                           8.0;
            }
        const auto kernel = detail::gaussian_kernel(cfg.sobel_sigma);
        gx += detail::separable_blur(sx, kernel);
        gy += detail::separable_blur(sy, kernel);
    }

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double mag = std::hypot(gx(y, x), gy(y, x));
            if (mag > cfg.delta_high) {
                const double scale = cfg.delta_high / mag;
                gx(y, x) *= scale;
                gy(y, x) *= scale;
            }
        }
    GradientImage out;
    out.gx = std::move(gx);
    out.gy = std::move(gy);
    return out;
}

/// Clamps an arbitrary gradient field the same way real image gradients are
/// clamped (used for synthetic contour targets).
inline void clamp_gradient_image(GradientImage& g, double delta_high) {
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) {
            const double mag = std::hypot(g.gx(y, x), g.gy(y, x));
            if (mag > delta_high) {
                const double s = delta_high / mag;
                g.gx(y, x) *= s;
                g.gy(y, x) *= s;
            }
        }
}

}  // namespace volcap
