#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "volcap/core/image.hpp"
#include "volcap/core/parallel.hpp"
#include "volcap/core/types.hpp"
#include "volcap/render/camera.hpp"
#include "volcap/render/raycast.hpp"

namespace volcap {

/// Precomputed per-pixel ray directions and their (u, v) derivatives for one
/// camera. Pixel (x, y) is sampled at its center (x + 0.5, y + 0.5).
struct RayTable {
    int width = 0, height = 0;
    Vec3 origin = Vec3::Zero();
    std::vector<Vec3> dirs;
    std::vector<Mat32> jacobians;

    static RayTable build(const CameraModel& cam) {
        RayTable t;
        t.width = cam.width();
        t.height = cam.height();
        t.origin = cam.center();
        t.dirs.resize(static_cast<std::size_t>(t.width) * t.height);
        t.jacobians.resize(t.dirs.size());
        for (int y = 0; y < t.height; ++y)
            for (int x = 0; x < t.width; ++x) {
                const double u = x + 0.5, v = y + 0.5;
                t.dirs[static_cast<std::size_t>(y) * t.width + x] = cam.pixel_ray(u, v).dir;
                t.jacobians[static_cast<std::size_t>(y) * t.width + x] =
                    cam.pixel_ray_jacobian(u, v);
            }
        return t;
    }

    const Vec3& dir(int x, int y) const { return dirs[static_cast<std::size_t>(y) * width + x]; }
    const Mat32& jac(int x, int y) const {
        return jacobians[static_cast<std::size_t>(y) * width + x];
    }
};

/// Conservative pixel-space bounds of one Gaussian's footprint (out to
/// n_sigmas standard deviations). Gaussians near or behind the camera cover
/// the whole image.
struct PixelBounds {
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive; empty when x1 < x0
    bool covers_row(int y) const { return y >= y0 && y <= y1; }
};

inline PixelBounds gaussian_pixel_bounds(const CameraModel& cam, const Vec3& mean, double sigma,
                                         double n_sigmas = 6.5) {
    PixelBounds b;
    const double r = n_sigmas * sigma;
    const double dist = (mean - cam.center()).norm();
    const double depth = cam.depth(mean);
    auto whole_image = [&]() {
        b.x0 = 0;
        b.y0 = 0;
        b.x1 = cam.width() - 1;
        b.y1 = cam.height() - 1;
        return b;
    };
    if (depth <= r + 0.05) return whole_image();
    const Vec2 center = cam.project(mean);
    const double f = std::max(cam.intrinsics()(0, 0), cam.intrinsics()(1, 1));
    // Angular radius mapped to pixels, inflated by the off-axis stretch.
    const double off_u = (center.x() - cam.intrinsics()(0, 2)) / cam.intrinsics()(0, 0);
    const double off_v = (center.y() - cam.intrinsics()(1, 2)) / cam.intrinsics()(1, 1);
    const double stretch = 1.0 + off_u * off_u + off_v * off_v;
    const double r_px =
        1.2 * stretch * f * r / std::sqrt(std::max(dist * dist - r * r, 1e-12)) + 3.0;
    b.x0 = std::max(0, static_cast<int>(std::floor(center.x() - r_px)));
    b.x1 = std::min(cam.width() - 1, static_cast<int>(std::ceil(center.x() + r_px)));
    b.y0 = std::max(0, static_cast<int>(std::floor(center.y() - r_px)));
    b.y1 = std::min(cam.height() - 1, static_cast<int>(std::ceil(center.y() + r_px)));
    if (b.x1 < b.x0 || b.y1 < b.y0) b = PixelBounds{};  // fully outside
    return b;
}

/// Accumulated per-pixel projection sums:
///   depth_sum = sum_q sigma_q c_bar_q
///   wu, wv    = sum_q (c_bar_q / sigma_q) s_peak_q (mu_q - o)^T dn
/// from which B = exp(-sqrt(2 pi) depth_sum) and dB/d(u,v) = -B sqrt(2 pi) (wu, wv).
struct ProjectionImages {
    MatX depth_sum, wu, wv;
};

inline ProjectionImages accumulate_projection(const CameraModel& cam, const RayTable& rays,
                                              std::span<const Vec3> means,
                                              std::span<const double> sigmas,
                                              std::span<const double> densities, int threads,
                                              double cull = kRaycastCull) {
    ProjectionImages img;
    img.depth_sum = MatX::Zero(rays.height, rays.width);
    img.wu = MatX::Zero(rays.height, rays.width);
    img.wv = MatX::Zero(rays.height, rays.width);

    std::vector<PixelBounds> bounds(means.size());
    for (std::size_t q = 0; q < means.size(); ++q)
        bounds[q] = gaussian_pixel_bounds(cam, means[q], sigmas[q]);

    parallel_for(0, rays.height, threads, [&](int y) {
        for (std::size_t q = 0; q < means.size(); ++q) {
            if (!bounds[q].covers_row(y)) continue;
            const Vec3 d_o = means[q] - rays.origin;
            for (int x = bounds[q].x0; x <= bounds[q].x1; ++x) {
                const Vec3& n = rays.dir(x, y);
                const double m = d_o.dot(n);
                const double perp_sq = std::max(0.0, d_o.squaredNorm() - m * m);
                const double cbar =
                    densities[q] * std::exp(-perp_sq / (2.0 * sigmas[q] * sigmas[q]));
                if (cbar < cull) continue;
                img.depth_sum(y, x) += sigmas[q] * cbar;
                const Mat32& dn = rays.jac(x, y);
                const double scale = (cbar / sigmas[q]) * m;
                img.wu(y, x) += scale * d_o.dot(dn.col(0));
                img.wv(y, x) += scale * d_o.dot(dn.col(1));
            }
        }
    });
    return img;
}

/// Background visibility image, optionally with its pixel-space gradient.
struct VisibilityImage {
    MatX B;
    MatX gx, gy;  // dB/du, dB/dv; empty unless requested

    int width() const { return static_cast<int>(B.cols()); }
    int height() const { return static_cast<int>(B.rows()); }
};

inline VisibilityImage render_visibility(const CameraModel& cam, std::span<const Vec3> means,
                                         std::span<const double> sigmas,
                                         std::span<const double> densities, bool with_gradient,
                                         int threads = 1, double cull = kRaycastCull) {
    const RayTable rays = RayTable::build(cam);
    const ProjectionImages proj =
        accumulate_projection(cam, rays, means, sigmas, densities, threads, cull);
    VisibilityImage out;
    out.B = (-kSqrt2Pi * proj.depth_sum).array().exp();
    if (with_gradient) {
        out.gx = -kSqrt2Pi * out.B.cwiseProduct(proj.wu);
        out.gy = -kSqrt2Pi * out.B.cwiseProduct(proj.wv);
    }
    return out;
}

/// Binary silhouette: pixel on iff 1 - B >= tau.
inline Mask render_silhouette(const CameraModel& cam, std::span<const Vec3> means,
                              std::span<const double> sigmas, std::span<const double> densities,
                              double tau = 0.5, int threads = 1) {
    if (!(tau > 0.0 && tau < 1.0))
        throw InvalidArgumentError("render_silhouette: tau must be in (0,1)");
    const VisibilityImage vis = render_visibility(cam, means, sigmas, densities, false, threads);
    Mask mask(cam.width(), cam.height());
    for (int y = 0; y < cam.height(); ++y)
        for (int x = 0; x < cam.width(); ++x) mask.set(x, y, 1.0 - vis.B(y, x) >= tau);
    return mask;
}

/// Color render used by the synthetic harness: per-Gaussian visibility
/// weighted colors over a background color.
inline Image render_color(const CameraModel& cam, std::span<const Vec3> means,
                          std::span<const double> sigmas, std::span<const double> densities,
                          std::span<const Vec3> colors, const Vec3& background, int threads = 1,
                          double cull = kRaycastCull) {
    const RayTable rays = RayTable::build(cam);
    Image img(cam.width(), cam.height(), 3);
    parallel_for(0, cam.height(), threads, [&](int y) {
        for (int x = 0; x < cam.width(); ++x) {
            const Vec3& n = rays.dir(x, y);
            const VecX vis = gaussian_visibilities(rays.origin, n, means, sigmas, densities, cull);
            const double b =
                background_visibility(rays.origin, n, means, sigmas, densities, cull);
            Vec3 c = b * background;
            for (std::size_t q = 0; q < means.size(); ++q) c += vis[q] * colors[q];
            for (int ch = 0; ch < 3; ++ch)
                img.at(x, y, ch) = static_cast<float>(std::clamp(c[ch], 0.0, 1.0));
        }
    });
    return img;
}

}  // namespace volcap
