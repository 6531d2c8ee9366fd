#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "volcap/core/types.hpp"
#include "volcap/render/camera.hpp"

namespace volcap {

/// The density of a 3D Gaussian along a ray is a 1D Gaussian: same standard
/// deviation, peak density c_bar at the point of closest approach s_peak.
struct RayGaussian1D {
    double sigma_bar;
    double c_bar;
    double s_peak;
};

/// Default per-ray culling threshold on the 1D peak density.
inline constexpr double kRaycastCull = 1e-8;

/// Operation-count instrumentation for the complexity checks.
struct RaycastStats {
    std::uint64_t gaussians_visited = 0;
    std::uint64_t rays = 0;
};

inline RayGaussian1D project_gaussian(const Vec3& o, const Vec3& n, const Vec3& mean,
                                      double sigma, double density) {
    const Vec3 d = mean - o;
    const double s_peak = d.dot(n);
    const double perp_sq = std::max(0.0, d.squaredNorm() - s_peak * s_peak);
    return RayGaussian1D{sigma, density * std::exp(-perp_sq / (2.0 * sigma * sigma)), s_peak};
}

/// Fraction of light along the ray not absorbed by the model:
/// B = exp(-sqrt(2 pi) sum_q sigma_q c_bar_q), the full-line closed form.
inline double background_visibility(const Vec3& o, const Vec3& n, std::span<const Vec3> means,
                                    std::span<const double> sigmas,
                                    std::span<const double> densities,
                                    double cull = kRaycastCull, RaycastStats* stats = nullptr) {
    double depth_sum = 0.0;
    for (std::size_t q = 0; q < means.size(); ++q) {
        if (stats) ++stats->gaussians_visited;
        const RayGaussian1D rg = project_gaussian(o, n, means[q], sigmas[q], densities[q]);
        if (rg.c_bar < cull) continue;
        depth_sum += rg.sigma_bar * rg.c_bar;
    }
    if (stats) ++stats->rays;
    return std::exp(-kSqrt2Pi * depth_sum);
}

struct PixelVisibility {
    double B = 1.0;
    Vec2 grad = Vec2::Zero();  // dB/d(u,v)
};

/// B and its pixel-space gradient at (u, v). The gradient direction points
/// outward from the model; its magnitude ridges at the model contour.
inline PixelVisibility pixel_visibility(const CameraModel& cam, double u, double v,
                                        std::span<const Vec3> means,
                                        std::span<const double> sigmas,
                                        std::span<const double> densities,
                                        double cull = kRaycastCull) {
    const Ray ray = cam.pixel_ray(u, v);
    const Mat32 dn = cam.pixel_ray_jacobian(u, v);
    double depth_sum = 0.0;
    Vec2 w = Vec2::Zero();
    for (std::size_t q = 0; q < means.size(); ++q) {
        const RayGaussian1D rg = project_gaussian(ray.origin, ray.dir, means[q], sigmas[q],
                                                  densities[q]);
        if (rg.c_bar < cull) continue;
        depth_sum += rg.sigma_bar * rg.c_bar;
        const Vec3 d = means[q] - ray.origin;
        w += (rg.c_bar / rg.sigma_bar) * rg.s_peak * (d.transpose() * dn).transpose();
    }
    PixelVisibility out;
    out.B = std::exp(-kSqrt2Pi * depth_sum);
    out.grad = -out.B * kSqrt2Pi * w;
    return out;
}

inline Vec2 background_visibility_gradient(const CameraModel& cam, double u, double v,
                                           std::span<const Vec3> means,
                                           std::span<const double> sigmas,
                                           std::span<const double> densities,
                                           double cull = kRaycastCull) {
    return pixel_visibility(cam, u, v, means, sigmas, densities, cull).grad;
}

/// Accumulator for derivatives w.r.t. the posed Gaussian parameters.
struct GaussianAdjoints {
    Mat3X mu;      // 3 x Q
    VecX sigma;    // Q
    VecX density;  // Q

    explicit GaussianAdjoints(int q_count)
        : mu(Mat3X::Zero(3, q_count)), sigma(VecX::Zero(q_count)),
          density(VecX::Zero(q_count)) {}
};

/// Accumulates d(weight_B * B + weight_grad . dB/d(u,v)) / d(mu, sigma, c)
/// into adj. This is the per-pixel backward pass shared by the alignment
/// energies.
inline void pixel_visibility_adjoint(const CameraModel& cam, double u, double v,
                                     std::span<const Vec3> means,
                                     std::span<const double> sigmas,
                                     std::span<const double> densities, double weight_B,
                                     const Vec2& weight_grad, GaussianAdjoints& adj,
                                     double cull = kRaycastCull) {
    const Ray ray = cam.pixel_ray(u, v);
    const Mat32 dn = cam.pixel_ray_jacobian(u, v);

    double depth_sum = 0.0;
    Vec2 w = Vec2::Zero();
    for (std::size_t q = 0; q < means.size(); ++q) {
        const RayGaussian1D rg = project_gaussian(ray.origin, ray.dir, means[q], sigmas[q],
                                                  densities[q]);
        if (rg.c_bar < cull) continue;
        depth_sum += rg.sigma_bar * rg.c_bar;
        const Vec3 d = means[q] - ray.origin;
        w += (rg.c_bar / rg.sigma_bar) * rg.s_peak * (d.transpose() * dn).transpose();
    }
    const double B = std::exp(-kSqrt2Pi * depth_sum);
    const Vec2 gradB = -B * kSqrt2Pi * w;

    const double dPhi_dA = -weight_B * B - weight_grad.dot(gradB);
    const Vec2 dPhi_dW = -B * weight_grad;

    for (std::size_t q = 0; q < means.size(); ++q) {
        const RayGaussian1D rg = project_gaussian(ray.origin, ray.dir, means[q], sigmas[q],
                                                  densities[q]);
        if (rg.c_bar < cull) continue;
        const Vec3 d = means[q] - ray.origin;
        const double sigma = rg.sigma_bar, cbar = rg.c_bar, m = rg.s_peak;
        const Vec2 rho = (d.transpose() * dn).transpose();

        double d_cbar = dPhi_dA * kSqrt2Pi * sigma;
        double d_sigma = dPhi_dA * kSqrt2Pi * cbar;
        double d_m = 0.0;
        Vec3 d_mu = Vec3::Zero();
        for (int a = 0; a < 2; ++a) {
            d_cbar += dPhi_dW[a] * kSqrt2Pi * m * rho[a] / sigma;
            d_sigma -= dPhi_dW[a] * kSqrt2Pi * cbar * m * rho[a] / (sigma * sigma);
            d_m += dPhi_dW[a] * kSqrt2Pi * cbar * rho[a] / sigma;
            d_mu += dPhi_dW[a] * kSqrt2Pi * (cbar * m / sigma) * dn.col(a);
        }
        // Chain c_bar and s_peak back to (mu, sigma, c).
        const double perp_sq = std::max(0.0, d.squaredNorm() - m * m);
        d_mu += d_cbar * (-(cbar / (sigma * sigma)) * (d - m * ray.dir));
        d_mu += d_m * ray.dir;
        adj.mu.col(q) += d_mu;
        adj.sigma[q] += d_sigma + d_cbar * cbar * perp_sq / (sigma * sigma * sigma);
        adj.density[q] += (densities[q] > 0.0) ? d_cbar * cbar / densities[q] : 0.0;
    }
}

namespace detail {

struct RayContributor {
    int idx;        // index into the Gaussian arrays
    double m;       // s_peak
    double sigma;
    double cbar;
    double a;       // cbar * sigma * sqrt(pi/2)
    double erf0;    // erf(-m / (sqrt(2) sigma))
    double f0;      // line density at s = 0
};

struct RayNode {
    double s;
    int contributor;    // index into the contributor list; -1 for the fixed origin
    double sigma_mult;  // node position = m + sigma_mult * sigma
};

/// Nodes for the outer-integral quadrature: peaks of every contributing
/// Gaussian plus spread samples, clipped to the forward half-line, with the
/// ray origin prepended and a far endpoint appended.
inline constexpr double kNodeOffsets[] = {-4.0, -3.0, -2.5, -2.0, -1.5, -1.0, -0.75,
                                          -0.5, -0.25, 0.0,  0.25, 0.5,  0.75, 1.0,
                                          1.5,  2.0,  2.5,  3.0,  4.0};

inline std::vector<RayContributor> collect_contributors(const Vec3& o, const Vec3& n,
                                                        std::span<const Vec3> means,
                                                        std::span<const double> sigmas,
                                                        std::span<const double> densities,
                                                        double cull) {
    std::vector<RayContributor> out;
    for (std::size_t q = 0; q < means.size(); ++q) {
        const RayGaussian1D rg = project_gaussian(o, n, means[q], sigmas[q], densities[q]);
        if (rg.c_bar < cull) continue;
        RayContributor c;
        c.idx = static_cast<int>(q);
        c.m = rg.s_peak;
        c.sigma = rg.sigma_bar;
        c.cbar = rg.c_bar;
        c.a = rg.c_bar * rg.sigma_bar * kSqrtPiOver2;
        c.erf0 = std::erf(-c.m / (std::sqrt(2.0) * c.sigma));
        c.f0 = c.cbar * std::exp(-(c.m * c.m) / (2.0 * c.sigma * c.sigma));
        out.push_back(c);
    }
    return out;
}

/// Optical depth of contributor c accumulated over [0, s].
inline double tau_partial(const RayContributor& c, double s) {
    const double z = (s - c.m) / (std::sqrt(2.0) * c.sigma);
    return c.a * (std::erf(z) - c.erf0);
}

/// Line density of contributor c at s.
inline double line_density(const RayContributor& c, double s) {
    const double d = s - c.m;
    return c.cbar * std::exp(-d * d / (2.0 * c.sigma * c.sigma));
}

inline std::vector<RayNode> build_nodes(const std::vector<RayContributor>& contributors) {
    std::vector<RayNode> nodes;
    nodes.push_back({0.0, -1, 0.0});
    double far = 0.0;
    int far_src = -1;
    for (std::size_t i = 0; i < contributors.size(); ++i) {
        const RayContributor& c = contributors[i];
        for (double mult : kNodeOffsets) {
            const double s = c.m + mult * c.sigma;
            if (s > 0.0) nodes.push_back({s, static_cast<int>(i), mult});
        }
        if (c.m + 5.0 * c.sigma > far) {
            far = c.m + 5.0 * c.sigma;
            far_src = static_cast<int>(i);
        }
    }
    if (far > 0.0) nodes.push_back({far, far_src, 5.0});
    std::sort(nodes.begin(), nodes.end(),
              [](const RayNode& a, const RayNode& b) { return a.s < b.s; });
    return nodes;
}

}  // namespace detail

/// Visibility of every model Gaussian along one ray under absorption-only
/// transport. The outer integral runs over the shared node set; the target
/// Gaussian's own absorption is integrated in closed form per segment
/// (exact for a single absorber) while the other Gaussians' absorption is
/// frozen at segment midpoints.
inline VecX gaussian_visibilities(const Vec3& o, const Vec3& n, std::span<const Vec3> means,
                                  std::span<const double> sigmas,
                                  std::span<const double> densities,
                                  double cull = kRaycastCull) {
    VecX out = VecX::Zero(static_cast<Eigen::Index>(means.size()));
    const auto contributors = detail::collect_contributors(o, n, means, sigmas, densities, cull);
    if (contributors.empty()) return out;
    const auto nodes = detail::build_nodes(contributors);
    const std::size_t n_nodes = nodes.size();
    if (n_nodes < 2) return out;

    // tau per contributor at every node and at segment midpoints.
    const std::size_t n_contrib = contributors.size();
    MatX tau_nodes(n_contrib, n_nodes);
    MatX tau_mids(n_contrib, n_nodes - 1);
    for (std::size_t i = 0; i < n_contrib; ++i) {
        for (std::size_t k = 0; k < n_nodes; ++k)
            tau_nodes(i, k) = detail::tau_partial(contributors[i], nodes[k].s);
        for (std::size_t k = 0; k + 1 < n_nodes; ++k)
            tau_mids(i, k) = detail::tau_partial(contributors[i], 0.5 * (nodes[k].s + nodes[k + 1].s));
    }
    VecX tau_mid_total = tau_mids.colwise().sum();
    VecX tau_node_total = tau_nodes.colwise().sum();

    for (std::size_t i = 0; i < n_contrib; ++i) {
        double v = 0.0;
        for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
            const double others = tau_mid_total[k] - tau_mids(i, k);
            const double p_lo = std::exp(-tau_nodes(i, k));
            const double p_hi = std::exp(-tau_nodes(i, k + 1));
            v += std::exp(-others) * (p_lo - p_hi);
        }
        // Tail beyond the far node: the remaining own mass under the other
        // Gaussians' absorption at the far node.
        const double tau_inf =
            contributors[i].a * (1.0 - contributors[i].erf0);
        const double others_far = tau_node_total[n_nodes - 1] - tau_nodes(i, n_nodes - 1);
        v += std::exp(-others_far) *
             (std::exp(-tau_nodes(i, n_nodes - 1)) - std::exp(-tau_inf));
        out[contributors[i].idx] = v;
    }
    return out;
}

inline double gaussian_visibility(const Vec3& o, const Vec3& n, std::span<const Vec3> means,
                                  std::span<const double> sigmas,
                                  std::span<const double> densities, int q,
                                  double cull = kRaycastCull) {
    return gaussian_visibilities(o, n, means, sigmas, densities, cull)[q];
}

/// V_q with adjoint accumulation: adds weight * dV_q/d(mu_i, sigma_i, c_i)
/// for every contributing Gaussian i (occlusion couples them all). The
/// derivative follows the quadrature scheme exactly, including the motion
/// of the nodes with the Gaussian parameters.
inline double gaussian_visibility_grad(const Vec3& o, const Vec3& n, std::span<const Vec3> means,
                                       std::span<const double> sigmas,
                                       std::span<const double> densities, int q, double weight,
                                       GaussianAdjoints& adj, double cull = kRaycastCull) {
    const auto contributors = detail::collect_contributors(o, n, means, sigmas, densities, cull);
    int qi = -1;
    for (std::size_t i = 0; i < contributors.size(); ++i)
        if (contributors[i].idx == q) qi = static_cast<int>(i);
    if (qi < 0) return 0.0;
    const auto nodes = detail::build_nodes(contributors);
    const std::size_t n_nodes = nodes.size();
    const std::size_t n_contrib = contributors.size();

    // Forward tables.
    MatX tau_nodes(n_contrib, n_nodes), tau_mids(n_contrib, n_nodes - 1);
    for (std::size_t i = 0; i < n_contrib; ++i) {
        for (std::size_t k = 0; k < n_nodes; ++k)
            tau_nodes(i, k) = detail::tau_partial(contributors[i], nodes[k].s);
        for (std::size_t k = 0; k + 1 < n_nodes; ++k)
            tau_mids(i, k) =
                detail::tau_partial(contributors[i], 0.5 * (nodes[k].s + nodes[k + 1].s));
    }

    const auto& cq = contributors[qi];
    const double tau_q_inf = cq.a * (1.0 - cq.erf0);

    // Per-contributor scalar adjoints and per-node position adjoints.
    VecX d_cbar = VecX::Zero(n_contrib), d_sigma = VecX::Zero(n_contrib),
         d_m = VecX::Zero(n_contrib);
    VecX d_node = VecX::Zero(n_nodes);

    // Derivative of tau_partial w.r.t. (cbar, sigma, m) of its own
    // contributor, at fixed s.
    auto add_dtau = [&](std::size_t i, double s, double w) {
        const auto& c = contributors[i];
        const double z = (s - c.m) / (std::sqrt(2.0) * c.sigma);
        const double z0 = -c.m / (std::sqrt(2.0) * c.sigma);
        const double g = std::exp(-z * z), g0 = std::exp(-z0 * z0);
        const double erf_diff = std::erf(z) - c.erf0;
        d_cbar[i] += w * c.sigma * kSqrtPiOver2 * erf_diff;
        d_sigma[i] += w * (c.cbar * kSqrtPiOver2 * erf_diff +
                           c.a * (2.0 / std::sqrt(kPi)) * (g * (-z / c.sigma) - g0 * (-z0 / c.sigma)));
        d_m[i] += w * (-(c.cbar * g - c.cbar * g0));
    };

    double value = 0.0;
    for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
        const double mid = 0.5 * (nodes[k].s + nodes[k + 1].s);
        const double others = tau_mids.col(k).sum() - tau_mids(qi, k);
        const double e_k = std::exp(-others);
        const double p_lo = std::exp(-tau_nodes(qi, k));
        const double p_hi = std::exp(-tau_nodes(qi, k + 1));
        const double delta = p_lo - p_hi;
        value += e_k * delta;

        // d/d(others at mid): -e_k * delta; spread over contributors != q.
        const double w_others = -weight * e_k * delta;
        double f_others_mid = 0.0;
        for (std::size_t i = 0; i < n_contrib; ++i) {
            if (static_cast<int>(i) == qi) continue;
            add_dtau(i, mid, w_others);
            f_others_mid += detail::line_density(contributors[i], mid);
        }
        // Node motion through the midpoint.
        d_node[k] += w_others * 0.5 * f_others_mid;
        d_node[k + 1] += w_others * 0.5 * f_others_mid;

        // d/d(tau_q at the endpoints): e_k * (-p_lo * dtau_lo + p_hi * dtau_hi)
        add_dtau(qi, nodes[k].s, -weight * e_k * p_lo);
        add_dtau(qi, nodes[k + 1].s, weight * e_k * p_hi);
        // Node motion through P at the endpoints.
        d_node[k] += -weight * e_k * p_lo * detail::line_density(cq, nodes[k].s);
        d_node[k + 1] += weight * e_k * p_hi * detail::line_density(cq, nodes[k + 1].s);
    }
    // Tail segment [far, infinity).
    {
        const std::size_t last = n_nodes - 1;
        const double others = tau_nodes.col(last).sum() - tau_nodes(qi, last);
        const double e_tail = std::exp(-others);
        const double p_far = std::exp(-tau_nodes(qi, last));
        const double p_inf = std::exp(-tau_q_inf);
        value += e_tail * (p_far - p_inf);

        const double w_others = -weight * e_tail * (p_far - p_inf);
        double f_others_far = 0.0;
        for (std::size_t i = 0; i < n_contrib; ++i) {
            if (static_cast<int>(i) == qi) continue;
            add_dtau(i, nodes[last].s, w_others);
            f_others_far += detail::line_density(contributors[i], nodes[last].s);
        }
        d_node[last] += w_others * f_others_far;
        add_dtau(qi, nodes[last].s, -weight * e_tail * p_far);
        d_node[last] += -weight * e_tail * p_far * detail::line_density(cq, nodes[last].s);
        // d(tau_q_inf)/d(cbar, sigma, m): a * (1 - erf0).
        {
            const double z0 = -cq.m / (std::sqrt(2.0) * cq.sigma);
            const double g0 = std::exp(-z0 * z0);
            const double w_inf = weight * e_tail * p_inf;  // d(-(-p_inf))...
            // value term: e_tail * (-p_inf): d/dtau_inf = e_tail * p_inf.
            d_cbar[qi] += w_inf * cq.sigma * kSqrtPiOver2 * (1.0 - cq.erf0);
            d_sigma[qi] += w_inf * (cq.cbar * kSqrtPiOver2 * (1.0 - cq.erf0) +
                                    cq.a * (2.0 / std::sqrt(kPi)) * (-g0 * (-z0 / cq.sigma)));
            d_m[qi] += w_inf * cq.cbar * g0;
        }
    }

    // Node positions move with their source contributor: s = m + mult * sigma.
    for (std::size_t k = 0; k < n_nodes; ++k) {
        if (nodes[k].contributor < 0) continue;
        d_m[nodes[k].contributor] += d_node[k];
        d_sigma[nodes[k].contributor] += d_node[k] * nodes[k].sigma_mult;
    }

    // Chain (cbar, m) to (mu, sigma, c).
    for (std::size_t i = 0; i < n_contrib; ++i) {
        const auto& c = contributors[i];
        const int idx = c.idx;
        const Vec3 d = means[idx] - o;
        const double perp_sq = std::max(0.0, d.squaredNorm() - c.m * c.m);
        adj.mu.col(idx) += d_m[i] * n + d_cbar[i] * (-(c.cbar / (c.sigma * c.sigma)) * (d - c.m * n));
        adj.sigma[idx] += d_sigma[i] + d_cbar[i] * c.cbar * perp_sq / (c.sigma * c.sigma * c.sigma);
        adj.density[idx] += (densities[idx] > 0.0) ? d_cbar[i] * c.cbar / densities[idx] : 0.0;
    }
    return value;
}

}  // namespace volcap
