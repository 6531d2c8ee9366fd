#pragma once

#include <optional>
#include <string>
#include <vector>

#include "volcap/core/parallel.hpp"
#include "volcap/core/types.hpp"
#include "volcap/energy/config.hpp"
#include "volcap/energy/heatmap.hpp"
#include "volcap/energy/image_gradient.hpp"
#include "volcap/energy/model_state.hpp"
#include "volcap/energy/terms.hpp"
#include "volcap/render/render.hpp"

namespace volcap {

enum class Stage { kDetection = 1, kContour = 2 };

struct EnergyBreakdown {
    double data = 0.0;
    double smooth = 0.0;
    double pose = 0.0;
    double shape = 0.0;
    double total() const { return data + smooth + pose + shape; }
};

/// Contour data term for one camera/frame: per-pixel similarity of the
/// model contour field dB/d(u,v) against the image gradient target, plus the
/// flat-region penalty. Per-Gaussian adjoints are accumulated when adj is
/// given. Deterministic for any thread count (row-ordered reduction).
inline double contour_term(const CameraModel& cam, const RayTable& rays,
                           const GradientImage& target, std::span<const Vec3> means,
                           std::span<const double> sigmas, std::span<const double> densities,
                           const EnergyConfig& cfg, int threads,
                           GaussianAdjoints* adj = nullptr) {
    if (target.width() != rays.width || target.height() != rays.height)
        throw InvalidArgumentError("contour_term: target size does not match the camera");
    const int w = rays.width, h = rays.height;
    const ProjectionImages proj =
        accumulate_projection(cam, rays, means, sigmas, densities, threads, cfg.cull);

    MatX wgx, wgy;
    if (adj) {
        wgx = MatX::Zero(h, w);
        wgy = MatX::Zero(h, w);
    }
    VecX row_energy = VecX::Zero(h);
    parallel_for(0, h, threads, [&](int y) {
        double e_row = 0.0;
        for (int x = 0; x < w; ++x) {
            const double b = std::exp(-kSqrt2Pi * proj.depth_sum(y, x));
            const Vec2 g_model(-b * kSqrt2Pi * proj.wu(y, x), -b * kSqrt2Pi * proj.wv(y, x));
            const Vec2 g_image = target.at(x, y);
            Vec2 d_sim, d_flat;
            e_row += e_sim(g_model, g_image, adj ? &d_sim : nullptr);
            e_row += e_flat(g_model, g_image, cfg.delta_low, adj ? &d_flat : nullptr);
            if (adj) {
                wgx(y, x) = d_sim[0] + d_flat[0];
                wgy(y, x) = d_sim[1] + d_flat[1];
            }
        }
        row_energy[y] = e_row;
    });
    const double energy = row_energy.sum();
    if (!adj) return energy;

    // Backward pass: same footprints, per-row scratch reduced in row order.
    const int q_count = static_cast<int>(means.size());
    std::vector<PixelBounds> bounds(means.size());
    for (std::size_t q = 0; q < means.size(); ++q)
        bounds[q] = gaussian_pixel_bounds(cam, means[q], sigmas[q]);
    MatX scratch = MatX::Zero(h, 5 * q_count);
    parallel_for(0, h, threads, [&](int y) {
        for (int q = 0; q < q_count; ++q) {
            if (!bounds[q].covers_row(y)) continue;
            const Vec3 d_o = means[q] - rays.origin;
            const double sigma = sigmas[q];
            for (int x = bounds[q].x0; x <= bounds[q].x1; ++x) {
                const Vec3& n = rays.dir(x, y);
                const double m = d_o.dot(n);
                const double perp_sq = std::max(0.0, d_o.squaredNorm() - m * m);
                const double cbar = densities[q] * std::exp(-perp_sq / (2.0 * sigma * sigma));
                if (cbar < cfg.cull) continue;
                const double b = std::exp(-kSqrt2Pi * proj.depth_sum(y, x));
                const Vec2 g_model(-b * kSqrt2Pi * proj.wu(y, x),
                                   -b * kSqrt2Pi * proj.wv(y, x));
                const Vec2 wg(wgx(y, x), wgy(y, x));
                const Mat32& dn = rays.jac(x, y);
                const Vec2 rho(d_o.dot(dn.col(0)), d_o.dot(dn.col(1)));

                const double d_phi_dA = -wg.dot(g_model);
                const Vec2 d_phi_dW = -b * wg;

                double d_cbar = d_phi_dA * kSqrt2Pi * sigma;
                double d_sigma = d_phi_dA * kSqrt2Pi * cbar;
                double d_m = 0.0;
                Vec3 d_mu = Vec3::Zero();
                for (int a = 0; a < 2; ++a) {
                    d_cbar += d_phi_dW[a] * kSqrt2Pi * m * rho[a] / sigma;
                    d_sigma -= d_phi_dW[a] * kSqrt2Pi * cbar * m * rho[a] / (sigma * sigma);
                    d_m += d_phi_dW[a] * kSqrt2Pi * cbar * rho[a] / sigma;
                    d_mu += d_phi_dW[a] * kSqrt2Pi * (cbar * m / sigma) * dn.col(a);
                }
                d_mu += d_cbar * (-(cbar / (sigma * sigma)) * (d_o - m * n)) + d_m * n;
                scratch(y, 5 * q + 0) += d_mu[0];
                scratch(y, 5 * q + 1) += d_mu[1];
                scratch(y, 5 * q + 2) += d_mu[2];
                scratch(y, 5 * q + 3) +=
                    d_sigma + d_cbar * cbar * perp_sq / (sigma * sigma * sigma);
                scratch(y, 5 * q + 4) += (densities[q] > 0.0) ? d_cbar * cbar / densities[q] : 0.0;
            }
        }
    });
    for (int y = 0; y < h; ++y)
        for (int q = 0; q < q_count; ++q) {
            adj->mu(0, q) += scratch(y, 5 * q + 0);
            adj->mu(1, q) += scratch(y, 5 * q + 1);
            adj->mu(2, q) += scratch(y, 5 * q + 2);
            adj->sigma[q] += scratch(y, 5 * q + 3);
            adj->density[q] += scratch(y, 5 * q + 4);
        }
    return energy;
}

/// Detection data term for one camera/frame: negated overlap of each
/// joint's heat map with that joint probe's visibility. Joints whose heat
/// map is absent (empty image) are skipped with a warning.
inline double detection_term(const CameraModel& cam, const HeatMapSet& maps, int camera,
                             int frame, std::span<const Vec3> means,
                             std::span<const double> sigmas, std::span<const double> densities,
                             const EnergyConfig& cfg, int threads,
                             GaussianAdjoints* adj = nullptr,
                             std::vector<std::string>* warnings = nullptr) {
    const int joints = maps.joints();
    if (static_cast<int>(means.size()) != joints)
        throw InvalidArgumentError("detection_term: probe count != heat map joint count");

    VecX joint_energy = VecX::Zero(joints);
    std::vector<GaussianAdjoints> joint_adj;
    if (adj) joint_adj.assign(joints, GaussianAdjoints(joints));

    parallel_for(0, joints, threads, [&](int j) {
        const Image& map = maps.at(camera, frame, j);
        if (map.empty()) {
            if (warnings)
                warnings->push_back("detection_term: missing heat map for joint " +
                                    std::to_string(j) + "; skipped");
            return;
        }
        double e = 0.0;
        for (int y = 0; y < map.height(); ++y)
            for (int x = 0; x < map.width(); ++x) {
                const double d = map.at(x, y);
                if (d < cfg.heatmap_support_min) continue;
                const double u = (x + 0.5) * maps.scale();
                const double v = (y + 0.5) * maps.scale();
                const Ray ray = cam.pixel_ray(u, v);
                if (adj) {
                    e -= d * gaussian_visibility_grad(ray.origin, ray.dir, means, sigmas,
                                                      densities, j, -d, joint_adj[j], cfg.cull);
                } else {
                    e -= d * gaussian_visibility(ray.origin, ray.dir, means, sigmas, densities,
                                                 j, cfg.cull);
                }
            }
        joint_energy[j] = e;
    });
    if (adj)
        for (int j = 0; j < joints; ++j) {
            adj->mu += joint_adj[j].mu;
            adj->sigma += joint_adj[j].sigma;
            adj->density += joint_adj[j].density;
        }
    return joint_energy.sum();
}

/// The combined space-time objective over all frames and cameras with the
/// stage-dependent data term. Parameter layout: T pose blocks then the
/// shape coefficients.
class SpaceTimeProblem {
public:
    ShapeSpace space;          // may be empty (gaussian_count 0) for fixed actors
    ActorModel template_model; // provides skeleton topology and bone ids
    std::vector<CameraModel> cameras;
    Stage stage = Stage::kContour;
    EnergyConfig config;
    int threads = 1;

    std::vector<std::vector<GradientImage>> contour_targets;  // [camera][frame]
    HeatMapSet heatmaps;                                      // stage I

    int frames = 0;

    void prepare() {
        config.validate();
        ray_tables_.clear();
        for (const CameraModel& cam : cameras) ray_tables_.push_back(RayTable::build(cam));
    }

    bool has_space() const { return space.gaussian_count > 0; }
    int pose_dim() const { return template_model.skeleton.pose_dim(); }
    int shape_dim() const { return has_space() ? space.dim : 0; }
    int param_count() const { return frames * pose_dim() + shape_dim(); }

    MatX poses_of(const VecX& x) const {
        MatX poses(pose_dim(), frames);
        for (int t = 0; t < frames; ++t) poses.col(t) = x.segment(t * pose_dim(), pose_dim());
        return poses;
    }
    VecX shape_of(const VecX& x) const { return x.tail(shape_dim()); }

    VecX pack(const MatX& poses, const VecX& s) const {
        VecX x(param_count());
        for (int t = 0; t < frames; ++t) x.segment(t * pose_dim(), pose_dim()) = poses.col(t);
        x.tail(shape_dim()) = s;
        return x;
    }

    double evaluate(const VecX& x, VecX* grad, EnergyBreakdown* breakdown = nullptr,
                    std::vector<std::string>* warnings = nullptr) const {
        if (x.size() != param_count())
            throw InvalidArgumentError("SpaceTimeProblem: parameter vector size mismatch");
        if (grad) grad->setZero(param_count());

        const MatX poses = poses_of(x);
        const VecX s = shape_of(x);

        ShapedModel body = has_space() ? shape_model(space, template_model, s, warnings)
                                       : fixed_model(template_model);
        const ShapedModel* model = &body;
        std::optional<ShapedModel> probes;
        if (stage == Stage::kDetection) {
            probes = joint_probe_model(body, config.joint_gaussian_sigma,
                                       config.joint_gaussian_density);
            model = &*probes;
        }

        EnergyBreakdown bd;
        VecX gs;  // shape gradient accumulator
        if (grad && shape_dim() > 0) gs = VecX::Zero(shape_dim());

        if (shape_dim() > 0) {
            VecX g_shape_prior;
            bd.shape = config.w_shape *
                       shape_prior(s, space.coeff_bounds, grad ? &g_shape_prior : nullptr);
            if (grad) gs += config.w_shape * g_shape_prior;
        }
        {
            MatX g_smooth;
            if (grad) g_smooth.setZero(pose_dim(), frames);
            bd.smooth = config.w_smooth * smooth_prior(poses, grad ? &g_smooth : nullptr);
            if (grad)
                for (int t = 0; t < frames; ++t)
                    grad->segment(t * pose_dim(), pose_dim()) += config.w_smooth * g_smooth.col(t);
        }

        for (int t = 0; t < frames; ++t) {
            {
                VecX g_pose;
                bd.pose += config.w_pose * pose_prior(model->actor.skeleton, poses.col(t),
                                                      grad ? &g_pose : nullptr);
                if (grad) grad->segment(t * pose_dim(), pose_dim()) += config.w_pose * g_pose;
            }
            const PosedModelCache cache =
                pose_model(*model, PoseVector(poses.col(t)), grad != nullptr);
            const int q_count = static_cast<int>(model->actor.gaussians.size());
            for (std::size_t c = 0; c < cameras.size(); ++c) {
                GaussianAdjoints adj(q_count);
                double term = 0.0;
                if (stage == Stage::kContour) {
                    term = contour_term(cameras[c], ray_tables_[c], contour_targets[c][t],
                                        cache.gauss.means_world, cache.gauss.std_devs,
                                        cache.gauss.densities, config, threads,
                                        grad ? &adj : nullptr);
                } else {
                    term = detection_term(cameras[c], heatmaps, static_cast<int>(c), t,
                                          cache.gauss.means_world, cache.gauss.std_devs,
                                          cache.gauss.densities, config, threads,
                                          grad ? &adj : nullptr, warnings);
                }
                bd.data += config.w_data * term;
                if (grad) {
                    VecX g_pose_t = VecX::Zero(pose_dim());
                    apply_gaussian_adjoints(*model, cache, adj, config.w_data, &g_pose_t,
                                            shape_dim() > 0 ? &gs : nullptr);
                    grad->segment(t * pose_dim(), pose_dim()) += g_pose_t;
                }
            }
        }
        if (grad && shape_dim() > 0) grad->tail(shape_dim()) += gs;
        if (breakdown) *breakdown = bd;
        return bd.total();
    }

private:
    std::vector<RayTable> ray_tables_;
};

}  // namespace volcap
