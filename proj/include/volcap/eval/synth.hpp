#pragma once

#include <vector>

#include "volcap/core/rng.hpp"
#include "volcap/energy/energy.hpp"
#include "volcap/energy/heatmap.hpp"
#include "volcap/energy/image_gradient.hpp"
#include "volcap/energy/model_state.hpp"
#include "volcap/render/render.hpp"
#include "volcap/shape/model_builder.hpp"
#include "volcap/shape/procedural.hpp"

namespace volcap {

/// Knobs of the synthetic harness. Everything derives deterministically
/// from the seed.
struct ScenarioOptions {
    std::uint64_t seed = 1;
    int cameras = 3;
    int width = 160, height = 120;
    int frames = 10;
    double camera_distance = 3.6;
    double focal_factor = 0.85;  // focal length = factor * width

    int database_size = 24;
    int shape_dim = 6;         // the procedural generator has six shape dofs
    double shape_scale = 0.6;  // ground-truth |s*| <= scale * bound

    double motion_amplitude = 0.35;  // radians
    double root_sway = 0.08;         // meters

    double heat_blur_px = 8.0;    // bump sigma in image pixels
    double heat_jitter_px = 0.0;  // center jitter sigma
    int heat_distractors = 0;     // extra modes per map
    double heatmap_scale = 4.0;   // grid downsample factor

    // Real edges (clothing, shading) saturate the gradient clamp; the
    // raw visibility gradient is scaled up so target contours do too.
    double target_gain = 3.5;

    bool textured_background = false;
};

/// Ground-truth scene: shape space, true parameters, cameras, and the
/// rendered fitting targets. Regenerating with the same options is
/// bit-identical.
struct SyntheticScene {
    ScenarioOptions options;
    ActorModel template_model;
    TriMesh reference_mesh;
    ShapeSpace space;
    VecX gt_shape;
    MatX gt_poses;  // pose_dim x frames
    std::vector<CameraModel> cameras;
    ShapedModel gt_model;
    std::vector<std::vector<GradientImage>> contour_targets;  // [camera][frame]
    std::vector<std::vector<Mask>> gt_masks;                  // [camera][frame]
    std::vector<std::vector<Vec3>> gt_joints;                 // [frame][joint]
};

namespace detail {

inline MatX smooth_motion(const Skeleton& skel, int frames, double amplitude, double root_sway,
                          Rng& rng) {
    const int dim = skel.pose_dim();
    MatX poses = MatX::Zero(dim, frames);
    // Per-dof sinusoids inside the anatomical limits.
    struct Curve {
        double amp, phase, freq, center;
    };
    std::vector<Curve> curves(dim);
    for (int j = 0; j < skel.joint_count(); ++j)
        for (std::size_t k = 0; k < skel.joint(j).dofs.size(); ++k) {
            const int idx = skel.dof_param_index(j, static_cast<int>(k));
            const JointDof& d = skel.joint(j).dofs[k];
            const double half_range = 0.5 * (d.max_angle - d.min_angle);
            const double mid = 0.5 * (d.max_angle + d.min_angle);
            const double amp = std::min(amplitude * rng.uniform(0.3, 1.0), 0.8 * half_range);
            // Keep the mean pose near T-pose when the limits allow it.
            const double center = std::clamp(0.0, mid - (half_range - amp), mid + (half_range - amp));
            curves[idx] = {amp, rng.uniform(0, 2 * kPi), rng.uniform(0.5, 1.5), center};
        }
    for (int k = 0; k < 3; ++k)
        curves[k] = {root_sway * rng.uniform(0.3, 1.0), rng.uniform(0, 2 * kPi),
                     rng.uniform(0.5, 1.5), 0.0};
    for (int k = 3; k < 6; ++k)
        curves[k] = {0.3 * amplitude * rng.uniform(0.2, 1.0), rng.uniform(0, 2 * kPi),
                     rng.uniform(0.5, 1.5), 0.0};
    for (int t = 0; t < frames; ++t) {
        const double phase = frames > 1 ? static_cast<double>(t) / (frames - 1) : 0.0;
        for (int k = 0; k < dim; ++k)
            poses(k, t) = curves[k].center +
                          curves[k].amp * std::sin(2 * kPi * curves[k].freq * phase +
                                                   curves[k].phase);
    }
    return poses;
}

inline double background_texture(int x, int y) {
    return 0.5 + 0.22 * std::sin(0.13 * x + 1.7 * std::sin(0.071 * y)) +
           0.22 * std::sin(0.094 * y + 2.3 * std::sin(0.053 * x));
}

}  // namespace detail

inline std::vector<CameraModel> make_camera_ring(int count, double distance, double focal_px,
                                                 int width, int height, const Vec3& target) {
    std::vector<CameraModel> cams;
    for (int c = 0; c < count; ++c) {
        const double angle = 2.0 * kPi * c / count + 0.35;
        const Vec3 eye = target + Vec3(distance * std::sin(angle), 0.55 * ((c % 3) - 1),
                                       distance * std::cos(angle));
        cams.push_back(CameraModel::look_at(eye, target, focal_px, width, height,
                                            "cam" + std::to_string(c)));
    }
    return cams;
}

/// Builds the procedural mesh database, registers it into a shape space,
/// draws ground-truth shape and motion, and renders the contour targets and
/// silhouette masks.
inline SyntheticScene make_synthetic_scene(const ScenarioOptions& opt) {
    SyntheticScene scene;
    scene.options = opt;
    Rng rng(opt.seed);

    scene.template_model = make_template_model();
    scene.reference_mesh = make_body_mesh();
    std::vector<TriMesh> instances;
    instances.reserve(opt.database_size);
    for (int i = 0; i < opt.database_size; ++i)
        instances.push_back(make_body_mesh(BodyParams::sample(rng)));
    scene.space = build_shape_space_from_meshes(scene.template_model, scene.reference_mesh,
                                                instances, opt.shape_dim);

    scene.gt_shape = VecX::Zero(scene.space.dim);
    for (int k = 0; k < scene.space.dim; ++k)
        scene.gt_shape[k] = rng.uniform(-opt.shape_scale, opt.shape_scale) *
                            scene.space.coeff_bounds[k];
    scene.gt_model = shape_model(scene.space, scene.template_model, scene.gt_shape);

    scene.gt_poses = detail::smooth_motion(scene.gt_model.actor.skeleton, opt.frames,
                                           opt.motion_amplitude, opt.root_sway, rng);

    const Vec3 volume_center(0.0, scene.gt_model.actor.skeleton.root_offset().y(), 0.0);
    scene.cameras = make_camera_ring(opt.cameras, opt.camera_distance,
                                     opt.focal_factor * opt.width, opt.width, opt.height,
                                     volume_center);

    EnergyConfig cfg;
    scene.contour_targets.resize(opt.cameras);
    scene.gt_masks.resize(opt.cameras);
    scene.gt_joints.resize(opt.frames);
    for (int t = 0; t < opt.frames; ++t) {
        const PosedModelCache cache =
            pose_model(scene.gt_model, PoseVector(scene.gt_poses.col(t)), false);
        
        scene.gt_joints[t].resize(scene.gt_model.actor.skeleton.joint_count());
        for (int j = 0; j < scene.gt_model.actor.skeleton.joint_count(); ++j)
            scene.gt_joints[t][j] = cache.kin.bones[j].origin;
        for (int c = 0; c < opt.cameras; ++c) {
            const VisibilityImage vis =
                render_visibility(scene.cameras[c], cache.gauss.means_world,
                                  cache.gauss.std_devs, cache.gauss.densities, true);
            GradientImage target;
            target.gx = opt.target_gain * vis.gx;
            target.gy = opt.target_gain * vis.gy;
            if (opt.textured_background) {
                for (int y = 0; y < opt.height; ++y)
                    for (int x = 0; x < opt.width; ++x) {
                        // Sobel response of the procedural backdrop, faded
                        // out where the model occludes it.
                        const double gx_bg = 0.5 * (detail::background_texture(x + 1, y) -
                                                    detail::background_texture(x - 1, y));
                        const double gy_bg = 0.5 * (detail::background_texture(x, y + 1) -
                                                    detail::background_texture(x, y - 1));
                        target.gx(y, x) += vis.B(y, x) * gx_bg;
                        target.gy(y, x) += vis.B(y, x) * gy_bg;
                    }
            }
            clamp_gradient_image(target, cfg.delta_high);
            scene.contour_targets[c].resize(opt.frames);
            scene.contour_targets[c][t] = std::move(target);
            scene.gt_masks[c].resize(opt.frames);
            scene.gt_masks[c][t] =
                render_silhouette(scene.cameras[c], cache.gauss.means_world,
                                  cache.gauss.std_devs, cache.gauss.densities, 0.5);
        }
    }
    return scene;
}

/// Heat maps with Gaussian bumps at the projected ground-truth joints,
/// optional jitter and multi-modal distractors. Values in [0, 1]; modes
/// combine by maximum so a single distractor yields exactly two local
/// maxima.
inline HeatMapSet synth_heat_maps(const SyntheticScene& scene, double blur_px, double jitter_px,
                                  int distractors, std::uint64_t seed) {
    const ScenarioOptions& opt = scene.options;
    const double scale = opt.heatmap_scale;
    const int mw = static_cast<int>(opt.width / scale);
    const int mh = static_cast<int>(opt.height / scale);
    const int joints = scene.gt_model.actor.skeleton.joint_count();
    HeatMapSet maps(opt.cameras, opt.frames, joints, mw, mh, scale);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);

    for (int c = 0; c < opt.cameras; ++c)
        for (int t = 0; t < opt.frames; ++t)
            for (int j = 0; j < joints; ++j) {
                Vec2 center;
                try {
                    center = scene.cameras[c].project(scene.gt_joints[t][j]);
                } catch (const NumericalError&) {
                    continue;  // joint behind this camera; map stays empty
                }
                center += Vec2(rng.normal(0.0, jitter_px), rng.normal(0.0, jitter_px));
                std::vector<Vec2> modes = {center};
                std::vector<double> peaks = {1.0};
                for (int d = 0; d < distractors; ++d) {
                    const double angle = rng.uniform(0, 2 * kPi);
                    const double dist = rng.uniform(4.0, 8.0) * blur_px;
                    modes.push_back(center + dist * Vec2(std::cos(angle), std::sin(angle)));
                    peaks.push_back(0.6);
                }
                Image& map = maps.at(c, t, j);
                const double sigma_map = blur_px / scale;
                for (int y = 0; y < mh; ++y)
                    for (int x = 0; x < mw; ++x) {
                        double value = 0.0;
                        for (std::size_t mmode = 0; mmode < modes.size(); ++mmode) {
                            const double du = (x + 0.5) - modes[mmode].x() / scale;
                            const double dv = (y + 0.5) - modes[mmode].y() / scale;
                            value = std::max(value,
                                             peaks[mmode] * std::exp(-(du * du + dv * dv) /
                                                                     (2 * sigma_map * sigma_map)));
                        }
                        map.at(x, y) = static_cast<float>(std::min(1.0, value));
                    }
            }
    return maps;
}

/// Per-Gaussian reference colors keyed by bone (used by the color renders
/// and the appearance tests).
inline std::vector<Vec3> bone_palette_colors(const ActorModel& model) {
    static const Vec3 palette[8] = {
        {0.8, 0.3, 0.3}, {0.3, 0.8, 0.3}, {0.3, 0.3, 0.8}, {0.8, 0.8, 0.3},
        {0.8, 0.3, 0.8}, {0.3, 0.8, 0.8}, {0.6, 0.6, 0.6}, {0.9, 0.5, 0.2}};
    std::vector<Vec3> colors(model.gaussians.size());
    for (std::size_t q = 0; q < model.gaussians.size(); ++q)
        colors[q] = palette[model.gaussians[q].bone_id % 8];
    return colors;
}

}  // namespace volcap
