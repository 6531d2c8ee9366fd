#pragma once

#include <vector>

#include "volcap/core/types.hpp"
#include "volcap/render/raycast.hpp"
#include "volcap/scene/actor.hpp"
#include "volcap/shape/shape_space.hpp"

namespace volcap {

/// Actor realized from shape coefficients, carrying the linear sensitivities
/// of every Gaussian parameter and bone length w.r.t. the coefficients.
/// Built from a fixed actor (empty chain matrices) or from a shape space.
struct ShapedModel {
    ActorModel actor;
    int shape_dim = 0;
    MatX dmu_local_ds;  // (3Q) x dim; d(bone-local mean)/ds
    MatX dsigma_ds;     // Q x dim
    MatX ddensity_ds;   // Q x dim
    MatX db_ds;         // J x dim

    bool has_shape_chain() const { return shape_dim > 0; }
};

/// Instantiates the template actor at shape coefficients s. The shape space
/// stores rest-pose world means; bone-local means are recovered by
/// subtracting the rest joint positions of the evaluated skeleton, which
/// keeps Gaussians attached to their bones as s changes.
inline ShapedModel shape_model(const ShapeSpace& space, const ActorModel& template_model,
                               const VecX& s, std::vector<std::string>* warnings = nullptr) {
    if (space.gaussian_count != static_cast<int>(template_model.gaussians.size()) ||
        space.bone_count != template_model.skeleton.joint_count())
        throw InvalidArgumentError("shape_model: space does not match the template model");
    const StackedShape eval = space.evaluate(s, warnings);

    ShapedModel out;
    out.shape_dim = space.dim;
    out.actor.skeleton = template_model.skeleton;
    out.actor.skeleton.set_bone_lengths(eval.bone_lengths);
    const auto rest = out.actor.skeleton.rest_joint_positions();

    const int q_count = space.gaussian_count;
    out.actor.gaussians = template_model.gaussians;
    out.dmu_local_ds = MatX::Zero(3 * q_count, space.dim);
    out.dsigma_ds = MatX::Zero(q_count, space.dim);
    out.ddensity_ds = MatX::Zero(q_count, space.dim);
    out.db_ds = space.basis.middleRows(space.bone_index(0), space.bone_count);

    const VecX raw = space.evaluate_stacked(s);
    for (int q = 0; q < q_count; ++q) {
        GaussianBlob& g = out.actor.gaussians[q];
        g.mean_local = eval.gauss_means[q] - rest[g.bone_id];
        g.std_dev = eval.sigmas[q];
        g.density = eval.densities[q];
        const MatX d_rest = out.actor.skeleton.rest_position_jacobian(g.bone_id);
        out.dmu_local_ds.middleRows(3 * q, 3) =
            space.basis.middleRows(space.mu_index(q, 0), 3) - d_rest * out.db_ds;
        // Clamped coordinates stop responding to s.
        if (raw[space.sigma_index(q)] >= 1e-4)
            out.dsigma_ds.row(q) = space.basis.row(space.sigma_index(q));
        if (raw[space.density_index(q)] >= 0.0)
            out.ddensity_ds.row(q) = space.basis.row(space.density_index(q));
    }
    return out;
}

inline ShapedModel fixed_model(const ActorModel& actor) {
    ShapedModel out;
    out.actor = actor;
    out.shape_dim = 0;
    return out;
}

/// Stage-I probe actor: one Gaussian per joint, pinned at the joint origin.
/// Its means still respond to shape through the bone lengths.
inline ShapedModel joint_probe_model(const ShapedModel& body, double sigma, double density) {
    ShapedModel out;
    out.actor.skeleton = body.actor.skeleton;
    out.shape_dim = body.shape_dim;
    const int n = out.actor.skeleton.joint_count();
    out.actor.gaussians.resize(n);
    for (int j = 0; j < n; ++j) {
        out.actor.gaussians[j].mean_local = Vec3::Zero();
        out.actor.gaussians[j].std_dev = sigma;
        out.actor.gaussians[j].density = density;
        out.actor.gaussians[j].bone_id = j;
    }
    if (body.has_shape_chain()) {
        out.dmu_local_ds = MatX::Zero(3 * n, body.shape_dim);
        out.dsigma_ds = MatX::Zero(n, body.shape_dim);
        out.ddensity_ds = MatX::Zero(n, body.shape_dim);
        out.db_ds = body.db_ds;
    }
    return out;
}

/// Per-frame pose realization with everything the adjoint mapping needs.
struct PosedModelCache {
    KinematicsCache kin;
    PosedGaussians gauss;
    std::vector<MatX> bone_shape_chain;  // per joint: d(bone origin)/ds, 3 x dim
};

inline PosedModelCache pose_model(const ShapedModel& model, const PoseVector& pose,
                                  bool with_shape_chain) {
    PosedModelCache cache;
    cache.kin = forward_kinematics(model.actor.skeleton, pose);
    const std::size_t q_count = model.actor.gaussians.size();
    cache.gauss.means_world.resize(q_count);
    cache.gauss.std_devs.resize(q_count);
    cache.gauss.densities.resize(q_count);
    for (std::size_t q = 0; q < q_count; ++q) {
        const GaussianBlob& g = model.actor.gaussians[q];
        cache.gauss.means_world[q] = cache.kin.bones[g.bone_id].apply(g.mean_local);
        cache.gauss.std_devs[q] = g.std_dev;
        cache.gauss.densities[q] = g.density;
    }
    if (with_shape_chain && model.has_shape_chain()) {
        const int n = model.actor.skeleton.joint_count();
        cache.bone_shape_chain.resize(n);
        for (int j = 0; j < n; ++j)
            cache.bone_shape_chain[j] =
                bone_length_jacobian(model.actor.skeleton, cache.kin, j) * model.db_ds;
    }
    return cache;
}

/// Maps per-Gaussian adjoints to pose and shape parameter gradients:
///   grad_pose += scale * J_pose^T adj,  grad_shape += scale * J_shape^T adj.
inline void apply_gaussian_adjoints(const ShapedModel& model, const PosedModelCache& cache,
                                    const GaussianAdjoints& adj, double scale, VecX* grad_pose,
                                    VecX* grad_shape) {
    const Skeleton& skel = model.actor.skeleton;
    const std::size_t q_count = model.actor.gaussians.size();
    for (std::size_t q = 0; q < q_count; ++q) {
        const Vec3 a_mu = scale * adj.mu.col(static_cast<int>(q));
        const double a_sigma = scale * adj.sigma[static_cast<int>(q)];
        const double a_dens = scale * adj.density[static_cast<int>(q)];
        if (a_mu.isZero(0.0) && a_sigma == 0.0 && a_dens == 0.0) continue;
        const int bone = model.actor.gaussians[q].bone_id;
        const Vec3& x = cache.gauss.means_world[q];

        if (grad_pose) {
            grad_pose->segment<3>(0) += a_mu;
            for (int k = 3; k < 6; ++k)
                (*grad_pose)[k] +=
                    a_mu.dot(cache.kin.axis_world[k].cross(x - cache.kin.center_world[k]));
            for (int idx : skel.chain_angle_params(bone))
                (*grad_pose)[idx] +=
                    a_mu.dot(cache.kin.axis_world[idx].cross(x - cache.kin.center_world[idx]));
        }
        if (grad_shape && model.has_shape_chain()) {
            const Mat3& rot = cache.kin.bones[bone].rotation;
            grad_shape->noalias() +=
                (rot * model.dmu_local_ds.middleRows(3 * static_cast<int>(q), 3) +
                 cache.bone_shape_chain[bone])
                    .transpose() *
                a_mu;
            if (a_sigma != 0.0)
                grad_shape->noalias() +=
                    a_sigma * model.dsigma_ds.row(static_cast<int>(q)).transpose();
            if (a_dens != 0.0)
                grad_shape->noalias() +=
                    a_dens * model.ddensity_ds.row(static_cast<int>(q)).transpose();
        }
    }
}

}  // namespace volcap
