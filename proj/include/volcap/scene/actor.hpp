#pragma once

#include <vector>

#include "volcap/scene/gaussian.hpp"
#include "volcap/scene/kinematics.hpp"
#include "volcap/scene/skeleton.hpp"

namespace volcap {

/// Volumetric actor: Gaussian blobs rigidly attached to an articulated
/// skeleton. Surface mesh and skinning weights are attached elsewhere
/// (shape module) to keep this type light.
struct ActorModel {
    Skeleton skeleton;
    std::vector<GaussianBlob> gaussians;

    void validate() const {
        for (const GaussianBlob& g : gaussians) g.validate(skeleton.joint_count());
    }
};

inline PosedGaussians pose_gaussians(const ActorModel& model, const PoseVector& pose,
                                     bool with_jacobians = false) {
    model.validate();
    const KinematicsCache cache = forward_kinematics(model.skeleton, pose);
    PosedGaussians out;
    const std::size_t q_count = model.gaussians.size();
    out.means_world.resize(q_count);
    out.std_devs.resize(q_count);
    out.densities.resize(q_count);
    if (with_jacobians) out.jacobians.resize(q_count);
    for (std::size_t q = 0; q < q_count; ++q) {
        const GaussianBlob& g = model.gaussians[q];
        out.means_world[q] = cache.bones[g.bone_id].apply(g.mean_local);
        out.std_devs[q] = g.std_dev;
        out.densities[q] = g.density;
        if (with_jacobians)
            out.jacobians[q] =
                point_pose_jacobian(model.skeleton, cache, g.bone_id, out.means_world[q]);
    }
    return out;
}

/// Per-Gaussian derivative of the world mean w.r.t. the pose parameters.
inline std::vector<MatX> pose_jacobian(const ActorModel& model, const PoseVector& pose) {
    return pose_gaussians(model, pose, true).jacobians;
}

}  // namespace volcap
