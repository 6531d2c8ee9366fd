#pragma once

#include <vector>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"
#include "volcap/scene/skeleton.hpp"

namespace volcap {

struct BoneXform {
    Mat3 rotation = Mat3::Identity();
    Vec3 origin = Vec3::Zero();

    Vec3 apply(const Vec3& x) const { return rotation * x + origin; }
};

/// Forward-kinematics result plus the per-parameter data needed for
/// geometric Jacobians: for every angle parameter, the world axis and the
/// world center of its rotation at the current pose.
struct KinematicsCache {
    std::vector<BoneXform> bones;       // per joint
    std::vector<Vec3> axis_world;       // per pose param; zero for translations
    std::vector<Vec3> center_world;     // per pose param
    std::vector<Vec3> offset_dir_world; // per joint: world direction of its offset
};

inline KinematicsCache forward_kinematics(const Skeleton& skel, const PoseVector& pose) {
    if (pose.params.size() != skel.pose_dim())
        throw InvalidArgumentError("forward_kinematics: pose has " +
                                   std::to_string(pose.params.size()) + " params, skeleton needs " +
                                   std::to_string(skel.pose_dim()));
    const int n = skel.joint_count();
    KinematicsCache cache;
    cache.bones.resize(n);
    cache.axis_world.assign(skel.pose_dim(), Vec3::Zero());
    cache.center_world.assign(skel.pose_dim(), Vec3::Zero());
    cache.offset_dir_world.assign(n, Vec3::Zero());

    // Root: translate, then rotate about the root origin (chained x, y, z).
    const Vec3 root_origin = skel.root_offset() + pose.params.head<3>();
    Mat3 root_rot = Mat3::Identity();
    const Vec3 root_axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    for (int k = 0; k < 3; ++k) {
        cache.axis_world[3 + k] = root_rot * root_axes[k];
        cache.center_world[3 + k] = root_origin;
        root_rot = root_rot * Eigen::AngleAxisd(pose.params[3 + k], root_axes[k]).toRotationMatrix();
    }
    cache.bones[0] = {root_rot, root_origin};

    for (int j = 1; j < n; ++j) {
        const Joint& joint = skel.joint(j);
        const BoneXform& parent = cache.bones[joint.parent];
        cache.offset_dir_world[j] = parent.rotation * joint.offset_dir;
        const Vec3 origin = parent.origin + cache.offset_dir_world[j] * skel.bone_length(j);
        Mat3 rot = parent.rotation;
        for (size_t k = 0; k < joint.dofs.size(); ++k) {
            const int idx = skel.dof_param_index(j, static_cast<int>(k));
            cache.axis_world[idx] = rot * joint.dofs[k].axis;
            cache.center_world[idx] = origin;
            rot = rot * Eigen::AngleAxisd(pose.params[idx], joint.dofs[k].axis).toRotationMatrix();
        }
        cache.bones[j] = {rot, origin};
    }
    return cache;
}

/// d(world position of a point on bone j) / d(pose params), 3 x pose_dim.
inline MatX point_pose_jacobian(const Skeleton& skel, const KinematicsCache& cache, int bone,
                                const Vec3& x_world) {
    MatX jac = MatX::Zero(3, skel.pose_dim());
    jac.block<3, 3>(0, 0).setIdentity();
    auto revolute = [&](int idx) {
        jac.col(idx) = cache.axis_world[idx].cross(x_world - cache.center_world[idx]);
    };
    for (int k = 3; k < 6; ++k) revolute(k);
    for (int idx : skel.chain_angle_params(bone)) revolute(idx);
    return jac;
}

/// d(origin of bone j) / d(bone lengths), 3 x joint_count. Rotations do not
/// depend on bone lengths, so this is also the length sensitivity of any
/// point rigidly attached to bone j.
inline MatX bone_length_jacobian(const Skeleton& skel, const KinematicsCache& cache, int bone) {
    MatX d = MatX::Zero(3, skel.joint_count());
    for (int k : skel.chain_joints(bone))
        if (skel.joint(k).parent >= 0) d.col(k) = cache.offset_dir_world[k];
    return d;
}

}  // namespace volcap
