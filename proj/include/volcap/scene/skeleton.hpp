#pragma once

#include <string>
#include <vector>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"

namespace volcap {

/// One revolute degree of freedom: rotation about a fixed axis in the
/// joint's local frame, bounded by anatomical limits.
struct JointDof {
    Vec3 axis = Vec3::UnitZ();
    double min_angle = -kPi;
    double max_angle = kPi;
};

struct Joint {
    std::string name;
    int parent = -1;                 // -1 marks the root
    Vec3 offset_dir = Vec3::Zero();  // unit direction from parent joint, in parent frame
    std::vector<JointDof> dofs;
};

/// Articulated skeleton. The pose vector layout is:
///   [0..2]  root translation (meters)
///   [3..5]  root rotation (chained x, y, z rotations, radians)
///   [6.. ]  joint angles, grouped per joint in joint order
/// The joint position in its parent's frame is offset_dir * bone_length.
class Skeleton {
public:
    Skeleton() = default;

    Skeleton(std::vector<Joint> joints, VecX bone_lengths, Vec3 root_offset)
        : joints_(std::move(joints)), lengths_(std::move(bone_lengths)),
          root_offset_(root_offset) {
        rebuild_indices();
    }

    int joint_count() const { return static_cast<int>(joints_.size()); }
    int pose_dim() const { return pose_dim_; }

    const Joint& joint(int j) const { return joints_[j]; }
    const std::vector<Joint>& joints() const { return joints_; }

    double bone_length(int j) const { return lengths_[j]; }
    const VecX& bone_lengths() const { return lengths_; }
    void set_bone_lengths(VecX b) {
        if (b.size() != lengths_.size())
            throw InvalidArgumentError("Skeleton: bone length vector size mismatch");
        lengths_ = std::move(b);
    }

    const Vec3& root_offset() const { return root_offset_; }

    /// Index of dof k of joint j in the pose vector.
    int dof_param_index(int j, int k) const { return dof_offset_[j] + k; }

    /// Pose-vector indices of all joint-angle dofs on the chain root -> j,
    /// including j's own dofs. Root rotation params (3..5) are not listed;
    /// they always apply.
    const std::vector<int>& chain_angle_params(int j) const { return chain_params_[j]; }

    /// Joints on the chain root -> j inclusive (root first).
    const std::vector<int>& chain_joints(int j) const { return chain_joints_[j]; }

    /// Joint positions in the identity (T-) pose.
    std::vector<Vec3> rest_joint_positions() const {
        std::vector<Vec3> pos(joints_.size());
        for (size_t j = 0; j < joints_.size(); ++j) {
            if (joints_[j].parent < 0)
                pos[j] = root_offset_;
            else
                pos[j] = pos[joints_[j].parent] + joints_[j].offset_dir * lengths_[j];
        }
        return pos;
    }

    /// d(rest position of joint j) / d(bone lengths), a 3 x joint_count matrix.
    MatX rest_position_jacobian(int j) const {
        MatX d = MatX::Zero(3, joint_count());
        for (int k : chain_joints_[j])
            if (joints_[k].parent >= 0) d.col(k) = joints_[k].offset_dir;
        return d;
    }

    int find_joint(const std::string& name) const {
        for (size_t j = 0; j < joints_.size(); ++j)
            if (joints_[j].name == name) return static_cast<int>(j);
        return -1;
    }

    /// Joint groups used by the hierarchical solver; loaded from the
    /// topology file, may be empty.
    std::vector<int> torso_joints;
    std::vector<int> limb_joints;

private:
    void rebuild_indices() {
        const int n = static_cast<int>(joints_.size());
        if (n == 0) throw InvalidArgumentError("Skeleton: no joints");
        if (lengths_.size() != n)
            throw InvalidArgumentError("Skeleton: bone length count != joint count");
        int roots = 0;
        for (int j = 0; j < n; ++j) {
            const int p = joints_[j].parent;
            if (p < 0) {
                ++roots;
            } else if (p >= j) {
                // Parents must precede children so chains terminate.
                throw InvalidArgumentError("Skeleton: joint '" + joints_[j].name +
                                           "' parent does not precede it (tree required)");
            }
            if (lengths_[j] < 0.0)
                throw InvalidArgumentError("Skeleton: negative bone length at joint '" +
                                           joints_[j].name + "'");
            for (const JointDof& d : joints_[j].dofs)
                if (d.min_angle > d.max_angle)
                    throw InvalidArgumentError("Skeleton: inverted limits at joint '" +
                                               joints_[j].name + "'");
        }
        if (roots != 1) throw InvalidArgumentError("Skeleton: exactly one root required");
        if (joints_[0].parent >= 0)
            throw InvalidArgumentError("Skeleton: joint 0 must be the root");

        dof_offset_.assign(n, 0);
        int next = 6;
        for (int j = 0; j < n; ++j) {
            dof_offset_[j] = next;
            next += static_cast<int>(joints_[j].dofs.size());
        }
        pose_dim_ = next;

        chain_joints_.assign(n, {});
        chain_params_.assign(n, {});
        for (int j = 0; j < n; ++j) {
            std::vector<int> chain;
            for (int k = j; k >= 0; k = joints_[k].parent) chain.push_back(k);
            std::reverse(chain.begin(), chain.end());
            chain_joints_[j] = chain;
            for (int k : chain)
                for (size_t d = 0; d < joints_[k].dofs.size(); ++d)
                    chain_params_[j].push_back(dof_param_index(k, static_cast<int>(d)));
        }
    }

    std::vector<Joint> joints_;
    VecX lengths_;
    Vec3 root_offset_ = Vec3::Zero();
    std::vector<int> dof_offset_;
    std::vector<std::vector<int>> chain_joints_;
    std::vector<std::vector<int>> chain_params_;
    int pose_dim_ = 6;
};

/// Pose parameters for one frame.
struct PoseVector {
    VecX params;

    PoseVector() = default;
    explicit PoseVector(VecX p) : params(std::move(p)) {}

    static PoseVector zero(const Skeleton& skel) {
        return PoseVector(VecX::Zero(skel.pose_dim()));
    }
};

}  // namespace volcap
