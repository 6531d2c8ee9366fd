#pragma once

#include <optional>
#include <vector>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"

namespace volcap {

/// One isotropic 3D density element, rigidly attached to a skeleton bone.
/// The density field contribution is density * exp(-|x - mean|^2 / (2 std_dev^2)).
struct GaussianBlob {
    Vec3 mean_local = Vec3::Zero();  // in the attached bone's frame (meters)
    double std_dev = 0.1;            // meters, > 0
    double density = 1.0;            // dimensionless, >= 0
    int bone_id = 0;
    std::optional<Vec3> color;       // RGB in [0,1]^3

    void validate(int bone_count) const {
        if (!(std_dev > 0.0)) throw InvalidArgumentError("GaussianBlob: std_dev must be > 0");
        if (density < 0.0) throw InvalidArgumentError("GaussianBlob: density must be >= 0");
        if (bone_id < 0 || bone_id >= bone_count)
            throw InvalidArgumentError("GaussianBlob: bone_id out of range");
    }
};

/// World-frame realization of a Gaussian set under a pose. Jacobians, when
/// present, are d(world mean)/d(pose params), one 3 x pose_dim block per blob.
struct PosedGaussians {
    std::vector<Vec3> means_world;
    std::vector<double> std_devs;
    std::vector<double> densities;
    std::vector<MatX> jacobians;  // optional; empty when not requested

    std::size_t size() const { return means_world.size(); }
};

}  // namespace volcap
