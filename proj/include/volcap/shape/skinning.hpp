#pragma once

#include <span>
#include <vector>

#include "volcap/core/types.hpp"
#include "volcap/scene/kinematics.hpp"
#include "volcap/shape/mesh.hpp"
#include "volcap/shape/registration.hpp"

namespace volcap {

/// Volumetric skinning: each vertex is the density-weighted blend of its
/// neighboring Gaussians' similarity transforms applied to the reference
/// position.
inline TriMesh skin_mesh(const TriMesh& reference, const SkinningWeights& weights,
                         std::span<const Similarity> gaussian_transforms) {
    if (weights.per_vertex.size() != reference.vertices.size())
        throw InvalidArgumentError("skin_mesh: weight table does not match mesh");
    TriMesh out;
    out.triangles = reference.triangles;
    out.vertices.resize(reference.vertices.size());
    for (std::size_t v = 0; v < reference.vertices.size(); ++v) {
        Vec3 x = Vec3::Zero();
        for (const SkinningWeights::Entry& e : weights.per_vertex[v])
            x += e.weight * gaussian_transforms[e.gaussian].apply(reference.vertices[v]);
        out.vertices[v] = x;
    }
    return out;
}

/// Per-Gaussian similarity transforms of a posed + reshaped model relative
/// to its reference state: the bone's rigid motion composed with the sigma
/// ratio as a scale about the reference mean.
inline std::vector<Similarity> gaussian_pose_transforms(std::span<const Vec3> ref_means,
                                                        std::span<const double> ref_sigmas,
                                                        std::span<const Vec3> posed_means,
                                                        std::span<const double> posed_sigmas,
                                                        std::span<const Mat3> bone_rotations) {
    std::vector<Similarity> out(ref_means.size());
    for (std::size_t q = 0; q < ref_means.size(); ++q) {
        Similarity sim;
        sim.scale = posed_sigmas[q] / ref_sigmas[q];
        sim.rotation = bone_rotations[q];
        sim.translation = posed_means[q] - sim.scale * (sim.rotation * ref_means[q]);
        out[q] = sim;
    }
    return out;
}

}  // namespace volcap
