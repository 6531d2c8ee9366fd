#pragma once

#include <string>
#include <vector>

#include "volcap/scene/actor.hpp"
#include "volcap/shape/mesh.hpp"
#include "volcap/shape/registration.hpp"
#include "volcap/shape/shape_space.hpp"

namespace volcap {

/// Full registration + PCA pipeline: registers the reference model onto
/// every instance mesh (Gaussians and skeleton separately) and builds the
/// joint shape space over the stacked (gamma; b) vectors.
inline ShapeSpace build_shape_space_from_meshes(const ActorModel& reference_model,
                                                const TriMesh& reference_mesh,
                                                const std::vector<TriMesh>& instances,
                                                int requested_dim,
                                                std::vector<std::string>* warnings = nullptr) {
    const PosedGaussians rest =
        pose_gaussians(reference_model, PoseVector::zero(reference_model.skeleton));
    VecX densities(rest.size());
    for (std::size_t q = 0; q < rest.size(); ++q) densities[q] = rest.densities[q];

    std::vector<VecX> stacked;
    stacked.reserve(instances.size());
    for (const TriMesh& instance : instances) {
        const RegisteredInstance gauss = register_instance(
            rest.means_world, rest.std_devs, rest.densities, reference_mesh, instance);
        const RegisteredSkeleton skel =
            register_skeleton(reference_model.skeleton, reference_mesh, instance);
        VecX sigmas(gauss.sigmas.size());
        for (std::size_t q = 0; q < gauss.sigmas.size(); ++q) sigmas[q] = gauss.sigmas[q];
        stacked.push_back(
            ShapeSpace::stack(gauss.means, sigmas, densities, skel.bone_lengths));
    }
    return ShapeSpace::build(stacked, static_cast<int>(rest.size()),
                             reference_model.skeleton.joint_count(), requested_dim, warnings);
}

}  // namespace volcap
