#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"
#include "volcap/scene/gaussian.hpp"
#include "volcap/scene/skeleton.hpp"
#include "volcap/shape/mesh.hpp"
#include "volcap/shape/procrustes.hpp"

namespace volcap {

/// Sparse per-vertex blend weights over Gaussians, normalized to sum 1.
struct SkinningWeights {
    struct Entry {
        int gaussian;
        double weight;
    };
    std::vector<std::vector<Entry>> per_vertex;
    std::vector<int> fallback_vertices;  // vertices assigned to their nearest Gaussian
};

/// Per-Gaussian vertex neighborhood used for Procrustes registration,
/// weighted by the Gaussian's density at each vertex.
struct GaussianNeighborhood {
    std::vector<int> vertex_ids;
    std::vector<double> weights;
};

namespace detail {
inline double density_at(const Vec3& x, const Vec3& mean, double sigma, double density) {
    return density * std::exp(-(x - mean).squaredNorm() / (2.0 * sigma * sigma));
}
}  // namespace detail

/// Per-vertex skinning weights proportional to each Gaussian's density at
/// the vertex. Weights below rel_cutoff of the vertex's strongest response
/// are dropped; vertices with no response fall back to the nearest Gaussian.
inline SkinningWeights density_weights(const TriMesh& reference, std::span<const Vec3> means,
                                       std::span<const double> sigmas,
                                       std::span<const double> densities,
                                       double rel_cutoff = 1e-6,
                                       std::vector<std::string>* warnings = nullptr) {
    const std::size_t q_count = means.size();
    if (sigmas.size() != q_count || densities.size() != q_count)
        throw InvalidArgumentError("density_weights: gaussian array size mismatch");
    SkinningWeights out;
    out.per_vertex.resize(reference.vertices.size());
    for (std::size_t v = 0; v < reference.vertices.size(); ++v) {
        const Vec3& x = reference.vertices[v];
        double best = 0.0;
        std::vector<double> w(q_count);
        for (std::size_t q = 0; q < q_count; ++q) {
            w[q] = detail::density_at(x, means[q], sigmas[q], densities[q]);
            best = std::max(best, w[q]);
        }
        if (best <= 0.0) {
            // Density underflow far from the model: snap to nearest Gaussian.
            std::size_t nearest = 0;
            double d_best = std::numeric_limits<double>::max();
            for (std::size_t q = 0; q < q_count; ++q) {
                const double d = (x - means[q]).squaredNorm();
                if (d < d_best) {
                    d_best = d;
                    nearest = q;
                }
            }
            out.per_vertex[v] = {{static_cast<int>(nearest), 1.0}};
            out.fallback_vertices.push_back(static_cast<int>(v));
            if (warnings)
                warnings->push_back("density_weights: vertex " + std::to_string(v) +
                                    " has zero density everywhere; assigned nearest gaussian");
            continue;
        }
        double total = 0.0;
        for (std::size_t q = 0; q < q_count; ++q) {
            if (w[q] < rel_cutoff * best) continue;
            total += w[q];
        }
        for (std::size_t q = 0; q < q_count; ++q) {
            if (w[q] < rel_cutoff * best) continue;
            out.per_vertex[v].push_back({static_cast<int>(q), w[q] / total});
        }
    }
    return out;
}

inline std::vector<GaussianNeighborhood> gaussian_neighborhoods(
    const TriMesh& reference, std::span<const Vec3> means, std::span<const double> sigmas,
    std::span<const double> densities, double rel_cutoff = 1e-6) {
    std::vector<GaussianNeighborhood> hoods(means.size());
    for (std::size_t q = 0; q < means.size(); ++q) {
        double best = 0.0;
        std::vector<double> w(reference.vertices.size());
        for (std::size_t v = 0; v < reference.vertices.size(); ++v) {
            w[v] = detail::density_at(reference.vertices[v], means[q], sigmas[q], densities[q]);
            best = std::max(best, w[v]);
        }
        for (std::size_t v = 0; v < reference.vertices.size(); ++v)
            if (best > 0.0 && w[v] >= rel_cutoff * best) {
                hoods[q].vertex_ids.push_back(static_cast<int>(v));
                hoods[q].weights.push_back(w[v]);
            }
    }
    return hoods;
}

/// Result of registering the reference Gaussians onto one instance mesh.
struct RegisteredInstance {
    std::vector<Vec3> means;
    std::vector<double> sigmas;
    std::vector<Similarity> transforms;  // per Gaussian
};

/// Registers reference Gaussians (world frame, rest pose) to an instance
/// mesh in vertex correspondence with the reference mesh. Scaling multiplies
/// sigma, the full similarity moves the mean; densities are untouched.
inline RegisteredInstance register_instance(std::span<const Vec3> ref_means,
                                            std::span<const double> ref_sigmas,
                                            std::span<const double> ref_densities,
                                            const TriMesh& ref_mesh, const TriMesh& instance) {
    if (instance.vertex_count() != ref_mesh.vertex_count())
        throw InvalidArgumentError("register_instance: meshes not in vertex correspondence");
    const auto hoods = gaussian_neighborhoods(ref_mesh, ref_means, ref_sigmas, ref_densities);
    RegisteredInstance out;
    out.means.resize(ref_means.size());
    out.sigmas.resize(ref_means.size());
    out.transforms.resize(ref_means.size());
    for (std::size_t q = 0; q < ref_means.size(); ++q) {
        std::vector<Vec3> src, dst;
        src.reserve(hoods[q].vertex_ids.size());
        dst.reserve(hoods[q].vertex_ids.size());
        for (int v : hoods[q].vertex_ids) {
            src.push_back(ref_mesh.vertices[v]);
            dst.push_back(instance.vertices[v]);
        }
        Similarity sim;
        try {
            sim = weighted_procrustes(src, dst, hoods[q].weights);
        } catch (const NumericalError& e) {
            throw NumericalError("register_instance: gaussian " + std::to_string(q) + ": " +
                                 e.what());
        }
        out.transforms[q] = sim;
        out.means[q] = sim.apply(ref_means[q]);
        out.sigmas[q] = sim.scale * ref_sigmas[q];
    }
    return out;
}

/// Registers the reference skeleton to an instance mesh: a sigma = 0.10 m
/// probe Gaussian at each rest joint position is carried over by the same
/// Procrustes strategy; bone lengths are re-measured between the moved
/// joints.
struct RegisteredSkeleton {
    std::vector<Vec3> joint_positions;
    VecX bone_lengths;
};

inline RegisteredSkeleton register_skeleton(const Skeleton& reference, const TriMesh& ref_mesh,
                                            const TriMesh& instance,
                                            double joint_sigma = 0.10) {
    if (instance.vertex_count() != ref_mesh.vertex_count())
        throw InvalidArgumentError("register_skeleton: meshes not in vertex correspondence");
    const auto rest = reference.rest_joint_positions();
    const std::size_t n = rest.size();
    std::vector<double> sigmas(n, joint_sigma), densities(n, 1.0);
    const auto hoods = gaussian_neighborhoods(ref_mesh, rest, sigmas, densities);

    RegisteredSkeleton out;
    out.joint_positions.resize(n);
    out.bone_lengths = VecX::Zero(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Vec3> src, dst;
        for (int v : hoods[j].vertex_ids) {
            src.push_back(ref_mesh.vertices[v]);
            dst.push_back(instance.vertices[v]);
        }
        Similarity sim;
        try {
            sim = weighted_procrustes(src, dst, hoods[j].weights);
        } catch (const NumericalError& e) {
            throw NumericalError("register_skeleton: joint '" + reference.joint(j).name +
                                 "': " + e.what());
        }
        out.joint_positions[j] = sim.apply(rest[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        const int p = reference.joint(static_cast<int>(j)).parent;
        if (p >= 0)
            out.bone_lengths[j] = (out.joint_positions[j] - out.joint_positions[p]).norm();
    }
    return out;
}

}  // namespace volcap
