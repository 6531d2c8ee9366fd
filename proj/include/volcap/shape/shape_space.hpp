#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"

namespace volcap {

/// Evaluated shape-space sample: Gaussian parameters in the rest-pose world
/// frame plus bone lengths.
struct StackedShape {
    std::vector<Vec3> gauss_means;  // rest-pose world frame
    VecX sigmas;
    VecX densities;
    VecX bone_lengths;
};

/// Joint linear model over stacked (gamma; b) vectors.
///
/// Stacking layout, fixed and shared with the on-disk format:
///   [mu_x0 mu_y0 mu_z0 ... mu_z{Q-1} | sigma_0..sigma_{Q-1} |
///    density_0..density_{Q-1} | b_0..b_{J-1}]
/// with Gaussian rest means in world coordinates of the rest pose.
class ShapeSpace {
public:
    ShapeSpace() = default;

    int gaussian_count = 0;
    int bone_count = 0;
    int dim = 0;
    VecX mean;          // stacked_dim
    MatX basis;         // stacked_dim x dim, orthonormal columns
    VecX coeff_bounds;  // per-coefficient max |projection| over training data

    int stacked_dim() const { return 5 * gaussian_count + bone_count; }

    int mu_index(int q, int axis) const { return 3 * q + axis; }
    int sigma_index(int q) const { return 3 * gaussian_count + q; }
    int density_index(int q) const { return 4 * gaussian_count + q; }
    int bone_index(int j) const { return 5 * gaussian_count + j; }

    static VecX stack(std::span<const Vec3> means, const VecX& sigmas, const VecX& densities,
                      const VecX& bones) {
        const int q_count = static_cast<int>(means.size());
        VecX x(5 * q_count + static_cast<int>(bones.size()));
        for (int q = 0; q < q_count; ++q) x.segment<3>(3 * q) = means[q];
        x.segment(3 * q_count, q_count) = sigmas;
        x.segment(4 * q_count, q_count) = densities;
        x.tail(bones.size()) = bones;
        return x;
    }

    /// PCA over the instance columns. dim is truncated (with a warning) when
    /// fewer than requested_dim + 1 instances are available.
    static ShapeSpace build(const std::vector<VecX>& instances, int gaussian_count,
                            int bone_count, int requested_dim,
                            std::vector<std::string>* warnings = nullptr) {
        if (instances.size() < 2)
            throw InvalidArgumentError("ShapeSpace::build: need at least 2 instances");
        ShapeSpace space;
        space.gaussian_count = gaussian_count;
        space.bone_count = bone_count;
        const int d = space.stacked_dim();
        const int n = static_cast<int>(instances.size());
        for (const VecX& x : instances)
            if (x.size() != d)
                throw InvalidArgumentError("ShapeSpace::build: instance has wrong stacked size");

        space.mean = VecX::Zero(d);
        for (const VecX& x : instances) space.mean += x;
        space.mean /= n;

        MatX centered(d, n);
        for (int i = 0; i < n; ++i) centered.col(i) = instances[i] - space.mean;

        Eigen::BDCSVD<MatX> svd(centered, Eigen::ComputeThinU);
        int dim = std::min(requested_dim, n - 1);
        if (dim < requested_dim && warnings)
            warnings->push_back("ShapeSpace::build: requested dim " +
                                std::to_string(requested_dim) + " truncated to " +
                                std::to_string(dim) + " (too few instances)");
        dim = std::min<int>(dim, svd.matrixU().cols());
        space.dim = dim;
        space.basis = svd.matrixU().leftCols(dim);

        space.coeff_bounds = VecX::Zero(dim);
        for (int i = 0; i < n; ++i) {
            const VecX proj = space.basis.transpose() * centered.col(i);
            space.coeff_bounds = space.coeff_bounds.cwiseMax(proj.cwiseAbs());
        }
        return space;
    }

    VecX evaluate_stacked(const VecX& s) const {
        if (s.size() != dim)
            throw InvalidArgumentError("ShapeSpace::evaluate: coefficient size mismatch");
        return mean + basis * s;
    }

    /// Evaluates and unstacks. Sigmas are clamped to >= sigma_floor; the
    /// linear model can leave the physical range far outside the training
    /// bounds.
    StackedShape evaluate(const VecX& s, std::vector<std::string>* warnings = nullptr,
                          double sigma_floor = 1e-4) const {
        const VecX x = evaluate_stacked(s);
        StackedShape out;
        out.gauss_means.resize(gaussian_count);
        out.sigmas.resize(gaussian_count);
        out.densities.resize(gaussian_count);
        out.bone_lengths.resize(bone_count);
        bool clamped = false;
        for (int q = 0; q < gaussian_count; ++q) {
            out.gauss_means[q] = x.segment<3>(mu_index(q, 0));
            out.sigmas[q] = x[sigma_index(q)];
            if (out.sigmas[q] < sigma_floor) {
                out.sigmas[q] = sigma_floor;
                clamped = true;
            }
            out.densities[q] = std::max(0.0, x[density_index(q)]);
        }
        for (int j = 0; j < bone_count; ++j)
            out.bone_lengths[j] = std::max(0.0, x[bone_index(j)]);
        if (clamped && warnings)
            warnings->push_back("ShapeSpace::evaluate: sigma clamped to floor");
        return out;
    }

    VecX project(const VecX& stacked) const {
        return basis.transpose() * (stacked - mean);
    }
};

}  // namespace volcap
