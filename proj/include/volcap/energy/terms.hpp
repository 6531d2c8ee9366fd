#pragma once

#include <cmath>

#include "volcap/core/types.hpp"
#include "volcap/scene/skeleton.hpp"

namespace volcap {

/// Orientation-insensitive contour similarity:
///   -|gB| |gI| cos(2 angle(gB, gI))
/// computed through the robust double-angle identity; the 0/0 limit is 0.
inline double e_sim(const Vec2& g_model, const Vec2& g_image, Vec2* d_g_model = nullptr) {
    const double nb = g_model.norm(), ni = g_image.norm();
    if (nb < 1e-15 || ni < 1e-15) {
        if (d_g_model) d_g_model->setZero();
        return 0.0;
    }
    const double dot = g_model.dot(g_image);
    const double value = nb * ni - 2.0 * dot * dot / (nb * ni);
    if (d_g_model)
        *d_g_model = (ni / nb) * g_model - (4.0 * dot / (nb * ni)) * g_image +
                     (2.0 * dot * dot / (nb * nb * nb * ni)) * g_model;
    return value;
}

/// Penalizes model contours in flat image regions:
///   |gB| max(0, delta_low - |gI|).
inline double e_flat(const Vec2& g_model, const Vec2& g_image, double delta_low,
                     Vec2* d_g_model = nullptr) {
    const double hinge = std::max(0.0, delta_low - g_image.norm());
    const double nb = g_model.norm();
    if (d_g_model) {
        if (nb < 1e-15 || hinge == 0.0)
            d_g_model->setZero();
        else
            *d_g_model = (hinge / nb) * g_model;
    }
    return nb * hinge;
}

/// Quadratic hinge outside the per-coefficient training bounds.
inline double shape_prior(const VecX& s, const VecX& bounds, VecX* grad = nullptr) {
    if (grad) grad->setZero(s.size());
    double e = 0.0;
    for (int k = 0; k < s.size(); ++k) {
        const double excess = std::abs(s[k]) - bounds[k];
        if (excess <= 0.0) continue;
        e += excess * excess;
        if (grad) (*grad)[k] = 2.0 * excess * (s[k] > 0.0 ? 1.0 : -1.0);
    }
    return e;
}

/// Sum of squared second differences over interior frames. poses is
/// pose_dim x T; grad, when given, must have the same shape and is
/// accumulated into.
inline double smooth_prior(const MatX& poses, MatX* grad = nullptr) {
    const int t_count = static_cast<int>(poses.cols());
    if (grad && (grad->rows() != poses.rows() || grad->cols() != poses.cols()))
        grad->setZero(poses.rows(), poses.cols());
    double e = 0.0;
    for (int t = 1; t + 1 < t_count; ++t) {
        const VecX acc = poses.col(t - 1) - 2.0 * poses.col(t) + poses.col(t + 1);
        e += acc.squaredNorm();
        if (grad) {
            grad->col(t - 1) += 2.0 * acc;
            grad->col(t) -= 4.0 * acc;
            grad->col(t + 1) += 2.0 * acc;
        }
    }
    return e;
}

/// Quadratic hinge outside the anatomical limits; root parameters are
/// unbounded.
inline double pose_prior(const Skeleton& skel, const VecX& pose, VecX* grad = nullptr) {
    if (grad) grad->setZero(pose.size());
    double e = 0.0;
    for (int j = 0; j < skel.joint_count(); ++j) {
        const Joint& joint = skel.joint(j);
        for (std::size_t k = 0; k < joint.dofs.size(); ++k) {
            const int idx = skel.dof_param_index(j, static_cast<int>(k));
            const double v = pose[idx];
            const JointDof& d = joint.dofs[k];
            if (v > d.max_angle) {
                e += (v - d.max_angle) * (v - d.max_angle);
                if (grad) (*grad)[idx] += 2.0 * (v - d.max_angle);
            } else if (v < d.min_angle) {
                e += (d.min_angle - v) * (d.min_angle - v);
                if (grad) (*grad)[idx] -= 2.0 * (d.min_angle - v);
            }
        }
    }
    return e;
}

}  // namespace volcap
