#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"

namespace volcap {

/// Weighted similarity Procrustes: minimizes
///   sum_i w_i | s R x_i + t - y_i |^2
/// over scale s > 0, proper rotation R and translation t.
///
/// Throws NumericalError for degenerate point sets (fewer than 3 effective
/// points, coincident or collinear sources); the message can be annotated by
/// the caller with the entity being registered.
inline Similarity weighted_procrustes(std::span<const Vec3> source, std::span<const Vec3> target,
                                      std::span<const double> weights) {
    const std::size_t n = source.size();
    if (n != target.size() || (weights.size() != 0 && weights.size() != n))
        throw InvalidArgumentError("weighted_procrustes: size mismatch");
    if (n < 3) throw NumericalError("weighted_procrustes: fewer than 3 points");

    double w_total = 0.0;
    auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
    for (std::size_t i = 0; i < n; ++i) {
        if (weight(i) < 0.0) throw InvalidArgumentError("weighted_procrustes: negative weight");
        w_total += weight(i);
    }
    if (!(w_total > 0.0)) throw NumericalError("weighted_procrustes: all weights zero");

    Vec3 src_mean = Vec3::Zero(), dst_mean = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        src_mean += weight(i) * source[i];
        dst_mean += weight(i) * target[i];
    }
    src_mean /= w_total;
    dst_mean /= w_total;

    Mat3 cov = Mat3::Zero();
    double src_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 xs = source[i] - src_mean;
        const Vec3 yd = target[i] - dst_mean;
        cov += weight(i) * yd * xs.transpose();
        src_var += weight(i) * xs.squaredNorm();
    }
    cov /= w_total;
    src_var /= w_total;
    if (src_var < 1e-18) throw NumericalError("weighted_procrustes: coincident source points");

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    // Rotation about a line of points is unconstrained; report rather than
    // return an arbitrary axis.
    if (sv[1] <= 1e-12 * std::max(sv[0], 1e-300))
        throw NumericalError("weighted_procrustes: collinear point set");

    Vec3 sign = Vec3::Ones();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) sign[2] = -1.0;

    Similarity sim;
    sim.rotation = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();
    sim.scale = sv.dot(sign) / src_var;
    if (!(sim.scale > 0.0)) throw NumericalError("weighted_procrustes: non-positive scale");
    sim.translation = dst_mean - sim.scale * (sim.rotation * src_mean);
    return sim;
}

}  // namespace volcap
