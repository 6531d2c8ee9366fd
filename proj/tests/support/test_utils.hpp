#pragma once

#include <cmath>
#include <functional>

#include "volcap/core/rng.hpp"
#include "volcap/core/types.hpp"
#include "volcap/scene/skeleton.hpp"

namespace volcap::test {

/// Central finite difference of a scalar function along one coordinate.
inline double central_diff(const std::function<double(const VecX&)>& f, const VecX& x, int k,
                           double h) {
    VecX xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    return (f(xp) - f(xm)) / (2.0 * h);
}

inline VecX central_gradient(const std::function<double(const VecX&)>& f, const VecX& x,
                             double h) {
    VecX g(x.size());
    for (int k = 0; k < x.size(); ++k) g[k] = central_diff(f, x, k, h);
    return g;
}

/// Worst component-wise relative disagreement with a scale-aware floor:
/// |a_k - b_k| / max(|a_k|, |b_k|, max|b|). b is the reference.
inline double relative_disagreement(const VecX& a, const VecX& b) {
    const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
    double worst = 0.0;
    for (int k = 0; k < a.size(); ++k) {
        const double denom = std::max({std::abs(a[k]), std::abs(b[k]), scale});
        worst = std::max(worst, std::abs(a[k] - b[k]) / denom);
    }
    return worst;
}

/// Planar two-link chain: root at the origin (theta1 = root z rotation,
/// pose param 5), one "elbow" joint at distance l1 along +x with a single
/// z dof (theta2, pose param 6). A point at local (l2,0,0) on the elbow
/// bone is the classic two-link tip.
inline Skeleton two_link_chain(double l1) {
    std::vector<Joint> joints(2);
    joints[0].name = "base";
    joints[0].parent = -1;
    joints[1].name = "elbow";
    joints[1].parent = 0;
    joints[1].offset_dir = Vec3::UnitX();
    joints[1].dofs = {JointDof{Vec3::UnitZ(), -kPi, kPi}};
    VecX lengths(2);
    lengths << 0.0, l1;
    return Skeleton(std::move(joints), std::move(lengths), Vec3::Zero());
}

/// Hand-rolled planar oracle for the two-link tip position.
inline Vec3 two_link_oracle(double l1, double l2, double theta1, double theta2) {
    const double x = l1 * std::cos(theta1) + l2 * std::cos(theta1 + theta2);
    const double y = l1 * std::sin(theta1) + l2 * std::sin(theta1 + theta2);
    return Vec3(x, y, 0.0);
}

}  // namespace volcap::test
