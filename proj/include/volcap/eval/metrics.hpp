#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "volcap/core/error.hpp"
#include "volcap/core/image.hpp"
#include "volcap/core/types.hpp"
#include "volcap/scene/kinematics.hpp"
#include "volcap/shape/mesh.hpp"

namespace volcap {

struct OverlapReport {
    double precision = 1.0;
    double recall = 1.0;
    std::vector<double> per_frame_precision;
    std::vector<double> per_frame_recall;
};

/// Silhouette overlap. Empty-denominator conventions: 1 when both masks are
/// empty, 0 when only the denominator is.
inline std::pair<double, double> overlap_metrics(const Mask& predicted, const Mask& reference) {
    if (!predicted.same_shape(reference))
        throw InvalidArgumentError("overlap_metrics: mask dimensions differ");
    std::size_t inter = 0, n_pred = 0, n_ref = 0;
    for (std::size_t i = 0; i < predicted.data().size(); ++i) {
        const bool p = predicted.data()[i] != 0, r = reference.data()[i] != 0;
        inter += (p && r);
        n_pred += p;
        n_ref += r;
    }
    auto ratio = [&](std::size_t num, std::size_t den) {
        if (den == 0) return (n_pred == 0 && n_ref == 0) ? 1.0 : 0.0;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    return {ratio(inter, n_pred), ratio(inter, n_ref)};
}

inline std::vector<Vec3> joint_positions(const Skeleton& skel, const PoseVector& pose) {
    const KinematicsCache cache = forward_kinematics(skel, pose);
    std::vector<Vec3> out(skel.joint_count());
    for (int j = 0; j < skel.joint_count(); ++j) out[j] = cache.bones[j].origin;
    return out;
}

/// Mean Euclidean joint position error in millimeters over frames and
/// joints. With offset compensation, a per-joint constant offset measured in
/// the first frame is subtracted from frames after the first.
inline double joint_error_mm(const std::vector<std::vector<Vec3>>& estimated,
                             const std::vector<std::vector<Vec3>>& ground_truth,
                             bool offset_compensation = false) {
    if (estimated.size() != ground_truth.size() || estimated.empty())
        throw InvalidArgumentError("joint_error: frame count mismatch");
    const std::size_t joints = estimated[0].size();
    std::vector<Vec3> offset(joints, Vec3::Zero());
    if (offset_compensation)
        for (std::size_t j = 0; j < joints; ++j)
            offset[j] = estimated[0][j] - ground_truth[0][j];

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < estimated.size(); ++t) {
        if (estimated[t].size() != joints || ground_truth[t].size() != joints)
            throw InvalidArgumentError("joint_error: joint count mismatch");
        const bool compensate = offset_compensation && t > 0;
        for (std::size_t j = 0; j < joints; ++j) {
            const Vec3 est = compensate ? estimated[t][j] - offset[j] : estimated[t][j];
            total += (est - ground_truth[t][j]).norm();
            ++count;
        }
    }
    return 1000.0 * total / static_cast<double>(count);
}

/// Vertical extent of the rest-pose joint positions; the reference scale for
/// percent-of-height error bounds.
inline double skeleton_height(const Skeleton& skel) {
    const auto pos = skel.rest_joint_positions();
    double lo = pos[0].y(), hi = pos[0].y();
    for (const Vec3& p : pos) {
        lo = std::min(lo, p.y());
        hi = std::max(hi, p.y());
    }
    return hi - lo;
}

namespace detail {

struct PlanePoint {
    double a, b;  // in-plane coordinates
};

inline double hull_perimeter(std::vector<PlanePoint> pts) {
    if (pts.size() < 3) return 0.0;
    std::sort(pts.begin(), pts.end(), [](const PlanePoint& p, const PlanePoint& q) {
        return p.a < q.a || (p.a == q.a && p.b < q.b);
    });
    auto cross = [](const PlanePoint& o, const PlanePoint& p, const PlanePoint& q) {
        return (p.a - o.a) * (q.b - o.b) - (p.b - o.b) * (q.a - o.a);
    };
    std::vector<PlanePoint> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : 0);
    double per = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const PlanePoint& p = hull[i];
        const PlanePoint& q = hull[(i + 1) % hull.size()];
        per += std::hypot(p.a - q.a, p.b - q.b);
    }
    return per;
}

}  // namespace detail

/// Circumference (in centimeters) of the mesh slice at the given height
/// along the axis (0=x, 1=y, 2=z): the convex hull perimeter of the
/// intersection component nearest to axis_point (tailor's-tape semantics).
/// Throws InputError when the plane misses the mesh.
inline double circumference_cm(const TriMesh& mesh, double height, int axis = 1,
                               const Vec2& axis_point = Vec2::Zero()) {
    const int a0 = (axis + 1) % 3, a1 = (axis + 2) % 3;
    // Collect intersection segments and group them into connected components
    // by shared (quantized) endpoints.
    std::vector<std::pair<detail::PlanePoint, detail::PlanePoint>> segments;
    for (const auto& tri : mesh.triangles) {
        std::vector<detail::PlanePoint> cut;
        for (int e = 0; e < 3; ++e) {
            const Vec3& p = mesh.vertices[tri[e]];
            const Vec3& q = mesh.vertices[tri[(e + 1) % 3]];
            const double dp = p[axis] - height, dq = q[axis] - height;
            if ((dp > 0) == (dq > 0)) continue;
            if (dp == dq) continue;
            const double t = dp / (dp - dq);
            const Vec3 x = p + t * (q - p);
            cut.push_back({x[a0], x[a1]});
        }
        if (cut.size() == 2) segments.push_back({cut[0], cut[1]});
    }
    if (segments.empty()) throw InputError("circumference: slicing plane misses the mesh");

    // Union-find over quantized endpoints.
    auto key = [](const detail::PlanePoint& p) {
        return std::pair<long long, long long>(std::llround(p.a * 1e7),
                                               std::llround(p.b * 1e7));
    };
    std::map<std::pair<long long, long long>, int> owner;
    std::vector<int> parent(2 * segments.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    auto unite = [&](int i, int j) { parent[find(i)] = find(j); };
    for (std::size_t i = 0; i < segments.size(); ++i) {
        unite(static_cast<int>(2 * i), static_cast<int>(2 * i + 1));
        for (int e = 0; e < 2; ++e) {
            const auto k = key(e == 0 ? segments[i].first : segments[i].second);
            const int id = static_cast<int>(2 * i + e);
            auto [it, inserted] = owner.try_emplace(k, id);
            if (!inserted) unite(id, it->second);
        }
    }
    // Gather components; pick the one whose centroid is nearest axis_point.
    std::map<int, std::vector<detail::PlanePoint>> components;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const int root = find(static_cast<int>(2 * i));
        components[root].push_back(segments[i].first);
        components[root].push_back(segments[i].second);
    }
    double best_dist = std::numeric_limits<double>::max();
    const std::vector<detail::PlanePoint>* best = nullptr;
    for (const auto& [root, pts] : components) {
        double ca = 0, cb = 0;
        for (const auto& p : pts) {
            ca += p.a;
            cb += p.b;
        }
        ca /= pts.size();
        cb /= pts.size();
        const double d = std::hypot(ca - axis_point.x(), cb - axis_point.y());
        if (d < best_dist) {
            best_dist = d;
            best = &pts;
        }
    }
    return 100.0 * detail::hull_perimeter(*best);
}

}  // namespace volcap
