#pragma once

#include <vector>

#include "volcap/core/rng.hpp"
#include "volcap/core/types.hpp"
#include "volcap/scene/actor.hpp"
#include "volcap/shape/mesh.hpp"

namespace volcap {

/// Parameters of the procedural body generator. All values are multipliers
/// relative to the template; the generated meshes share one topology for
/// every parameter choice, so they are in vertex correspondence by
/// construction.
struct BodyParams {
    double height = 1.0;
    double arm_length = 1.0;
    double leg_length = 1.0;
    double torso_girth = 1.0;
    double limb_girth = 1.0;
    double head_size = 1.0;

    static BodyParams sample(Rng& rng) {
        auto clamp = [](double v) { return std::min(1.3, std::max(0.75, v)); };
        BodyParams p;
        p.height = clamp(rng.normal(1.0, 0.06));
        p.arm_length = clamp(rng.normal(1.0, 0.07));
        p.leg_length = clamp(rng.normal(1.0, 0.06));
        p.torso_girth = clamp(rng.normal(1.0, 0.12));
        p.limb_girth = clamp(rng.normal(1.0, 0.10));
        p.head_size = clamp(rng.normal(1.0, 0.08));
        return p;
    }
};

/// 16-joint skeleton, 43 pose parameters (6 root + 37 joint angles).
/// Y is up, the actor faces +z, arms extend along +-x in the rest T-pose.
inline Skeleton make_template_skeleton(const BodyParams& params = {}) {
    auto dof = [](const Vec3& axis, double lo, double hi) { return JointDof{axis, lo, hi}; };
    const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();

    std::vector<Joint> joints(16);
    VecX len(16);
    auto set = [&](int j, const char* name, int parent, const Vec3& dir, double length,
                   std::vector<JointDof> dofs) {
        joints[j].name = name;
        joints[j].parent = parent;
        joints[j].offset_dir = dir;
        joints[j].dofs = std::move(dofs);
        len[j] = length;
    };

    const double h = params.height;
    const double arm = params.arm_length * h;
    const double leg = params.leg_length * h;

    set(0, "pelvis", -1, Vec3::Zero(), 0.0, {});
    set(1, "spine", 0, Y, 0.22 * h,
        {dof(X, -0.5, 0.5), dof(Y, -0.5, 0.5), dof(Z, -0.4, 0.4)});
    set(2, "neck", 1, Y, 0.30 * h,
        {dof(X, -0.5, 0.5), dof(Y, -0.6, 0.6), dof(Z, -0.4, 0.4)});
    set(3, "head", 2, Y, 0.09 * h * params.head_size,
        {dof(X, -0.7, 0.7), dof(Y, -1.0, 1.0), dof(Z, -0.6, 0.6)});
    set(4, "l_shoulder", 2, X, 0.19 * h,
        {dof(Z, -1.2, 1.6), dof(Y, -1.4, 1.2), dof(X, -1.5, 1.5)});
    set(5, "l_elbow", 4, X, 0.30 * arm, {dof(Z, -0.05, 2.5), dof(Y, -1.4, 1.4)});
    set(6, "l_wrist", 5, X, 0.26 * arm, {dof(Z, -0.7, 0.7), dof(Y, -0.7, 0.7)});
    set(7, "r_shoulder", 2, -X, 0.19 * h,
        {dof(Z, -1.6, 1.2), dof(Y, -1.2, 1.4), dof(X, -1.5, 1.5)});
    set(8, "r_elbow", 7, -X, 0.30 * arm, {dof(Z, -2.5, 0.05), dof(Y, -1.4, 1.4)});
    set(9, "r_wrist", 8, -X, 0.26 * arm, {dof(Z, -0.7, 0.7), dof(Y, -0.7, 0.7)});
    set(10, "l_hip", 0, X, 0.11 * h,
        {dof(X, -2.0, 0.5), dof(Y, -0.8, 0.8), dof(Z, -0.5, 1.2)});
    set(11, "l_knee", 10, -Y, 0.44 * leg, {dof(X, -0.05, 2.4), dof(Y, -0.4, 0.4)});
    set(12, "l_ankle", 11, -Y, 0.43 * leg, {dof(X, -0.8, 0.8), dof(Y, -0.5, 0.5)});
    set(13, "r_hip", 0, -X, 0.11 * h,
        {dof(X, -2.0, 0.5), dof(Y, -0.8, 0.8), dof(Z, -1.2, 0.5)});
    set(14, "r_knee", 13, -Y, 0.44 * leg, {dof(X, -0.05, 2.4), dof(Y, -0.4, 0.4)});
    set(15, "r_ankle", 14, -Y, 0.43 * leg, {dof(X, -0.8, 0.8), dof(Y, -0.5, 0.5)});

    const double pelvis_height = (0.44 + 0.43) * leg + 0.13 * h;
    Skeleton skel(std::move(joints), std::move(len), Vec3(0.0, pelvis_height, 0.0));
    skel.torso_joints = {0, 1, 2, 3, 4, 7, 10, 13};
    skel.limb_joints = {5, 6, 8, 9, 11, 12, 14, 15};
    return skel;
}

/// The 91 template blobs. Positions are bone-local; densities are uniform
/// and high enough that the body absorbs most light, so a sharp visibility
/// gradient forms at the template surface.
inline std::vector<GaussianBlob> make_template_gaussians() {
    std::vector<GaussianBlob> blobs;
    blobs.reserve(91);
    auto chain = [&](int bone, const Vec3& from, const Vec3& to, int n, double sigma) {
        for (int i = 0; i < n; ++i) {
            const double t = (n == 1) ? 0.5 : static_cast<double>(i) / (n - 1);
            GaussianBlob g;
            g.mean_local = from + t * (to - from);
            g.std_dev = sigma;
            g.density = 5.0;
            g.bone_id = bone;
            blobs.push_back(g);
        }
    };

    // pelvis block (12)
    chain(0, {0, 0.16, 0}, {0, -0.04, 0}, 4, 0.105);
    chain(0, {0.07, 0.14, 0}, {0.07, -0.03, 0}, 4, 0.085);
    chain(0, {-0.07, 0.14, 0}, {-0.07, -0.03, 0}, 4, 0.085);
    // chest block (12)
    chain(1, {0, 0.04, 0}, {0, 0.27, 0}, 4, 0.105);
    chain(1, {0.07, 0.05, 0}, {0.07, 0.26, 0}, 4, 0.085);
    chain(1, {-0.07, 0.05, 0}, {-0.07, 0.26, 0}, 4, 0.085);
    // neck (3)
    chain(2, {0, 0.0, 0}, {0, 0.08, 0}, 3, 0.05);
    // head (6); the nose blob breaks the head's rotational symmetry
    chain(3, {0, 0.02, 0}, {0, 0.10, 0}, 3, 0.075);
    chain(3, {0.035, 0.06, 0}, {-0.035, 0.06, 0}, 2, 0.065);
    chain(3, {0, 0.05, 0.075}, {0, 0.05, 0.075}, 1, 0.045);
    // arms (6 + 4 + 2 per side); thumb blobs sit off the forearm axis
    for (double sx : {1.0, -1.0}) {
        const int sh = sx > 0 ? 4 : 7, el = sx > 0 ? 5 : 8, wr = sx > 0 ? 6 : 9;
        chain(sh, {0.02 * sx, 0, 0}, {0.28 * sx, 0, 0}, 6, 0.050);
        chain(el, {0.03 * sx, 0, 0}, {0.24 * sx, 0, 0}, 4, 0.042);
        chain(wr, {0.05 * sx, 0, 0}, {0.05 * sx, 0, 0}, 1, 0.038);
        chain(wr, {0.10 * sx, 0, 0.035}, {0.10 * sx, 0, 0.035}, 1, 0.032);
    }
    // legs (8 + 6 + 3 per side)
    for (double sx : {1.0, -1.0}) {
        const int hip = sx > 0 ? 10 : 13, knee = sx > 0 ? 11 : 14, ank = sx > 0 ? 12 : 15;
        chain(hip, {0, -0.04, 0}, {0, -0.42, 0}, 8, 0.068);
        chain(knee, {0, -0.04, 0}, {0, -0.40, 0}, 6, 0.052);
        chain(ank, {0, -0.06, 0.03}, {0, -0.09, 0.20}, 3, 0.042);
    }
    return blobs;
}

inline ActorModel make_template_model(const BodyParams& params = {}) {
    ActorModel model;
    model.skeleton = make_template_skeleton(params);
    model.gaussians = make_template_gaussians();
    return model;
}

namespace detail {

inline void tube(TriMesh& mesh, const std::vector<Vec3>& centers,
                 const std::vector<double>& radii, const Vec3& axis_hint, bool cap_start,
                 bool cap_end) {
    const int sides = 12;
    const int rings = static_cast<int>(centers.size());
    // Stable frame perpendicular to the tube direction.
    const Vec3 dir = (centers.back() - centers.front()).normalized();
    Vec3 u = axis_hint - axis_hint.dot(dir) * dir;
    if (u.norm() < 1e-9) u = std::abs(dir.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    u.normalize();
    const Vec3 v = dir.cross(u).normalized();

    const int base = mesh.vertex_count();
    for (int r = 0; r < rings; ++r)
        for (int s = 0; s < sides; ++s) {
            const double a = 2.0 * kPi * s / sides;
            mesh.vertices.push_back(centers[r] + radii[r] * (std::cos(a) * u + std::sin(a) * v));
        }
    for (int r = 0; r + 1 < rings; ++r)
        for (int s = 0; s < sides; ++s) {
            const int s2 = (s + 1) % sides;
            const int a = base + r * sides + s, b = base + r * sides + s2;
            const int c = base + (r + 1) * sides + s, d = base + (r + 1) * sides + s2;
            mesh.triangles.push_back({a, c, b});
            mesh.triangles.push_back({b, c, d});
        }
    if (cap_start) {
        const int center = mesh.vertex_count();
        mesh.vertices.push_back(centers.front());
        for (int s = 0; s < sides; ++s)
            mesh.triangles.push_back({center, base + s, base + (s + 1) % sides});
    }
    if (cap_end) {
        const int center = mesh.vertex_count();
        mesh.vertices.push_back(centers.back());
        const int last = base + (rings - 1) * sides;
        for (int s = 0; s < sides; ++s)
            mesh.triangles.push_back({center, last + (s + 1) % sides, last + s});
    }
}

inline std::vector<Vec3> lerp_centers(const Vec3& a, const Vec3& b, int n) {
    std::vector<Vec3> c(n);
    for (int i = 0; i < n; ++i) c[i] = a + (b - a) * (static_cast<double>(i) / (n - 1));
    return c;
}

}  // namespace detail

/// Procedural body mesh in the rest T-pose. Same vertex/triangle layout for
/// all parameter values.
inline TriMesh make_body_mesh(const BodyParams& params = {}) {
    const Skeleton skel = make_template_skeleton(params);
    const auto pos = skel.rest_joint_positions();
    const double tg = params.torso_girth, lg = params.limb_girth, hs = params.head_size;
    TriMesh mesh;

    // Torso: pelvis bottom to neck, 8 rings with an hourglass profile.
    {
        const Vec3 lo = pos[0] - Vec3(0, 0.12 * params.height, 0);
        const Vec3 hi = pos[2];
        const double profile[8] = {0.130, 0.148, 0.140, 0.126, 0.124, 0.136, 0.146, 0.132};
        std::vector<Vec3> centers = detail::lerp_centers(lo, hi, 8);
        std::vector<double> radii(8);
        for (int i = 0; i < 8; ++i) radii[i] = profile[i] * tg;
        detail::tube(mesh, centers, radii, Vec3::UnitX(), true, false);
    }
    // Neck.
    detail::tube(mesh, detail::lerp_centers(pos[2], pos[3], 2), {0.055 * hs, 0.055 * hs},
                 Vec3::UnitX(), false, false);
    // Head: rounded profile up to the crown.
    {
        const Vec3 top = pos[3] + Vec3(0, 0.16 * params.height * hs, 0);
        std::vector<Vec3> centers = detail::lerp_centers(pos[3], top, 5);
        std::vector<double> radii(5);
        const double profile[5] = {0.060, 0.082, 0.088, 0.075, 0.040};
        for (int i = 0; i < 5; ++i) radii[i] = profile[i] * hs;
        detail::tube(mesh, centers, radii, Vec3::UnitX(), false, true);
    }
    // Arms.
    for (int side = 0; side < 2; ++side) {
        const int sh = side == 0 ? 4 : 7, el = side == 0 ? 5 : 8, wr = side == 0 ? 6 : 9;
        const Vec3 dir = (pos[el] - pos[sh]).normalized();
        detail::tube(mesh, detail::lerp_centers(pos[sh], pos[el], 4),
                     {0.052 * lg, 0.050 * lg, 0.047 * lg, 0.045 * lg}, Vec3::UnitY(), true,
                     false);
        detail::tube(mesh, detail::lerp_centers(pos[el], pos[wr], 3),
                     {0.042 * lg, 0.039 * lg, 0.035 * lg}, Vec3::UnitY(), false, false);
        const Vec3 tip = pos[wr] + dir * 0.17 * params.arm_length;
        detail::tube(mesh, detail::lerp_centers(pos[wr], tip, 2), {0.035 * lg, 0.020 * lg},
                     Vec3::UnitY(), false, true);
    }
    // Legs.
    for (int side = 0; side < 2; ++side) {
        const int hip = side == 0 ? 10 : 13, knee = side == 0 ? 11 : 14,
                  ank = side == 0 ? 12 : 15;
        detail::tube(mesh, detail::lerp_centers(pos[hip], pos[knee], 5),
                     {0.085 * lg, 0.077 * lg, 0.068 * lg, 0.062 * lg, 0.058 * lg},
                     Vec3::UnitX(), true, false);
        detail::tube(mesh, detail::lerp_centers(pos[knee], pos[ank], 4),
                     {0.055 * lg, 0.050 * lg, 0.045 * lg, 0.040 * lg}, Vec3::UnitX(), false,
                     false);
        const Vec3 heel = pos[ank] - Vec3(0, 0.05 * params.height, -0.02);
        const Vec3 toe = heel + Vec3(0, -0.02, 0.20 * params.height);
        detail::tube(mesh, detail::lerp_centers(heel, toe, 2), {0.040 * lg, 0.030 * lg},
                     Vec3::UnitX(), true, true);
    }
    return mesh;
}

}  // namespace volcap
