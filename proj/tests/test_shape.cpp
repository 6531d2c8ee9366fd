#include <catch2/catch_amalgamated.hpp>

#include "support/test_utils.hpp"
#include "volcap/scene/actor.hpp"
#include "volcap/shape/procedural.hpp"
#include "volcap/shape/procrustes.hpp"
#include "volcap/shape/registration.hpp"
#include "volcap/shape/shape_space.hpp"
#include "volcap/shape/skinning.hpp"

using namespace volcap;

namespace {

struct RestModel {
    TriMesh mesh;
    std::vector<Vec3> means;
    std::vector<double> sigmas;
    std::vector<double> densities;
    ActorModel model;
};

RestModel rest_template(const BodyParams& params = {}) {
    RestModel r;
    r.model = make_template_model(params);
    r.mesh = make_body_mesh(params);
    const PosedGaussians posed = pose_gaussians(r.model, PoseVector::zero(r.model.skeleton));
    r.means = posed.means_world;
    r.sigmas = posed.std_devs;
    r.densities = posed.densities;
    return r;
}

Similarity random_similarity(Rng& rng) {
    Similarity sim;
    sim.scale = rng.uniform(0.5, 2.0);
    sim.rotation = Eigen::AngleAxisd(rng.uniform(-kPi, kPi), rng.unit_vector()).toRotationMatrix();
    sim.translation = Vec3(rng.normal(), rng.normal(), rng.normal());
    return sim;
}

}  // namespace

TEST_CASE("density weights: vertex at the only gaussian's mean", "[shape]") {
    TriMesh mesh;
    mesh.vertices = {Vec3(0.2, 0.3, 0.4)};
    std::vector<Vec3> means = {Vec3(0.2, 0.3, 0.4)};
    std::vector<double> sigmas = {0.1}, densities = {1.0};
    const SkinningWeights w = density_weights(mesh, means, sigmas, densities);
    REQUIRE(w.per_vertex[0].size() == 1);
    CHECK(w.per_vertex[0][0].weight == 1.0);
}

TEST_CASE("density weights: equidistant identical gaussians split evenly", "[shape]") {
    TriMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0)};
    std::vector<Vec3> means = {Vec3(-0.1, 0, 0), Vec3(0.1, 0, 0)};
    std::vector<double> sigmas = {0.08, 0.08}, densities = {1.0, 1.0};
    const SkinningWeights w = density_weights(mesh, means, sigmas, densities);
    REQUIRE(w.per_vertex[0].size() == 2);
    CHECK(w.per_vertex[0][0].weight == Catch::Approx(0.5).margin(1e-15));
    CHECK(w.per_vertex[0][1].weight == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("density weights match the direct density-ratio oracle", "[shape]") {
    Rng rng(3);
    TriMesh mesh;
    mesh.vertices = {Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.05};
    std::vector<Vec3> means;
    std::vector<double> sigmas, densities;
    for (int q = 0; q < 3; ++q) {
        means.push_back(Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.05);
        sigmas.push_back(rng.uniform(0.05, 0.2));
        densities.push_back(rng.uniform(0.5, 2.0));
    }
    const SkinningWeights w = density_weights(mesh, means, sigmas, densities);
    double total = 0.0;
    std::vector<double> direct(3);
    for (int q = 0; q < 3; ++q) {
        direct[q] = densities[q] *
                    std::exp(-(mesh.vertices[0] - means[q]).squaredNorm() /
                             (2.0 * sigmas[q] * sigmas[q]));
        total += direct[q];
    }
    REQUIRE(w.per_vertex[0].size() == 3);
    for (const auto& e : w.per_vertex[0])
        CHECK(e.weight == Catch::Approx(direct[e.gaussian] / total).margin(1e-12));
}

TEST_CASE("density weights fall back to the nearest gaussian on underflow", "[shape]") {
    TriMesh mesh;
    mesh.vertices = {Vec3(1e6, 0, 0)};
    std::vector<Vec3> means = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    std::vector<double> sigmas = {0.1, 0.1}, densities = {1.0, 1.0};
    std::vector<std::string> warnings;
    const SkinningWeights w = density_weights(mesh, means, sigmas, densities, 1e-6, &warnings);
    REQUIRE(w.per_vertex[0].size() == 1);
    CHECK(w.per_vertex[0][0].gaussian == 1);
    CHECK(w.per_vertex[0][0].weight == 1.0);
    CHECK(w.fallback_vertices == std::vector<int>{0});
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("procrustes: identity on equal point sets", "[shape]") {
    Rng rng(5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 6; ++i) pts.push_back(Vec3(rng.normal(), rng.normal(), rng.normal()));
    const Similarity sim = weighted_procrustes(pts, pts, {});
    CHECK(sim.scale == Catch::Approx(1.0).margin(1e-12));
    CHECK(sim.rotation.isApprox(Mat3::Identity(), 1e-12));
    CHECK(sim.translation.norm() < 1e-12);
}

TEST_CASE("procrustes: exact scale + translation recovery", "[shape]") {
    Rng rng(6);
    std::vector<Vec3> src, dst;
    for (int i = 0; i < 8; ++i) {
        src.push_back(Vec3(rng.normal(), rng.normal(), rng.normal()));
        dst.push_back(2.0 * src.back() + Vec3(1, 2, 3));
    }
    const Similarity sim = weighted_procrustes(src, dst, {});
    CHECK(sim.scale == Catch::Approx(2.0).margin(1e-10));
    CHECK(sim.rotation.isApprox(Mat3::Identity(), 1e-10));
    CHECK((sim.translation - Vec3(1, 2, 3)).norm() < 1e-10);
}

TEST_CASE("procrustes: generate-and-recover with weights", "[shape]") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const Similarity truth = random_similarity(rng);
        std::vector<Vec3> src, dst;
        std::vector<double> w;
        for (int i = 0; i < 10; ++i) {
            src.push_back(Vec3(rng.normal(), rng.normal(), rng.normal()));
            dst.push_back(truth.apply(src.back()));
            w.push_back(rng.uniform(0.1, 3.0));
        }
        const Similarity sim = weighted_procrustes(src, dst, w);
        CHECK(std::abs(sim.scale - truth.scale) < 1e-8);
        CHECK((sim.rotation - truth.rotation).norm() < 1e-8);
        CHECK((sim.translation - truth.translation).norm() < 1e-8);
    }
}

TEST_CASE("procrustes rejects degenerate point sets", "[shape]") {
    std::vector<Vec3> line = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)};
    CHECK_THROWS_AS(weighted_procrustes(line, line, {}), NumericalError);
    std::vector<Vec3> point(4, Vec3(1, 1, 1));
    CHECK_THROWS_AS(weighted_procrustes(point, point, {}), NumericalError);
    std::vector<Vec3> two = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    CHECK_THROWS_AS(weighted_procrustes(two, two, {}), NumericalError);
}

TEST_CASE("register_instance is the identity on the reference", "[shape]") {
    const RestModel ref = rest_template();
    const RegisteredInstance reg =
        register_instance(ref.means, ref.sigmas, ref.densities, ref.mesh, ref.mesh);
    for (std::size_t q = 0; q < ref.means.size(); ++q) {
        CHECK((reg.means[q] - ref.means[q]).norm() < 1e-9);
        CHECK(std::abs(reg.sigmas[q] - ref.sigmas[q]) < 1e-9);
    }
}

TEST_CASE("register_instance recovers a global similarity", "[shape]") {
    const RestModel ref = rest_template();
    TriMesh scaled = ref.mesh;
    for (Vec3& v : scaled.vertices) v *= 1.5;
    const RegisteredInstance reg =
        register_instance(ref.means, ref.sigmas, ref.densities, ref.mesh, scaled);
    for (std::size_t q = 0; q < ref.means.size(); ++q) {
        CHECK((reg.means[q] - 1.5 * ref.means[q]).norm() < 1e-6);
        CHECK(reg.sigmas[q] == Catch::Approx(1.5 * ref.sigmas[q]).margin(1e-8));
    }
}

TEST_CASE("register_instance: widened torso leaves distal limbs alone", "[shape]") {
    const RestModel ref = rest_template();
    BodyParams wide;
    wide.torso_girth = 1.25;
    const TriMesh instance = make_body_mesh(wide);
    const RegisteredInstance reg =
        register_instance(ref.means, ref.sigmas, ref.densities, ref.mesh, instance);

    double torso_growth = 0.0;
    for (std::size_t q = 0; q < ref.means.size(); ++q) {
        const int bone = ref.model.gaussians[q].bone_id;
        const bool distal_limb = bone == 5 || bone == 6 || bone == 8 || bone == 9 ||
                                 bone == 11 || bone == 12 || bone == 14 || bone == 15;
        if (bone == 0 || bone == 1)  // torso blobs
            torso_growth = std::max(torso_growth, reg.sigmas[q] / ref.sigmas[q]);
        if (distal_limb) {
            CHECK((reg.means[q] - ref.means[q]).norm() < 1e-6);
            CHECK(std::abs(reg.sigmas[q] - ref.sigmas[q]) < 1e-6);
        }
    }
    CHECK(torso_growth > 1.05);
}

TEST_CASE("register_skeleton identity and global scaling", "[shape]") {
    const RestModel ref = rest_template();
    const Skeleton& skel = ref.model.skeleton;

    const RegisteredSkeleton same = register_skeleton(skel, ref.mesh, ref.mesh);
    for (int j = 0; j < skel.joint_count(); ++j)
        CHECK(std::abs(same.bone_lengths[j] - skel.bone_length(j)) < 1e-9);

    TriMesh scaled = ref.mesh;
    for (Vec3& v : scaled.vertices) v *= 1.2;
    const RegisteredSkeleton big = register_skeleton(skel, ref.mesh, scaled);
    for (int j = 0; j < skel.joint_count(); ++j)
        CHECK(std::abs(big.bone_lengths[j] - 1.2 * skel.bone_length(j)) < 1e-6);
}

TEST_CASE("register_skeleton: longer arms leave legs constant", "[shape]") {
    const RestModel ref = rest_template();
    BodyParams long_arms;
    long_arms.arm_length = 1.2;
    const TriMesh instance = make_body_mesh(long_arms);
    const RegisteredSkeleton reg = register_skeleton(ref.model.skeleton, ref.mesh, instance);

    const Skeleton& skel = ref.model.skeleton;
    for (int j : {5, 6, 8, 9})  // elbows, wrists
        CHECK(reg.bone_lengths[j] > 1.1 * skel.bone_length(j));
    for (int j : {11, 12, 14, 15})  // knees, ankles
        CHECK(std::abs(reg.bone_lengths[j] - skel.bone_length(j)) < 1e-3);
}

TEST_CASE("shape space from two instances", "[shape]") {
    Rng rng(9);
    const int q_count = 4, bones = 3;
    VecX a(5 * q_count + bones), b(5 * q_count + bones);
    for (int i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    const ShapeSpace space = ShapeSpace::build({a, b}, q_count, bones, 10);
    CHECK(space.dim == 1);
    CHECK((space.mean - 0.5 * (a + b)).norm() < 1e-12);
    const VecX diff = (b - a).normalized();
    CHECK(std::abs(std::abs(space.basis.col(0).dot(diff)) - 1.0) < 1e-12);
}

TEST_CASE("shape space basis is orthonormal and reconstructs training data", "[shape]") {
    Rng rng(10);
    const int q_count = 6, bones = 4;
    std::vector<VecX> instances;
    for (int i = 0; i < 12; ++i) {
        VecX x(5 * q_count + bones);
        for (int k = 0; k < x.size(); ++k) x[k] = rng.normal();
        instances.push_back(x);
    }
    const ShapeSpace space = ShapeSpace::build(instances, q_count, bones, 11);
    CHECK(space.dim == 11);
    const MatX gram = space.basis.transpose() * space.basis;
    CHECK((gram - MatX::Identity(space.dim, space.dim)).cwiseAbs().maxCoeff() < 1e-10);
    for (const VecX& x : instances) {
        const VecX s = space.project(x);
        CHECK((space.evaluate_stacked(s) - x).cwiseAbs().maxCoeff() < 1e-8);
        for (int k = 0; k < space.dim; ++k) CHECK(std::abs(s[k]) <= space.coeff_bounds[k] + 1e-12);
    }
}

TEST_CASE("shape space: one dominant mode captures the variance", "[shape]") {
    Rng rng(11);
    const int q_count = 5, bones = 2;
    const int d = 5 * q_count + bones;
    VecX base(d), mode(d);
    for (int k = 0; k < d; ++k) {
        base[k] = rng.normal();
        mode[k] = rng.normal();
    }
    mode.normalize();
    std::vector<VecX> instances;
    for (int i = 0; i < 20; ++i) {
        VecX noise(d);
        for (int k = 0; k < d; ++k) noise[k] = 1e-3 * rng.normal();
        instances.push_back(base + rng.normal() * mode + noise);
    }
    const ShapeSpace space = ShapeSpace::build(instances, q_count, bones, 5);
    double var_first = 0.0, var_total = 0.0;
    for (const VecX& x : instances) {
        const VecX c = x - space.mean;
        var_total += c.squaredNorm();
        var_first += std::pow(space.basis.col(0).dot(c), 2);
    }
    CHECK(var_first / var_total >= 0.99);
}

TEST_CASE("shape space dim truncation warns", "[shape]") {
    Rng rng(12);
    std::vector<VecX> instances;
    for (int i = 0; i < 3; ++i) {
        VecX x(5 * 2 + 2);
        for (int k = 0; k < x.size(); ++k) x[k] = rng.normal();
        instances.push_back(x);
    }
    std::vector<std::string> warnings;
    const ShapeSpace space = ShapeSpace::build(instances, 2, 2, 50, &warnings);
    CHECK(space.dim == 2);
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("evaluate_shape at zero gives the mean; derivative is the basis", "[shape]") {
    Rng rng(13);
    const int q_count = 3, bones = 2;
    std::vector<VecX> instances;
    for (int i = 0; i < 8; ++i) {
        VecX x = VecX::Ones(5 * q_count + bones);  // keep sigmas positive
        for (int k = 0; k < x.size(); ++k) x[k] += 0.1 * rng.normal();
        instances.push_back(x);
    }
    const ShapeSpace space = ShapeSpace::build(instances, q_count, bones, 4);

    const StackedShape at_zero = space.evaluate(VecX::Zero(space.dim));
    const VecX restacked = ShapeSpace::stack(at_zero.gauss_means, at_zero.sigmas,
                                             at_zero.densities, at_zero.bone_lengths);
    CHECK((restacked - space.mean).cwiseAbs().maxCoeff() < 1e-12);

    // Linearity: finite differences along coefficients equal basis columns.
    for (int k = 0; k < space.dim; ++k) {
        VecX s = VecX::Zero(space.dim);
        s[k] = 0.25;
        const VecX hi = space.evaluate_stacked(s);
        s[k] = -0.25;
        const VecX lo = space.evaluate_stacked(s);
        CHECK(((hi - lo) / 0.5 - space.basis.col(k)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("evaluate_shape clamps non-physical sigma with a warning", "[shape]") {
    ShapeSpace space;
    space.gaussian_count = 1;
    space.bone_count = 1;
    space.dim = 1;
    space.mean = VecX::Zero(6);
    space.mean[3] = 0.05;  // sigma slot
    space.basis = MatX::Zero(6, 1);
    space.basis(3, 0) = 1.0;
    space.coeff_bounds = VecX::Ones(1);
    std::vector<std::string> warnings;
    VecX s(1);
    s << -1.0;
    const StackedShape shape = space.evaluate(s, &warnings);
    CHECK(shape.sigmas[0] == 1e-4);
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("skinning: identity transforms reproduce the reference", "[shape]") {
    const RestModel ref = rest_template();
    const SkinningWeights w = density_weights(ref.mesh, ref.means, ref.sigmas, ref.densities);
    std::vector<Similarity> identity(ref.means.size());
    const TriMesh skinned = skin_mesh(ref.mesh, w, identity);
    for (std::size_t v = 0; v < ref.mesh.vertices.size(); ++v)
        CHECK((skinned.vertices[v] - ref.mesh.vertices[v]).norm() < 1e-12);
}

TEST_CASE("skinning: common rigid transform moves the mesh rigidly", "[shape]") {
    const RestModel ref = rest_template();
    const SkinningWeights w = density_weights(ref.mesh, ref.means, ref.sigmas, ref.densities);
    Similarity rigid;
    rigid.rotation = Eigen::AngleAxisd(0.6, Vec3(0, 1, 0)).toRotationMatrix();
    rigid.translation = Vec3(0.1, -0.2, 0.4);
    std::vector<Similarity> transforms(ref.means.size(), rigid);
    const TriMesh skinned = skin_mesh(ref.mesh, w, transforms);
    for (std::size_t v = 0; v < ref.mesh.vertices.size(); ++v)
        CHECK((skinned.vertices[v] - rigid.apply(ref.mesh.vertices[v])).norm() < 1e-12);
}

TEST_CASE("skinning partition of unity implies translation invariance", "[shape]") {
    const RestModel ref = rest_template();
    const SkinningWeights w = density_weights(ref.mesh, ref.means, ref.sigmas, ref.densities);
    const Vec3 t(0.3, 0.1, -0.2);
    std::vector<Similarity> transforms(ref.means.size());
    for (auto& sim : transforms) sim.translation = t;
    const TriMesh skinned = skin_mesh(ref.mesh, w, transforms);
    for (std::size_t v = 0; v < ref.mesh.vertices.size(); ++v)
        CHECK((skinned.vertices[v] - (ref.mesh.vertices[v] + t)).norm() < 1e-12);
}

TEST_CASE("skinning matches the direct weighted-blend oracle on a posed chain", "[shape]") {
    ActorModel model;
    model.skeleton = test::two_link_chain(0.5);
    GaussianBlob g0, g1;
    g0.mean_local = Vec3(0.25, 0, 0);
    g0.std_dev = 0.1;
    g0.bone_id = 0;
    g1.mean_local = Vec3(0.25, 0, 0);
    g1.std_dev = 0.1;
    g1.bone_id = 1;
    model.gaussians = {g0, g1};

    TriMesh mesh;
    mesh.vertices = {Vec3(0.7, 0.02, 0), Vec3(0.25, -0.03, 0), Vec3(0.5, 0.05, 0)};

    const PosedGaussians rest = pose_gaussians(model, PoseVector::zero(model.skeleton));
    const SkinningWeights w =
        density_weights(mesh, rest.means_world, rest.std_devs, rest.densities);

    PoseVector pose = PoseVector::zero(model.skeleton);
    pose.params[6] = kPi / 3.0;
    const KinematicsCache cache = forward_kinematics(model.skeleton, pose);
    const PosedGaussians posed = pose_gaussians(model, pose);
    std::vector<Mat3> rotations = {cache.bones[0].rotation, cache.bones[1].rotation};
    const std::vector<Similarity> transforms = gaussian_pose_transforms(
        rest.means_world, rest.std_devs, posed.means_world, posed.std_devs, rotations);

    const TriMesh skinned = skin_mesh(mesh, w, transforms);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        Vec3 oracle = Vec3::Zero();
        for (const auto& e : w.per_vertex[v])
            oracle += e.weight * transforms[e.gaussian].apply(mesh.vertices[v]);
        CHECK((skinned.vertices[v] - oracle).norm() < 1e-12);
    }
    // The vertex on bone 0's blob barely moves; the one near the far end of
    // bone 1 follows bone 1's transform.
    const Vec3 follows = transforms[1].apply(mesh.vertices[0]);
    CHECK((skinned.vertices[0] - follows).norm() < 0.02);
}
