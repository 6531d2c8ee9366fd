#include <catch2/catch_amalgamated.hpp>

#include "support/test_utils.hpp"
#include "volcap/scene/actor.hpp"
#include "volcap/scene/kinematics.hpp"
#include "volcap/shape/procedural.hpp"

using namespace volcap;

namespace {

ActorModel two_link_actor(double l1, double l2) {
    ActorModel model;
    model.skeleton = test::two_link_chain(l1);
    GaussianBlob tip;
    tip.mean_local = Vec3(l2, 0, 0);
    tip.std_dev = 0.05;
    tip.density = 1.0;
    tip.bone_id = 1;
    model.gaussians = {tip};
    return model;
}

}  // namespace

TEST_CASE("forward kinematics identity pose reproduces rest transforms", "[kinematics]") {
    const Skeleton skel = make_template_skeleton();
    const KinematicsCache cache = forward_kinematics(skel, PoseVector::zero(skel));
    const auto rest = skel.rest_joint_positions();
    for (int j = 0; j < skel.joint_count(); ++j) {
        CHECK(cache.bones[j].rotation.isApprox(Mat3::Identity(), 1e-14));
        CHECK((cache.bones[j].origin - rest[j]).norm() < 1e-14);
    }
}

TEST_CASE("forward kinematics root translation shifts every bone", "[kinematics]") {
    const Skeleton skel = make_template_skeleton();
    PoseVector pose = PoseVector::zero(skel);
    pose.params[0] = 1.0;
    const KinematicsCache cache = forward_kinematics(skel, pose);
    const auto rest = skel.rest_joint_positions();
    for (int j = 0; j < skel.joint_count(); ++j) {
        CHECK(cache.bones[j].rotation.isApprox(Mat3::Identity(), 1e-14));
        CHECK((cache.bones[j].origin - (rest[j] + Vec3(1, 0, 0))).norm() < 1e-14);
    }
}

TEST_CASE("two-link tip matches the planar oracle", "[kinematics]") {
    const double l1 = 0.6, l2 = 0.4;
    const ActorModel model = two_link_actor(l1, l2);
    PoseVector pose = PoseVector::zero(model.skeleton);

    SECTION("90 degree elbow") {
        pose.params[6] = kPi / 2.0;
        const PosedGaussians posed = pose_gaussians(model, pose);
        CHECK((posed.means_world[0] - test::two_link_oracle(l1, l2, 0.0, kPi / 2.0)).norm() <
              1e-12);
    }
    SECTION("random angles") {
        Rng rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const double t1 = rng.uniform(-kPi, kPi);
            const double t2 = rng.uniform(-kPi, kPi);
            pose.params.setZero();
            pose.params[5] = t1;
            pose.params[6] = t2;
            const PosedGaussians posed = pose_gaussians(model, pose);
            CHECK((posed.means_world[0] - test::two_link_oracle(l1, l2, t1, t2)).norm() < 1e-12);
        }
    }
}

TEST_CASE("pose_gaussians copies sigma and density unchanged", "[kinematics]") {
    const ActorModel model = make_template_model();
    Rng rng(11);
    PoseVector pose = PoseVector::zero(model.skeleton);
    for (int k = 0; k < pose.params.size(); ++k) pose.params[k] = rng.uniform(-0.3, 0.3);
    const PosedGaussians posed = pose_gaussians(model, pose);
    REQUIRE(posed.size() == model.gaussians.size());
    for (std::size_t q = 0; q < posed.size(); ++q) {
        CHECK(posed.std_devs[q] == model.gaussians[q].std_dev);
        CHECK(posed.densities[q] == model.gaussians[q].density);
    }
}

TEST_CASE("pose_gaussians pure root translation shifts all means", "[kinematics]") {
    const ActorModel model = make_template_model();
    const Vec3 t(0.3, -0.1, 0.7);
    PoseVector pose = PoseVector::zero(model.skeleton);
    pose.params.head<3>() = t;
    const PosedGaussians rest = pose_gaussians(model, PoseVector::zero(model.skeleton));
    const PosedGaussians moved = pose_gaussians(model, pose);
    for (std::size_t q = 0; q < rest.size(); ++q)
        CHECK((moved.means_world[q] - (rest.means_world[q] + t)).norm() < 1e-14);
}

TEST_CASE("pose_gaussians rejects invalid bone references", "[kinematics]") {
    ActorModel model = two_link_actor(0.5, 0.3);
    model.gaussians[0].bone_id = 9;
    CHECK_THROWS_AS(pose_gaussians(model, PoseVector::zero(model.skeleton)),
                    InvalidArgumentError);
}

TEST_CASE("forward kinematics rejects dimension mismatch", "[kinematics]") {
    const Skeleton skel = make_template_skeleton();
    CHECK_THROWS_AS(forward_kinematics(skel, PoseVector(VecX::Zero(7))), InvalidArgumentError);
}

TEST_CASE("rigidity: intra-bone distances are pose invariant", "[kinematics]") {
    const ActorModel model = make_template_model();
    Rng rng(23);
    const PosedGaussians rest = pose_gaussians(model, PoseVector::zero(model.skeleton));
    for (int trial = 0; trial < 10; ++trial) {
        PoseVector pose = PoseVector::zero(model.skeleton);
        for (int k = 0; k < pose.params.size(); ++k) pose.params[k] = rng.uniform(-0.8, 0.8);
        const PosedGaussians posed = pose_gaussians(model, pose);
        for (std::size_t a = 0; a < posed.size(); ++a)
            for (std::size_t b = a + 1; b < posed.size(); ++b) {
                if (model.gaussians[a].bone_id != model.gaussians[b].bone_id) continue;
                const double d0 = (rest.means_world[a] - rest.means_world[b]).norm();
                const double d1 = (posed.means_world[a] - posed.means_world[b]).norm();
                REQUIRE(std::abs(d0 - d1) < 1e-12);
            }
    }
}

TEST_CASE("FK composition: identity after pose equals pose", "[kinematics]") {
    const Skeleton skel = make_template_skeleton();
    Rng rng(5);
    PoseVector pose = PoseVector::zero(skel);
    for (int k = 0; k < pose.params.size(); ++k) pose.params[k] = rng.uniform(-0.5, 0.5);
    const KinematicsCache once = forward_kinematics(skel, pose);
    const KinematicsCache again = forward_kinematics(skel, pose);
    for (int j = 0; j < skel.joint_count(); ++j) {
        CHECK(once.bones[j].rotation.isApprox(again.bones[j].rotation, 1e-15));
        CHECK((once.bones[j].origin - again.bones[j].origin).norm() == 0.0);
    }
}

TEST_CASE("pose jacobian translation columns are unit axes", "[kinematics]") {
    const ActorModel model = make_template_model();
    const auto jacs = pose_jacobian(model, PoseVector::zero(model.skeleton));
    for (const MatX& j : jacs) CHECK(j.block<3, 3>(0, 0).isApprox(Mat3::Identity(), 1e-15));
}

TEST_CASE("pose jacobian vanishes for a gaussian on the rotation axis", "[kinematics]") {
    ActorModel model = two_link_actor(0.5, 0.3);
    model.gaussians[0].mean_local = Vec3::Zero();  // exactly at the elbow joint
    const auto jacs = pose_jacobian(model, PoseVector::zero(model.skeleton));
    CHECK(jacs[0].col(6).norm() < 1e-15);
}

TEST_CASE("pose jacobian matches finite differences on random poses", "[kinematics]") {
    const ActorModel model = make_template_model();
    Rng rng(101);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        PoseVector pose = PoseVector::zero(model.skeleton);
        for (int k = 0; k < pose.params.size(); ++k) pose.params[k] = rng.uniform(-0.6, 0.6);
        const std::size_t q = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(model.gaussians.size()) - 1));
        const MatX jac = pose_jacobian(model, pose)[q];
        for (int axis = 0; axis < 3; ++axis) {
            auto f = [&](const VecX& p) {
                return pose_gaussians(model, PoseVector(p)).means_world[q][axis];
            };
            const VecX fd = test::central_gradient(f, pose.params, h);
            worst = std::max(worst,
                             test::relative_disagreement(jac.row(axis).transpose(), fd));
        }
    }
    CHECK(worst <= 1e-5);
}
