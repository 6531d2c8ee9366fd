#pragma once

#include <string>

#include "volcap/core/error.hpp"
#include "volcap/core/types.hpp"

namespace volcap {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length, world frame
};

/// Calibrated pinhole camera. K maps calibrated camera coordinates to
/// pixels, rotation is world-to-camera, center is the camera position o.
class CameraModel {
public:
    CameraModel() = default;
    CameraModel(Mat3 intrinsics, Mat3 rotation, Vec3 center, int width, int height,
                std::string name = {})
        : K_(intrinsics), R_(rotation), center_(center), width_(width), height_(height),
          name_(std::move(name)) {
        validate();
        K_inv_ = K_.inverse();
    }

    const Mat3& intrinsics() const { return K_; }
    const Mat3& rotation() const { return R_; }
    const Vec3& center() const { return center_; }
    int width() const { return width_; }
    int height() const { return height_; }
    const std::string& name() const { return name_; }

    /// Ray through pixel (u, v); sub-pixel coordinates allowed.
    Ray pixel_ray(double u, double v) const {
        const Vec3 g = K_inv_ * Vec3(u, v, 1.0);
        return Ray{center_, (R_.transpose() * g).normalized()};
    }

    /// Analytic derivative of the unit ray direction w.r.t. (u, v);
    /// columns are dn/du and dn/dv.
    Mat32 pixel_ray_jacobian(double u, double v) const {
        const Vec3 g = K_inv_ * Vec3(u, v, 1.0);
        const double norm = g.norm();
        const Vec3 n_cam = g / norm;
        const Mat3 proj = (Mat3::Identity() - n_cam * n_cam.transpose()) / norm;
        Mat32 d;
        d.col(0) = R_.transpose() * (proj * K_inv_.col(0));
        d.col(1) = R_.transpose() * (proj * K_inv_.col(1));
        return d;
    }

    /// Projects a world point to pixel coordinates. Throws for points at or
    /// behind the camera plane.
    Vec2 project(const Vec3& x_world) const {
        const Vec3 x_cam = R_ * (x_world - center_);
        if (x_cam.z() <= 1e-9)
            throw NumericalError("CameraModel::project: point behind camera");
        const Vec3 px = K_ * (x_cam / x_cam.z());
        return Vec2(px.x(), px.y());
    }

    /// Depth of a world point along the camera's viewing axis.
    double depth(const Vec3& x_world) const { return (R_ * (x_world - center_)).z(); }

    /// Simple look-at construction, y-up world.
    static CameraModel look_at(const Vec3& eye, const Vec3& target, double focal_px, int width,
                               int height, std::string name = {}) {
        const Vec3 fwd = (target - eye).normalized();
        Vec3 up = Vec3::UnitY();
        Vec3 right = fwd.cross(up);
        if (right.norm() < 1e-9) right = Vec3::UnitX();
        right.normalize();
        const Vec3 down = fwd.cross(right).normalized();  // +v grows downward in images
        Mat3 rot;
        rot.row(0) = right.transpose();
        rot.row(1) = down.transpose();
        rot.row(2) = fwd.transpose();
        Mat3 intr = Mat3::Identity();
        intr(0, 0) = focal_px;
        intr(1, 1) = focal_px;
        intr(0, 2) = 0.5 * width;
        intr(1, 2) = 0.5 * height;
        return CameraModel(intr, rot, eye, width, height, std::move(name));
    }

private:
    void validate() const {
        if (width_ <= 0 || height_ <= 0)
            throw InvalidArgumentError("CameraModel: non-positive image size");
        if (!(K_(0, 0) > 0.0) || !(K_(1, 1) > 0.0))
            throw InvalidArgumentError("CameraModel: focal lengths must be positive");
        if (std::abs(K_(1, 0)) > 1e-12 || std::abs(K_(2, 0)) > 1e-12 ||
            std::abs(K_(2, 1)) > 1e-12 || std::abs(K_(2, 2) - 1.0) > 1e-12)
            throw InvalidArgumentError("CameraModel: K must be upper triangular with K(2,2)=1");
        if ((R_ * R_.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
            R_.determinant() < 0.0)
            throw InvalidArgumentError("CameraModel: rotation must be orthonormal, det +1");
    }

    Mat3 K_ = Mat3::Identity();
    Mat3 K_inv_ = Mat3::Identity();
    Mat3 R_ = Mat3::Identity();
    Vec3 center_ = Vec3::Zero();
    int width_ = 0, height_ = 0;
    std::string name_;
};

}  // namespace volcap
