#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace volcap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix3Xd;
using Mat32 = Eigen::Matrix<double, 3, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;  // sqrt(2*pi)
inline constexpr double kSqrtPiOver2 = 1.25331413731550025121;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Similarity transform x -> scale * R * x + t with proper rotation R.
struct Similarity {
    double scale = 1.0;
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& x) const { return scale * (rotation * x) + translation; }

    static Similarity identity() { return Similarity{}; }
};

}  // namespace volcap
