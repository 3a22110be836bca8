///
/// \file geometry.hpp
///
/// Pinhole / orthographic camera model and the differentiable world-to-image
/// transform.
///
#ifndef POINTSIL_GEOMETRY_HPP
#define POINTSIL_GEOMETRY_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pointsil/types.hpp"

namespace pointsil
{

/// Points with camera depth at or below this are rejected in perspective mode.
inline constexpr double depth_epsilon = 1e-6;

/// Tolerance used when validating a rotation at construction.
inline constexpr double rotation_tolerance = 1e-6;

enum class ProjectionMode
{
    perspective,
    orthographic
};

inline const char* to_string(ProjectionMode mode)
{
    return mode == ProjectionMode::perspective ? "perspective" : "orthographic";
}

/// Largest absolute entry of RᵀR − I and |det R − 1|; zero for an exact
/// rotation.
template <typename Scalar>
Scalar rotation_defect(const Eigen::Matrix<Scalar, 3, 3>& rot)
{
    const Scalar ortho =
        (rot.transpose() * rot - Eigen::Matrix<Scalar, 3, 3>::Identity())
            .cwiseAbs()
            .maxCoeff();
    using std::abs;
    return std::max(ortho, abs(rot.determinant() - Scalar(1)));
}

///
/// Rigid world-to-camera transform q = R·p + t. The rotation is validated
/// once, here.
///
template <typename Scalar>
class ExtrinsicsT
{
public:
    using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
    using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

    ExtrinsicsT() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero())
    {
    }

    ExtrinsicsT(const Matrix3& rotation, const Vector3& translation)
        : rotation_(rotation), translation_(translation)
    {
        if (!rotation_.allFinite() || !translation_.allFinite())
        {
            throw InvalidArgument("extrinsics contain non-finite values");
        }
        const Scalar defect = rotation_defect(rotation_);
        if (!(defect <= Scalar(rotation_tolerance)))
        {
            throw InvalidArgument(
                "rotation is not orthonormal with det +1 (defect " +
                std::to_string(static_cast<double>(defect)) + ")");
        }
    }

    const Matrix3& rotation() const noexcept
    {
        return rotation_;
    }
    const Vector3& translation() const noexcept
    {
        return translation_;
    }

private:
    Matrix3 rotation_;
    Vector3 translation_;
};

///
/// Upper-triangular calibration K = [fx 0 cx; 0 fy cy; 0 0 1].
///
template <typename Scalar>
struct IntrinsicsT
{
    Scalar fx{1};
    Scalar fy{1};
    Scalar cx{0};
    Scalar cy{0};

    IntrinsicsT() = default;

    IntrinsicsT(Scalar fx_, Scalar fy_, Scalar cx_, Scalar cy_)
        : fx(fx_), fy(fy_), cx(cx_), cy(cy_)
    {
        using std::isfinite;
        if (!(fx > 0) || !(fy > 0) || !isfinite(fx) || !isfinite(fy) ||
            !isfinite(cx) || !isfinite(cy))
        {
            throw InvalidArgument("intrinsics require finite fx > 0, fy > 0");
        }
    }

    Eigen::Matrix<Scalar, 3, 3> matrix() const
    {
        Eigen::Matrix<Scalar, 3, 3> k;
        k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
        return k;
    }
};

///
/// One camera: pose, calibration and image size. Pixel (row, col) has its
/// center at continuous coordinates (ŷ, x̂) = (row, col).
///
template <typename Scalar>
struct ViewT
{
    ExtrinsicsT<Scalar> extrinsics;
    IntrinsicsT<Scalar> intrinsics;
    Index height{1};
    Index width{1};
    ProjectionMode mode{ProjectionMode::perspective};

    ViewT() = default;

    ViewT(const ExtrinsicsT<Scalar>& ext, const IntrinsicsT<Scalar>& intr,
          Index h, Index w, ProjectionMode m = ProjectionMode::perspective)
        : extrinsics(ext), intrinsics(intr), height(h), width(w), mode(m)
    {
        if (h < 1 || w < 1)
        {
            throw InvalidArgument("view dimensions must be at least 1x1");
        }
    }
};

using Extrinsics = ExtrinsicsT<double>;
using Intrinsics = IntrinsicsT<double>;
using View       = ViewT<double>;

namespace detail
{

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> camera_frame(const ExtrinsicsT<Scalar>& ext,
                                         const Eigen::Matrix<Scalar, 3, 1>& p)
{
    return ext.rotation() * p + ext.translation();
}

} // namespace detail

///
/// Maps world points to (x̂, ŷ) pixel coordinates and camera depth ẑ.
///
/// \throws PerspectiveDepthError in perspective mode when any depth is at or
///         below depth_epsilon.
///
template <typename Scalar>
CamPointsT<Scalar> transform(const PointCloudT<Scalar>& pc,
                             const ViewT<Scalar>& view)
{
    if (!pc.allFinite())
    {
        throw InvalidArgument("point cloud has non-finite coordinates");
    }
    const auto& k = view.intrinsics;
    CamPointsT<Scalar> out(pc.rows(), 3);
    for (Index n = 0; n < pc.rows(); ++n)
    {
        const Eigen::Matrix<Scalar, 3, 1> q =
            detail::camera_frame(view.extrinsics, pc.row(n).transpose().eval());
        if (view.mode == ProjectionMode::perspective)
        {
            if (!(q.z() > Scalar(depth_epsilon)))
            {
                throw PerspectiveDepthError(
                    "point " + std::to_string(n) + " has camera depth " +
                    std::to_string(static_cast<double>(q.z())) +
                    " <= depth_epsilon");
            }
            out(n, 0) = k.fx * q.x() / q.z() + k.cx;
            out(n, 1) = k.fy * q.y() / q.z() + k.cy;
        }
        else
        {
            out(n, 0) = k.fx * q.x() + k.cx;
            out(n, 1) = k.fy * q.y() + k.cy;
        }
        out(n, 2) = q.z();
    }
    return out;
}

///
/// Chain rule through transform: returns dL/dp = Jᵀ·(dL/dx̂, dL/dŷ) per point.
///
template <typename Scalar>
GradBufferT<Scalar> transform_backward(const PointCloudT<Scalar>& pc,
                                       const ViewT<Scalar>& view,
                                       const ImageGradT<Scalar>& d_cam)
{
    if (d_cam.rows() != pc.rows())
    {
        throw ShapeMismatch("transform_backward: " +
                            std::to_string(d_cam.rows()) +
                            " image gradients for " +
                            std::to_string(pc.rows()) + " points");
    }
    const auto& k = view.intrinsics;
    const auto& rot = view.extrinsics.rotation();
    GradBufferT<Scalar> out(pc.rows(), 3);
    for (Index n = 0; n < pc.rows(); ++n)
    {
        const Scalar gx = d_cam(n, 0);
        const Scalar gy = d_cam(n, 1);
        Eigen::Matrix<Scalar, 3, 1> dq;
        if (view.mode == ProjectionMode::perspective)
        {
            const Eigen::Matrix<Scalar, 3, 1> q = detail::camera_frame(
                view.extrinsics, pc.row(n).transpose().eval());
            if (!(q.z() > Scalar(depth_epsilon)))
            {
                throw PerspectiveDepthError(
                    "point " + std::to_string(n) +
                    " is at or behind the camera plane");
            }
            const Scalar inv_z = Scalar(1) / q.z();
            dq.x() = gx * k.fx * inv_z;
            dq.y() = gy * k.fy * inv_z;
            dq.z() = -(gx * k.fx * q.x() + gy * k.fy * q.y()) * inv_z * inv_z;
        }
        else
        {
            dq << gx * k.fx, gy * k.fy, Scalar(0);
        }
        out.row(n) = (rot.transpose() * dq).transpose();
    }
    return out;
}

} // namespace pointsil

#endif // POINTSIL_GEOMETRY_HPP
