///
/// \file types.hpp
///
/// Dense types shared by every module and the error hierarchy.
///
#ifndef POINTSIL_TYPES_HPP
#define POINTSIL_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pointsil
{

using Index = Eigen::Index;

/// N unordered 3D points, one per row.
template <typename Scalar>
using PointCloudT = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

/// Camera-frame points: (x̂, ŷ) in pixels, ẑ depth in world units.
template <typename Scalar>
using CamPointsT = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

/// Per-point 3-vector of loss gradients.
template <typename Scalar>
using GradBufferT = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

/// Per-point (dL/dx̂, dL/dŷ).
template <typename Scalar>
using ImageGradT = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

/// H×W grid; row index is the image row.
template <typename Scalar>
using MaskT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PointCloud = PointCloudT<double>;
using CamPoints  = CamPointsT<double>;
using GradBuffer = GradBufferT<double>;
using ImageGrad  = ImageGradT<double>;
using Mask       = MaskT<double>;
using BoolMask =
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

//------------------------------------------------------------------------------
// Errors
//------------------------------------------------------------------------------

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// A point sits at or behind the camera plane in perspective mode.
class PerspectiveDepthError : public Error
{
public:
    using Error::Error;
};

class ShapeMismatch : public Error
{
public:
    using Error::Error;
};

class EmptyCloud : public Error
{
public:
    using Error::Error;
};

class UnknownShape : public Error
{
public:
    using Error::Error;
};

class EmptyProjection : public Error
{
public:
    using Error::Error;
};

class KTooLarge : public Error
{
public:
    using Error::Error;
};

/// No point of the cloud is visible in any view, so every gradient is zero.
class DegenerateInput : public Error
{
public:
    using Error::Error;
};

class ParseError : public Error
{
public:
    ParseError(std::string location, const std::string& what)
        : Error(location + ": " + what), location_(std::move(location))
    {
    }

    const std::string& location() const noexcept
    {
        return location_;
    }

private:
    std::string location_;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m)
{
    return m.allFinite();
}

/// Validates a mask: finite everywhere, every value in [0, 1].
template <typename Derived>
void check_mask(const Eigen::DenseBase<Derived>& m, const char* what = "mask")
{
    if (!m.allFinite())
    {
        throw InvalidArgument(std::string(what) + " has non-finite values");
    }
    if (m.size() > 0 && (m.minCoeff() < 0 || m.maxCoeff() > 1))
    {
        throw InvalidArgument(std::string(what) + " has values outside [0, 1]");
    }
}

} // namespace pointsil

#endif // POINTSIL_TYPES_HPP
