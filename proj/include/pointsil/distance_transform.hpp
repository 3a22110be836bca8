///
/// \file distance_transform.hpp
///
/// Exact squared Euclidean distance transform with nearest-pixel indices.
///
#ifndef POINTSIL_DISTANCE_TRANSFORM_HPP
#define POINTSIL_DISTANCE_TRANSFORM_HPP

#include <cstdint>

#include "pointsil/types.hpp"

namespace pointsil
{

/// Marks pixels of a field computed from an empty support set.
inline constexpr std::int64_t no_support = -1;

struct DistanceField
{
    /// Squared distance to the nearest support pixel, or no_support.
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        dist_sq;
    /// Row-major linear index (row·W + col) of the nearest support pixel, or
    /// no_support. Ties resolve to the lexicographically smallest (row, col).
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        nearest;

    bool has_support() const
    {
        return nearest.size() > 0 && nearest(0, 0) != no_support;
    }
};

///
/// Two-pass separable lower-envelope transform. Output equals the naive
/// per-pixel minimum over the support set exactly, including tie-breaking.
///
DistanceField distance_transform(const BoolMask& support);

} // namespace pointsil

#endif // POINTSIL_DISTANCE_TRANSFORM_HPP
