///
/// \file dataio.hpp
///
/// Synthetic shapes and camera rigs, the ground-truth silhouette oracle,
/// farthest point sampling and mask audits.
///
#ifndef POINTSIL_DATAIO_HPP
#define POINTSIL_DATAIO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pointsil/geometry.hpp"

namespace pointsil
{

enum class ShapeKind
{
    sphere,
    cube,
    torus,
    chair,         ///< box seat, back and four leg bars
    airplane,      ///< flat cross: fuselage and wing
    elongated_box, ///< car-like box, 2 × 0.9 × 0.7
};

/// Torus radii; the torus lies in the z = 0 plane.
inline constexpr double torus_major_radius = 0.7;
inline constexpr double torus_minor_radius = 0.3;

ShapeKind parse_shape_kind(std::string_view name);
const char* to_string(ShapeKind kind);

struct ShapeSpec
{
    ShapeKind kind{ShapeKind::sphere};
    Index n_points{1024};
    /// Oracle density; at least 10 × n_points.
    Index dense_n{100000};
    std::uint64_t seed{0};

    void validate() const;
};

struct ShapeSample
{
    PointCloud sparse;
    PointCloud dense;
};

/// Surface samples inside [−1, 1]³. The sphere uses a Fibonacci lattice;
/// box-built shapes allocate points to faces by area and sample each face
/// uniformly.
ShapeSample generate_shape(const ShapeSpec& spec);

/// Axis-aligned boxes whose surfaces make up a box-built shape.
struct Box
{
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
};
std::vector<Box> shape_boxes(ShapeKind kind);

struct RigSpec
{
    int n_views{4};
    double elevation_min_deg{-20};
    double elevation_max_deg{40};
    double distance{4.0};
    Index height{64};
    Index width{64};
    /// Focal length in pixels; <= 0 picks the largest focal that keeps the
    /// bounding sphere of [−1, 1]³ inside the image from any direction.
    double focal{0};
    std::uint64_t seed{0};
    ProjectionMode mode{ProjectionMode::perspective};

    void validate() const;
    double resolved_focal() const;
};

/// Camera at the given azimuth/elevation (degrees, z up) and distance,
/// looking at the origin. Image rows grow downward.
View look_at_view(double azimuth_deg, double elevation_deg, double distance,
                  const Intrinsics& intrinsics, Index height, Index width,
                  ProjectionMode mode = ProjectionMode::perspective);

/// V cameras at random azimuth in [0°, 360°) and elevation in the configured
/// range, deterministic in the seed.
std::vector<View> sample_views(const RigSpec& rig);

///
/// Binary silhouette: discrete rasterization of the dense cloud followed by a
/// 3×3 morphological closing.
///
/// \throws EmptyProjection if no point lands in the image.
///
Mask gt_mask(const PointCloud& dense, const View& view);

/// 3×3 closing of a binary mask; pixels outside the image count as unset for
/// the dilation and set for the erosion, so the result contains the input.
Mask close3x3(const Mask& binary);

///
/// Greedy farthest point sampling starting from the point nearest the
/// centroid; ties go to the lowest index.
///
/// \throws KTooLarge if k exceeds the number of points.
///
PointCloud farthest_point_sampling(const PointCloud& pc, Index k);

/// Indices selected by farthest_point_sampling, in selection order.
std::vector<Index> farthest_point_indices(const PointCloud& pc, Index k);

///
/// Interior holes: pixels below `threshold` with at least 6 of their 8
/// neighbors at or above it.
///
Index count_interior_holes(const Mask& mask, double threshold = 0.5);

/// Pixels set in `oracle` but below `threshold` in `mask`.
Index count_uncovered(const Mask& mask, const Mask& oracle,
                      double threshold = 0.5);

/// Mean per-pixel |a − b|.
double mean_l1(const Mask& a, const Mask& b);

/// Points whose squared distance to the nearest surface sample exceeds
/// `threshold`.
Index count_outliers(const PointCloud& pc, const PointCloud& surface,
                     double threshold = 0.05);

} // namespace pointsil

#endif // POINTSIL_DATAIO_HPP
