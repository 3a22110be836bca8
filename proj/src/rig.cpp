#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pointsil/dataio.hpp"
#include "pointsil/projection.hpp"
#include "pointsil/random.hpp"

namespace pointsil
{

namespace
{

constexpr double deg = std::numbers::pi / 180.0;

// Radius of the sphere bounding [−1, 1]³.
const double unit_cube_radius = std::sqrt(3.0);

double half_extent(Index height, Index width)
{
    return 0.5 * static_cast<double>(std::min(height, width) - 1);
}

} // namespace

void RigSpec::validate() const
{
    if (n_views < 1)
    {
        throw InvalidArgument("rig needs at least one view");
    }
    if (height < 1 || width < 1)
    {
        throw InvalidArgument("rig image must be at least 1x1");
    }
    if (!(elevation_min_deg <= elevation_max_deg) || elevation_min_deg <= -90 ||
        elevation_max_deg >= 90)
    {
        throw InvalidArgument("elevation range must lie inside (-90, 90)");
    }
    if (mode == ProjectionMode::perspective && !(distance > unit_cube_radius))
    {
        throw InvalidArgument("camera distance " + std::to_string(distance) +
                              " does not clear the unit cube (needs > sqrt(3))");
    }
    const double f = resolved_focal();
    const double reach = mode == ProjectionMode::perspective
                             ? f * std::tan(std::asin(unit_cube_radius / distance))
                             : f * unit_cube_radius;
    if (!(f > 0) || reach > half_extent(height, width) + 1e-9)
    {
        throw InvalidArgument("focal length " + std::to_string(f) +
                              " projects the unit cube outside the image");
    }
}

double RigSpec::resolved_focal() const
{
    if (focal > 0)
    {
        return focal;
    }
    const double half = half_extent(height, width);
    if (mode == ProjectionMode::orthographic)
    {
        return half / unit_cube_radius;
    }
    return half / std::tan(std::asin(std::min(1.0, unit_cube_radius / distance)));
}

View look_at_view(double azimuth_deg, double elevation_deg, double distance,
                  const Intrinsics& intrinsics, Index height, Index width,
                  ProjectionMode mode)
{
    const double az = azimuth_deg * deg;
    const double el = elevation_deg * deg;
    const Eigen::Vector3d center(distance * std::cos(el) * std::cos(az),
                                 distance * std::cos(el) * std::sin(az),
                                 distance * std::sin(el));
    const Eigen::Vector3d forward = -center.normalized();
    const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
    const Eigen::Vector3d down = forward.cross(right);

    Eigen::Matrix3d rot;
    rot.row(0) = right.transpose();
    rot.row(1) = down.transpose();
    rot.row(2) = forward.transpose();
    return View(Extrinsics(rot, -rot * center), intrinsics, height, width, mode);
}

std::vector<View> sample_views(const RigSpec& rig)
{
    rig.validate();
    const double f = rig.resolved_focal();
    const Intrinsics intr(f, f, 0.5 * static_cast<double>(rig.width - 1),
                          0.5 * static_cast<double>(rig.height - 1));
    Rng rng(rig.seed, 3);
    std::vector<View> views;
    views.reserve(static_cast<std::size_t>(rig.n_views));
    for (int v = 0; v < rig.n_views; ++v)
    {
        const double az = rng.uniform(0.0, 360.0);
        const double el = rng.uniform(rig.elevation_min_deg, rig.elevation_max_deg);
        views.push_back(look_at_view(az, el, rig.distance, intr, rig.height,
                                     rig.width, rig.mode));
    }
    return views;
}

Mask close3x3(const Mask& binary)
{
    const Index h = binary.rows();
    const Index w = binary.cols();
    auto at = [&](const Mask& m, Index r, Index c, double outside) {
        return (r < 0 || c < 0 || r >= h || c >= w) ? outside : m(r, c);
    };
    Mask dilated = Mask::Zero(h, w);
    for (Index r = 0; r < h; ++r)
    {
        for (Index c = 0; c < w; ++c)
        {
            double v = 0.0;
            for (Index dr = -1; dr <= 1; ++dr)
            {
                for (Index dc = -1; dc <= 1; ++dc)
                {
                    v = std::max(v, at(binary, r + dr, c + dc, 0.0));
                }
            }
            dilated(r, c) = v;
        }
    }
    Mask closed = Mask::Zero(h, w);
    for (Index r = 0; r < h; ++r)
    {
        for (Index c = 0; c < w; ++c)
        {
            double v = 1.0;
            for (Index dr = -1; dr <= 1; ++dr)
            {
                for (Index dc = -1; dc <= 1; ++dc)
                {
                    v = std::min(v, at(dilated, r + dr, c + dc, 1.0));
                }
            }
            closed(r, c) = v;
        }
    }
    return closed;
}

Mask gt_mask(const PointCloud& dense, const View& view)
{
    // Points behind a perspective camera cannot land in the image.
    PointCloud visible = dense;
    if (view.mode == ProjectionMode::perspective)
    {
        Index kept = 0;
        for (Index i = 0; i < dense.rows(); ++i)
        {
            const Eigen::Vector3d q = view.extrinsics.rotation() * dense.row(i).transpose() +
                                      view.extrinsics.translation();
            if (q.z() > depth_epsilon)
            {
                visible.row(kept++) = dense.row(i);
            }
        }
        visible.conservativeResize(kept, 3);
    }
    const Mask raster =
        rasterize_discrete(transform(visible, view), view.height, view.width);
    if (raster.sum() == 0)
    {
        throw EmptyProjection("no point of the dense cloud lands in the image");
    }
    return close3x3(raster);
}

Index count_interior_holes(const Mask& mask, double threshold)
{
    const Index h = mask.rows();
    const Index w = mask.cols();
    Index holes = 0;
    for (Index r = 0; r < h; ++r)
    {
        for (Index c = 0; c < w; ++c)
        {
            if (mask(r, c) >= threshold)
            {
                continue;
            }
            int covered = 0;
            for (Index dr = -1; dr <= 1; ++dr)
            {
                for (Index dc = -1; dc <= 1; ++dc)
                {
                    const Index rr = r + dr;
                    const Index cc = c + dc;
                    if ((dr != 0 || dc != 0) && rr >= 0 && cc >= 0 && rr < h &&
                        cc < w && mask(rr, cc) >= threshold)
                    {
                        ++covered;
                    }
                }
            }
            holes += covered >= 6 ? 1 : 0;
        }
    }
    return holes;
}

Index count_uncovered(const Mask& mask, const Mask& oracle, double threshold)
{
    if (mask.rows() != oracle.rows() || mask.cols() != oracle.cols())
    {
        throw ShapeMismatch("count_uncovered: mask sizes differ");
    }
    return ((oracle.array() >= 0.5) && (mask.array() < threshold)).count();
}

double mean_l1(const Mask& a, const Mask& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
    {
        throw ShapeMismatch("mean_l1: mask sizes differ");
    }
    return (a - b).cwiseAbs().mean();
}

} // namespace pointsil
