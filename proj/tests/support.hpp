// Helpers shared by the unit tests.
#ifndef POINTSIL_TESTS_SUPPORT_HPP
#define POINTSIL_TESTS_SUPPORT_HPP

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "pointsil/geometry.hpp"
#include "pointsil/random.hpp"

namespace pointsil::testing
{

inline std::string data_path(const std::string& name)
{
    return std::string(POINTSIL_TEST_DATA) + "/" + name;
}

inline Eigen::Matrix3d random_rotation(Rng& rng)
{
    Eigen::Quaterniond q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                         rng.uniform(-1, 1));
    q.normalize();
    return q.toRotationMatrix();
}

/// Camera looking roughly down +z at points near the origin, pushed back far
/// enough that everything in [−1, 1]³ is in front of it.
inline View random_view(Rng& rng, Index height, Index width,
                        ProjectionMode mode = ProjectionMode::perspective)
{
    const Eigen::Matrix3d rot = random_rotation(rng);
    const Eigen::Vector3d t(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                            rng.uniform(4.0, 6.0));
    const double f = rng.uniform(0.8, 1.2) * static_cast<double>(std::min(height, width));
    const Intrinsics k(f, f * rng.uniform(0.9, 1.1),
                       0.5 * static_cast<double>(width - 1) + rng.uniform(-1, 1),
                       0.5 * static_cast<double>(height - 1) + rng.uniform(-1, 1));
    return View(Extrinsics(rot, t), k, height, width, mode);
}

inline PointCloud random_cloud(Rng& rng, Index n, double extent = 1.0)
{
    PointCloud pc(n, 3);
    for (Index i = 0; i < n; ++i)
    {
        pc.row(i) << rng.uniform(-extent, extent), rng.uniform(-extent, extent),
            rng.uniform(-extent, extent);
    }
    return pc;
}

/// Continuous (x̂, ŷ, ẑ) points spread over an H×W image.
inline CamPoints random_cam(Rng& rng, Index n, Index height, Index width)
{
    CamPoints cam(n, 3);
    for (Index i = 0; i < n; ++i)
    {
        cam.row(i) << rng.uniform(-2.0, static_cast<double>(width) + 1.0),
            rng.uniform(-2.0, static_cast<double>(height) + 1.0), rng.uniform(1, 5);
    }
    return cam;
}

inline Mask random_mask(Rng& rng, Index height, Index width)
{
    Mask m(height, width);
    for (Index i = 0; i < m.size(); ++i)
    {
        m.data()[i] = rng.uniform();
    }
    return m;
}

inline Mask random_binary(Rng& rng, Index height, Index width, double density)
{
    Mask m(height, width);
    for (Index i = 0; i < m.size(); ++i)
    {
        m.data()[i] = rng.uniform() < density ? 1.0 : 0.0;
    }
    return m;
}

inline Mask clamp01(Mask m)
{
    return m.cwiseMax(0.0).cwiseMin(1.0);
}

} // namespace pointsil::testing

#endif // POINTSIL_TESTS_SUPPORT_HPP
