#include <gtest/gtest.h>

#include <numbers>

#include "pointsil/geometry.hpp"
#include "support.hpp"

namespace pointsil
{
namespace
{

using testing::random_rotation;
using testing::random_view;

View identity_view(double f, double c, ProjectionMode mode)
{
    return View(Extrinsics(), Intrinsics(f, f, c, c), 32, 32, mode);
}

PointCloud one_point(double x, double y, double z)
{
    PointCloud pc(1, 3);
    pc << x, y, z;
    return pc;
}

// K·[R | t] applied to homogeneous (x, y, z, 1) with an explicit divide.
Eigen::Vector3d homogeneous_oracle(const View& v, const Eigen::Vector3d& p)
{
    Eigen::Matrix<double, 3, 4> rt;
    rt.leftCols<3>() = v.extrinsics.rotation();
    rt.col(3) = v.extrinsics.translation();
    const Eigen::Vector4d ph(p.x(), p.y(), p.z(), 1.0);
    const Eigen::Vector3d q = rt * ph;
    const Eigen::Vector3d uvw = v.intrinsics.matrix() * q;
    return {uvw.x() / uvw.z(), uvw.y() / uvw.z(), q.z()};
}

TEST(Transform, IdentityOrthographic)
{
    const CamPoints cam =
        transform(one_point(0.3, -0.2, 5.0), identity_view(1, 0, ProjectionMode::orthographic));
    EXPECT_DOUBLE_EQ(cam(0, 0), 0.3);
    EXPECT_DOUBLE_EQ(cam(0, 1), -0.2);
    EXPECT_DOUBLE_EQ(cam(0, 2), 5.0);
}

TEST(Transform, PerspectiveDivide)
{
    const CamPoints cam =
        transform(one_point(1, 1, 2), identity_view(2, 16, ProjectionMode::perspective));
    EXPECT_DOUBLE_EQ(cam(0, 0), 17.0);
    EXPECT_DOUBLE_EQ(cam(0, 1), 17.0);
    EXPECT_DOUBLE_EQ(cam(0, 2), 2.0);
}

TEST(Transform, QuarterTurnAboutZ)
{
    const Eigen::Matrix3d rz =
        Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    const View v(Extrinsics(rz, Eigen::Vector3d::Zero()), Intrinsics(1, 1, 0, 0), 8, 8,
                 ProjectionMode::orthographic);
    const CamPoints cam = transform(one_point(1, 0, 0), v);
    EXPECT_NEAR(cam(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(cam(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(cam(0, 2), 0.0, 1e-15);
}

TEST(Transform, MatchesHomogeneousOracle)
{
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial)
    {
        const View v = random_view(rng, 48, 64);
        const PointCloud pc = testing::random_cloud(rng, 20);
        const CamPoints cam = transform(pc, v);
        for (Index n = 0; n < pc.rows(); ++n)
        {
            const Eigen::Vector3d want = homogeneous_oracle(v, pc.row(n).transpose());
            for (int a = 0; a < 3; ++a)
            {
                EXPECT_NEAR(cam(n, a), want[a], 1e-12 * std::max(1.0, std::abs(want[a])));
            }
        }
    }
}

TEST(Transform, EmptyCloud)
{
    Rng rng(1);
    EXPECT_EQ(transform(PointCloud(0, 3), random_view(rng, 8, 8)).rows(), 0);
}

TEST(Transform, DepthAtOrBehindCameraThrows)
{
    const View v = identity_view(1, 0, ProjectionMode::perspective);
    EXPECT_THROW(transform(one_point(0, 0, 0), v), PerspectiveDepthError);
    EXPECT_THROW(transform(one_point(0, 0, -1), v), PerspectiveDepthError);
    EXPECT_THROW(transform(one_point(0, 0, 1e-7), v), PerspectiveDepthError);
    EXPECT_NO_THROW(transform(one_point(0, 0, 1e-5), v));
    // Orthographic ignores depth.
    EXPECT_NO_THROW(transform(one_point(0, 0, -1), identity_view(1, 0, ProjectionMode::orthographic)));
}

TEST(Transform, RejectsNonFinitePoints)
{
    const View v = identity_view(1, 0, ProjectionMode::orthographic);
    EXPECT_THROW(transform(one_point(std::nan(""), 0, 1), v), InvalidArgument);
}

TEST(Extrinsics, RejectsInvalidRotation)
{
    Eigen::Matrix3d scaled = 1.01 * Eigen::Matrix3d::Identity();
    EXPECT_THROW(Extrinsics(scaled, Eigen::Vector3d::Zero()), InvalidArgument);
    Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
    reflection(2, 2) = -1;
    EXPECT_THROW(Extrinsics(reflection, Eigen::Vector3d::Zero()), InvalidArgument);
    EXPECT_THROW(Intrinsics(0, 1, 0, 0), InvalidArgument);
    EXPECT_THROW(Intrinsics(1, -1, 0, 0), InvalidArgument);
}

TEST(Extrinsics, ComposedRotationsStayValid)
{
    Rng rng(3);
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    for (int i = 0; i < 50; ++i)
    {
        r = random_rotation(rng) * r;
    }
    EXPECT_LT(rotation_defect(r), 1e-10);
    EXPECT_NO_THROW(Extrinsics(r, Eigen::Vector3d::Zero()));
}

TEST(TransformBackward, ZeroUpstreamGivesZero)
{
    Rng rng(5);
    const View v = random_view(rng, 16, 16);
    const PointCloud pc = testing::random_cloud(rng, 7);
    const GradBuffer g = transform_backward(pc, v, ImageGrad(ImageGrad::Zero(7, 2)));
    EXPECT_TRUE(g.isZero(0));
}

TEST(TransformBackward, IdentityOrthographicPassesThrough)
{
    const View v = identity_view(1, 0, ProjectionMode::orthographic);
    PointCloud pc(2, 3);
    pc << 0.1, 0.2, 0.3, -1, 2, -3;
    ImageGrad d(2, 2);
    d << 0.5, -1.5, 2.0, 3.0;
    const GradBuffer g = transform_backward(pc, v, d);
    EXPECT_DOUBLE_EQ(g(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(g(0, 1), -1.5);
    EXPECT_DOUBLE_EQ(g(0, 2), 0.0);
    EXPECT_DOUBLE_EQ(g(1, 0), 2.0);
    EXPECT_DOUBLE_EQ(g(1, 1), 3.0);
    EXPECT_DOUBLE_EQ(g(1, 2), 0.0);
}

TEST(TransformBackward, MatchesFiniteDifferences)
{
    Rng rng(17);
    const double h = 1e-5;
    for (const ProjectionMode mode : {ProjectionMode::perspective, ProjectionMode::orthographic})
    {
        for (int trial = 0; trial < 100; ++trial)
        {
            const View v = random_view(rng, 32, 32, mode);
            const PointCloud pc = testing::random_cloud(rng, 1);
            ImageGrad d(1, 2);
            d << rng.uniform(-1, 1), rng.uniform(-1, 1);
            const GradBuffer g = transform_backward(pc, v, d);
            for (int a = 0; a < 3; ++a)
            {
                PointCloud plus = pc;
                PointCloud minus = pc;
                plus(0, a) += h;
                minus(0, a) -= h;
                const CamPoints cp = transform(plus, v);
                const CamPoints cm = transform(minus, v);
                const double numeric = (d(0, 0) * (cp(0, 0) - cm(0, 0)) +
                                        d(0, 1) * (cp(0, 1) - cm(0, 1))) /
                                       (2 * h);
                const double denom =
                    std::max({std::abs(numeric), std::abs(g(0, a)), 1e-8});
                EXPECT_LT(std::abs(numeric - g(0, a)) / denom, 1e-6)
                    << "trial " << trial << " axis " << a;
            }
        }
    }
}

TEST(TransformBackward, ShapeMismatch)
{
    const View v = identity_view(1, 0, ProjectionMode::orthographic);
    EXPECT_THROW(transform_backward(PointCloud(PointCloud::Zero(3, 3)), v, ImageGrad(ImageGrad::Zero(2, 2))),
                 ShapeMismatch);
}

TEST(Transform, SinglePrecisionInstantiates)
{
    using ViewF = ViewT<float>;
    const ViewF v(ExtrinsicsT<float>(), IntrinsicsT<float>(2.f, 2.f, 16.f, 16.f), 32, 32);
    PointCloudT<float> pc(1, 3);
    pc << 1.f, 1.f, 2.f;
    const CamPointsT<float> cam = transform(pc, v);
    EXPECT_FLOAT_EQ(cam(0, 0), 17.f);
    ImageGradT<float> d(1, 2);
    d << 1.f, 0.f;
    EXPECT_FLOAT_EQ(transform_backward(pc, v, d)(0, 0), 1.f);
}

} // namespace
} // namespace pointsil
