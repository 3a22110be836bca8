#include <gtest/gtest.h>

#include "pointsil/chamfer.hpp"
#include "support.hpp"

namespace pointsil
{
namespace
{

using testing::random_cloud;

TEST(Chamfer, SelfDistanceIsZero)
{
    Rng rng(81);
    const PointCloud p = random_cloud(rng, 100);
    EXPECT_EQ(chamfer(p, p), 0.0);
    EXPECT_EQ(chamfer(p, p, NeighborSearch::brute_force), 0.0);
}

TEST(Chamfer, SinglePoints)
{
    PointCloud p(1, 3);
    PointCloud q(1, 3);
    p << 0, 0, 0;
    q << 1, 0, 0;
    const ChamferTerms t = chamfer_terms(p, q);
    EXPECT_EQ(t.forward, 1.0);
    EXPECT_EQ(t.backward, 1.0);
    EXPECT_EQ(t.total, 2.0);
}

TEST(Chamfer, DirectionalTerms)
{
    PointCloud p(2, 3);
    PointCloud q(1, 3);
    p << 0, 0, 0, 3, 0, 0;
    q << 1, 0, 0;
    const ChamferTerms t = chamfer_terms(p, q);
    EXPECT_EQ(t.forward, 1.0 + 4.0);
    EXPECT_EQ(t.backward, 1.0);
}

TEST(Chamfer, Symmetric)
{
    Rng rng(82);
    for (int trial = 0; trial < 10; ++trial)
    {
        const PointCloud p = random_cloud(rng, 50);
        const PointCloud q = random_cloud(rng, 70);
        EXPECT_EQ(chamfer(p, q), chamfer(q, p));
    }
}

TEST(Chamfer, ScalesQuadratically)
{
    Rng rng(83);
    for (const double s : {0.5, 2.0, 3.7, 1e-3})
    {
        const PointCloud p = random_cloud(rng, 64);
        const PointCloud q = random_cloud(rng, 64);
        const double base = chamfer(p, q);
        const double scaled = chamfer(PointCloud(s * p), PointCloud(s * q));
        EXPECT_NEAR(scaled / (s * s * base), 1.0, 1e-10);
    }
}

TEST(Chamfer, GridEqualsBruteForceBitExact)
{
    Rng rng(84);
    for (int trial = 0; trial < 20; ++trial)
    {
        const PointCloud p = random_cloud(rng, 64);
        const PointCloud q = random_cloud(rng, 64);
        const ChamferTerms g = chamfer_terms(p, q, NeighborSearch::grid);
        const ChamferTerms b = chamfer_terms(p, q, NeighborSearch::brute_force);
        EXPECT_EQ(g.forward, b.forward);
        EXPECT_EQ(g.backward, b.backward);
        EXPECT_EQ(g.total, b.total);
    }
}

TEST(NearestNeighbors, GridMatchesBruteForceOnAwkwardClouds)
{
    Rng rng(85);
    // Flat, clustered, duplicated and very spread clouds.
    PointCloud flat = random_cloud(rng, 300);
    flat.col(2).setZero();
    PointCloud clustered = random_cloud(rng, 300, 1e-4);
    clustered.bottomRows(100).array() += 50.0;
    PointCloud dup(200, 3);
    dup.topRows(100) = random_cloud(rng, 100);
    dup.bottomRows(100) = dup.topRows(100);
    PointCloud lattice(125, 3);
    for (Index i = 0; i < 125; ++i)
    {
        lattice.row(i) << static_cast<double>(i % 5), static_cast<double>((i / 5) % 5),
            static_cast<double>(i / 25);
    }
    const PointCloud queries = random_cloud(rng, 400, 3.0);
    for (const PointCloud* targets : {&flat, &clustered, &dup, &lattice})
    {
        const NearestNeighbors g = nearest_neighbors(queries, *targets, NeighborSearch::grid);
        const NearestNeighbors b =
            nearest_neighbors(queries, *targets, NeighborSearch::brute_force);
        EXPECT_EQ(g.dist_sq, b.dist_sq);
        EXPECT_EQ(g.index, b.index);
        const NearestNeighbors gs = nearest_neighbors(*targets, *targets, NeighborSearch::grid);
        const NearestNeighbors bs =
            nearest_neighbors(*targets, *targets, NeighborSearch::brute_force);
        EXPECT_EQ(gs.index, bs.index);
    }
}

TEST(NearestNeighbors, TiesGoToSmallestIndex)
{
    PointCloud targets(3, 3);
    targets << 1, 0, 0, -1, 0, 0, 1, 0, 0;
    PointCloud q(1, 3);
    q << 0, 0, 0;
    for (const auto method : {NeighborSearch::grid, NeighborSearch::brute_force})
    {
        EXPECT_EQ(nearest_neighbors(q, targets, method).index[0], 0);
    }
}

TEST(Chamfer, EmptyCloudThrows)
{
    const PointCloud p = PointCloud::Zero(3, 3);
    EXPECT_THROW(chamfer(p, PointCloud(0, 3)), EmptyCloud);
    EXPECT_THROW(chamfer(PointCloud(0, 3), p), EmptyCloud);
    EXPECT_THROW(chamfer_with_gradient(p, PointCloud(0, 3)), EmptyCloud);
}

TEST(ChamferGradient, ValueMatchesChamfer)
{
    Rng rng(86);
    const PointCloud a = random_cloud(rng, 40);
    const PointCloud b = random_cloud(rng, 30);
    EXPECT_EQ(chamfer_with_gradient(a, b).value, chamfer(a, b));
}

TEST(ChamferGradient, ZeroAtAnchor)
{
    Rng rng(87);
    const PointCloud a = random_cloud(rng, 40);
    const ChamferGradient g = chamfer_with_gradient(a, a);
    EXPECT_EQ(g.value, 0.0);
    EXPECT_TRUE(g.grad.isZero(0));
}

TEST(ChamferGradient, MatchesFiniteDifferences)
{
    Rng rng(88);
    const double h = 1e-7;
    const PointCloud a = random_cloud(rng, 30);
    const PointCloud b = random_cloud(rng, 20);
    const ChamferGradient g = chamfer_with_gradient(a, b);
    for (Index n = 0; n < b.rows(); ++n)
    {
        for (int ax = 0; ax < 3; ++ax)
        {
            PointCloud plus = b;
            PointCloud minus = b;
            plus(n, ax) += h;
            minus(n, ax) -= h;
            const double numeric = (chamfer(a, plus) - chamfer(a, minus)) / (2 * h);
            EXPECT_NEAR(numeric, g.grad(n, ax), 1e-6 * std::max(1.0, std::abs(numeric)));
        }
    }
}

} // namespace
} // namespace pointsil
