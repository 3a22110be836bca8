#include <gtest/gtest.h>

#include <limits>

#include "pointsil/distance_transform.hpp"
#include "pointsil/random.hpp"

namespace pointsil
{
namespace
{

// Per-pixel minimum over the support set; ties go to the first support pixel
// in row-major order.
DistanceField brute_force(const BoolMask& support)
{
    const Index h = support.rows();
    const Index w = support.cols();
    DistanceField f;
    f.dist_sq.resize(h, w);
    f.nearest.resize(h, w);
    for (Index r = 0; r < h; ++r)
    {
        for (Index c = 0; c < w; ++c)
        {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            std::int64_t arg = no_support;
            for (Index sr = 0; sr < h; ++sr)
            {
                for (Index sc = 0; sc < w; ++sc)
                {
                    if (!support(sr, sc))
                    {
                        continue;
                    }
                    const std::int64_t d = (r - sr) * (r - sr) + (c - sc) * (c - sc);
                    if (d < best)
                    {
                        best = d;
                        arg = sr * w + sc;
                    }
                }
            }
            f.dist_sq(r, c) = arg == no_support ? 0 : best;
            f.nearest(r, c) = arg;
        }
    }
    return f;
}

BoolMask random_support(Rng& rng, Index h, Index w, double density)
{
    BoolMask m(h, w);
    for (Index i = 0; i < m.size(); ++i)
    {
        m.data()[i] = rng.uniform() < density;
    }
    return m;
}

TEST(DistanceTransform, FullSupportIsZero)
{
    const DistanceField f = distance_transform(BoolMask::Constant(5, 7, true));
    for (Index r = 0; r < 5; ++r)
    {
        for (Index c = 0; c < 7; ++c)
        {
            EXPECT_EQ(f.dist_sq(r, c), 0);
            EXPECT_EQ(f.nearest(r, c), r * 7 + c);
        }
    }
}

TEST(DistanceTransform, SingleCorner)
{
    BoolMask s = BoolMask::Constant(4, 4, false);
    s(0, 0) = true;
    const DistanceField f = distance_transform(s);
    for (Index i = 0; i < 4; ++i)
    {
        for (Index j = 0; j < 4; ++j)
        {
            EXPECT_EQ(f.dist_sq(i, j), i * i + j * j);
            EXPECT_EQ(f.nearest(i, j), 0);
        }
    }
}

TEST(DistanceTransform, EmptySupport)
{
    const DistanceField f = distance_transform(BoolMask::Constant(3, 3, false));
    EXPECT_FALSE(f.has_support());
    EXPECT_EQ(f.nearest(1, 1), no_support);
}

TEST(DistanceTransform, TiesPreferEarlierRow)
{
    BoolMask s = BoolMask::Constant(3, 3, false);
    s(0, 2) = true;
    s(2, 0) = true;
    const DistanceField f = distance_transform(s);
    EXPECT_EQ(f.dist_sq(0, 0), 4);
    EXPECT_EQ(f.nearest(0, 0), 2);
    EXPECT_EQ(f.nearest(1, 1), 2);
}

TEST(DistanceTransform, MatchesBruteForce)
{
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial)
    {
        const double density = trial < 10 ? 0.01 : rng.uniform(0.02, 0.6);
        const BoolMask s = random_support(rng, 32, 32, density);
        const DistanceField got = distance_transform(s);
        const DistanceField want = brute_force(s);
        if (!want.has_support())
        {
            EXPECT_FALSE(got.has_support());
            continue;
        }
        EXPECT_TRUE((got.dist_sq.array() == want.dist_sq.array()).all()) << "trial " << trial;
        EXPECT_TRUE((got.nearest.array() == want.nearest.array()).all()) << "trial " << trial;
    }
}

TEST(DistanceTransform, NonSquareMatchesBruteForce)
{
    Rng rng(42);
    for (const auto& [h, w] : {std::pair<Index, Index>{1, 17}, {17, 1}, {5, 23}, {23, 5}})
    {
        BoolMask s = random_support(rng, h, w, 0.15);
        s(h - 1, w - 1) = true;
        const DistanceField got = distance_transform(s);
        const DistanceField want = brute_force(s);
        EXPECT_TRUE((got.dist_sq.array() == want.dist_sq.array()).all());
        EXPECT_TRUE((got.nearest.array() == want.nearest.array()).all());
    }
}

} // namespace
} // namespace pointsil
