#include <gtest/gtest.h>

#include <limits>

#include "pointsil/losses.hpp"
#include "support.hpp"

namespace pointsil
{
namespace
{

using testing::random_binary;
using testing::random_mask;

constexpr double tau = 1e-3;
constexpr double eps = 1e-7;

// Nearest pixel of `b` above tau for every pixel, by exhaustive search; ties
// go to the first in row-major order. Sums d²·a(i)·b(k) over all pixels.
double one_sided_brute(const Mask& a, const Mask& b)
{
    const Index h = a.rows();
    const Index w = a.cols();
    double sum = 0.0;
    for (Index i = 0; i < a.size(); ++i)
    {
        const double ai = a.data()[i] > tau ? a.data()[i] : 0.0;
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        Index arg = -1;
        for (Index k = 0; k < b.size(); ++k)
        {
            if (!(b.data()[k] > tau))
            {
                continue;
            }
            const std::int64_t dr = i / w - k / w;
            const std::int64_t dc = i % w - k % w;
            const std::int64_t d = dr * dr + dc * dc;
            if (d < best)
            {
                best = d;
                arg = k;
            }
        }
        if (arg >= 0)
        {
            sum += static_cast<double>(best) * ai * b.data()[arg];
        }
    }
    (void)h;
    return sum;
}

double affinity_brute(const Mask& pred, const Mask& gt)
{
    return one_sided_brute(pred, gt) + one_sided_brute(gt, pred);
}

template <typename F>
Mask numeric_gradient(const Mask& at, F&& f, double h)
{
    Mask g(at.rows(), at.cols());
    for (Index i = 0; i < at.size(); ++i)
    {
        Mask plus = at;
        Mask minus = at;
        plus.data()[i] += h;
        minus.data()[i] -= h;
        g.data()[i] = (f(plus) - f(minus)) / (2 * h);
    }
    return g;
}

double max_rel(const Mask& a, const Mask& b)
{
    double worst = 0.0;
    for (Index i = 0; i < a.size(); ++i)
    {
        const double x = a.data()[i];
        const double y = b.data()[i];
        worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-8}));
    }
    return worst;
}

TEST(Bce, PerfectPredictionAtClampFloor)
{
    Rng rng(51);
    const Mask gt = random_binary(rng, 6, 5, 0.5);
    const Mask pred = gt.unaryExpr([](double v) { return v == 1.0 ? 1.0 - eps : eps; });
    const MaskLoss l = bce(pred, gt, eps);
    EXPECT_NEAR(l.value, -30 * std::log(1 - eps), 1e-12);
    EXPECT_NEAR(l.value, 30 * eps, 1e-12);
}

TEST(Bce, SinglePixelClosedForm)
{
    Mask pred(1, 1);
    Mask gt(1, 1);
    pred << 0.5;
    gt << 1.0;
    const MaskLoss l = bce(pred, gt, eps);
    EXPECT_NEAR(l.value, std::log(2.0), 1e-15);
    EXPECT_NEAR(l.d_mask(0, 0), -2.0, 1e-15);
}

TEST(Bce, ClampedPixelsHaveNoGradient)
{
    Mask pred(1, 3);
    Mask gt(1, 3);
    pred << 0.0, 1.0, 1e-9;
    gt << 1.0, 0.0, 1.0;
    const MaskLoss l = bce(pred, gt, eps);
    EXPECT_TRUE(std::isfinite(l.value));
    EXPECT_TRUE(l.d_mask.isZero(0));
    EXPECT_NEAR(l.value, -2 * std::log(eps) - std::log1p(-(1 - eps)), 1e-6);
}

TEST(Bce, MatchesFiniteDifferences)
{
    Rng rng(52);
    for (int trial = 0; trial < 5; ++trial)
    {
        const Mask pred = random_mask(rng, 8, 8).array() * 0.9 + 0.05;
        const Mask gt = trial % 2 ? random_binary(rng, 8, 8, 0.5) : random_mask(rng, 8, 8);
        const Mask numeric =
            numeric_gradient(pred, [&](const Mask& p) { return bce(p, gt, eps).value; }, 1e-6);
        EXPECT_LT(max_rel(bce(pred, gt, eps).d_mask, numeric), 1e-6);
    }
}

TEST(Bce, MinimizedAtTarget)
{
    for (const double g : {0.1, 0.3, 0.5, 0.8})
    {
        Mask gt(1, 1);
        gt << g;
        double best = std::numeric_limits<double>::infinity();
        double best_p = -1;
        for (int k = 1; k < 100; ++k)
        {
            Mask pred(1, 1);
            pred << k / 100.0;
            const double v = bce(pred, gt, eps).value;
            if (v < best)
            {
                best = v;
                best_p = k / 100.0;
            }
        }
        EXPECT_NEAR(best_p, g, 1e-12);
    }
}

TEST(Bce, Errors)
{
    EXPECT_THROW(bce(Mask::Zero(2, 2), Mask::Zero(2, 3), eps), ShapeMismatch);
    EXPECT_THROW(bce(Mask::Zero(2, 2), Mask::Zero(2, 2), 0.0), InvalidArgument);
}

TEST(Affinity, IdenticalMasksGiveZero)
{
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial)
    {
        Mask m = random_mask(rng, 12, 12);
        m = m.unaryExpr([](double v) { return v < 0.4 ? v * 1e-3 : v; });
        const MaskLoss l = affinity(m, m, tau);
        EXPECT_EQ(l.value, 0.0);
        EXPECT_TRUE(l.d_mask.isZero(0));
        const Mask b = random_binary(rng, 12, 12, 0.3);
        EXPECT_EQ(affinity(b, b, tau).value, 0.0);
    }
}

TEST(Affinity, SinglePair)
{
    Mask gt = Mask::Zero(8, 8);
    Mask pred = Mask::Zero(8, 8);
    gt(0, 0) = 1;
    pred(3, 4) = 1;
    EXPECT_EQ(affinity(pred, gt, tau).value, 50.0);
}

TEST(Affinity, EmptySupportContributesNothing)
{
    Mask gt = Mask::Zero(4, 4);
    Mask pred = Mask::Zero(4, 4);
    EXPECT_EQ(affinity(pred, gt, tau).value, 0.0);
    pred(1, 1) = 0.7;
    EXPECT_EQ(affinity(pred, gt, tau).value, 0.0);
    EXPECT_EQ(affinity(gt, pred, tau).value, 0.0);
}

TEST(Affinity, MatchesBruteForceExactly)
{
    Rng rng(62);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Mask a = random_binary(rng, 16, 16, rng.uniform(0.02, 0.5));
        const Mask b = random_binary(rng, 16, 16, rng.uniform(0.02, 0.5));
        EXPECT_EQ(affinity(a, b, tau).value, affinity_brute(a, b)) << "trial " << trial;
    }
}

TEST(Affinity, ContinuousMatchesBruteForce)
{
    Rng rng(63);
    for (int trial = 0; trial < 10; ++trial)
    {
        const Mask a = random_mask(rng, 10, 14).unaryExpr([](double v) { return v < 0.5 ? 0.0 : v; });
        const Mask b = random_mask(rng, 10, 14).unaryExpr([](double v) { return v < 0.7 ? 0.0 : v; });
        const double want = affinity_brute(a, b);
        EXPECT_NEAR(affinity(a, b, tau).value, want, 1e-12 * want);
    }
}

TEST(Affinity, SymmetricBitExact)
{
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Mask a = trial % 2 ? random_binary(rng, 16, 16, 0.2) : random_mask(rng, 16, 16);
        const Mask b = random_binary(rng, 16, 16, 0.1);
        EXPECT_EQ(affinity(a, b, tau).value, affinity(b, a, tau).value);
    }
}

TEST(Affinity, MatchesFiniteDifferences)
{
    Rng rng(65);
    for (int trial = 0; trial < 5; ++trial)
    {
        // Values stay clear of tau, so the support sets do not move.
        const Mask pred = random_mask(rng, 10, 10).unaryExpr(
            [](double v) { return v < 0.5 ? 0.0 : 0.1 + v; });
        const Mask gt = random_binary(rng, 10, 10, 0.2);
        const Mask numeric = numeric_gradient(
            pred, [&](const Mask& p) { return affinity(p, gt, tau).value; }, 1e-6);
        EXPECT_LT(max_rel(affinity(pred, gt, tau).d_mask, numeric), 1e-6);
    }
}

TEST(Affinity, Errors)
{
    EXPECT_THROW(affinity(Mask::Zero(2, 2), Mask::Zero(3, 2), tau), ShapeMismatch);
}

TEST(TotalLoss, ZeroLambdaIsBceSum)
{
    Rng rng(71);
    std::vector<Mask> preds;
    std::vector<Mask> gts;
    double want = 0.0;
    for (int v = 0; v < 3; ++v)
    {
        preds.push_back(random_mask(rng, 8, 8));
        gts.push_back(random_binary(rng, 8, 8, 0.3));
        want += bce(preds.back(), gts.back(), eps).value;
    }
    LossConfig cfg;
    cfg.lambda_aff = 0;
    const LossValue l = total_loss(preds, gts, cfg);
    EXPECT_NEAR(l.total, want, 1e-12 * want);
    EXPECT_EQ(l.total, l.bce);
    EXPECT_GT(l.affinity, 0.0);
}

TEST(TotalLoss, PerfectBinaryPrediction)
{
    Rng rng(72);
    const Mask gt = random_binary(rng, 8, 8, 0.4);
    const std::vector<Mask> gts{gt};
    const std::vector<Mask> preds{gt};
    const LossValue l = total_loss(preds, gts, LossConfig{});
    EXPECT_EQ(l.affinity, 0.0);
    EXPECT_NEAR(l.total, -64 * std::log(1 - eps), 1e-12);
}

TEST(TotalLoss, CombinesTerms)
{
    Rng rng(73);
    const std::vector<Mask> preds{random_mask(rng, 8, 8), random_mask(rng, 8, 8)};
    const std::vector<Mask> gts{random_binary(rng, 8, 8, 0.3), random_binary(rng, 8, 8, 0.3)};
    LossConfig cfg;
    cfg.lambda_aff = 2.5;
    const LossValue l = total_loss(preds, gts, cfg);
    EXPECT_EQ(l.total, l.bce + 2.5 * l.affinity);
    ASSERT_EQ(l.d_mask.size(), 2u);
}

TEST(TotalLoss, MatchesFiniteDifferences)
{
    Rng rng(74);
    std::vector<Mask> preds;
    std::vector<Mask> gts;
    for (int v = 0; v < 4; ++v)
    {
        preds.push_back(random_mask(rng, 8, 8).array() * 0.9 + 0.05);
        gts.push_back(random_binary(rng, 8, 8, 0.3));
    }
    const LossConfig cfg;
    const LossValue l = total_loss(preds, gts, cfg);
    for (int v = 0; v < 4; ++v)
    {
        const Mask numeric = numeric_gradient(
            preds[static_cast<std::size_t>(v)],
            [&](const Mask& p) {
                std::vector<Mask> moved = preds;
                moved[static_cast<std::size_t>(v)] = p;
                return total_loss(moved, gts, cfg).total;
            },
            1e-6);
        EXPECT_LT(max_rel(l.d_mask[static_cast<std::size_t>(v)], numeric), 1e-5);
    }
}

TEST(TotalLoss, Errors)
{
    const std::vector<Mask> two{Mask::Zero(2, 2), Mask::Zero(2, 2)};
    const std::vector<Mask> one{Mask::Zero(2, 2)};
    EXPECT_THROW(total_loss(two, one, LossConfig{}), ShapeMismatch);
    LossConfig bad;
    bad.lambda_aff = -1;
    EXPECT_THROW(total_loss(one, one, bad), InvalidArgument);
}

} // namespace
} // namespace pointsil
