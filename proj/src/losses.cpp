#include "pointsil/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pointsil/distance_transform.hpp"
#include "pointsil/summation.hpp"

namespace pointsil
{

namespace
{

void check_same_shape(const Mask& a, const Mask& b, const char* who)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
    {
        throw ShapeMismatch(std::string(who) + ": " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
    }
}

BoolMask support_of(const Mask& m, double tau)
{
    return (m.array() > tau).matrix();
}

} // namespace

void LossConfig::validate() const
{
    if (!(lambda_aff >= 0) || !std::isfinite(lambda_aff))
    {
        throw InvalidArgument("lambda_aff must be finite and >= 0");
    }
    if (!(support_threshold >= 0 && support_threshold < 1))
    {
        throw InvalidArgument("support threshold must lie in [0, 1)");
    }
    if (!(bce_epsilon > 0 && bce_epsilon < 0.5))
    {
        throw InvalidArgument("bce_epsilon must lie in (0, 0.5)");
    }
}

MaskLoss bce(const Mask& pred, const Mask& gt, double eps)
{
    check_same_shape(pred, gt, "bce");
    if (!(eps > 0 && eps < 0.5))
    {
        throw InvalidArgument("bce: eps must lie in (0, 0.5)");
    }

    MaskLoss out;
    out.d_mask.resize(pred.rows(), pred.cols());
    CompensatedSum sum;
    for (Index r = 0; r < pred.rows(); ++r)
    {
        for (Index c = 0; c < pred.cols(); ++c)
        {
            const double m = gt(r, c);
            const double raw = pred(r, c);
            const bool clamped = raw < eps || raw > 1.0 - eps;
            const double p = std::clamp(raw, eps, 1.0 - eps);
            double term = 0.0;
            if (m != 0.0)
            {
                term -= m * std::log(p);
            }
            if (m != 1.0)
            {
                term -= (1.0 - m) * std::log1p(-p);
            }
            sum.add(term);
            out.d_mask(r, c) = clamped ? 0.0 : -m / p + (1.0 - m) / (1.0 - p);
        }
    }
    out.value = sum.value();
    return out;
}

MaskLoss affinity(const Mask& pred, const Mask& gt, double tau)
{
    check_same_shape(pred, gt, "affinity");
    const Index width = pred.cols();

    const DistanceField to_gt = distance_transform(support_of(gt, tau));

    // Values at or below tau count as zero, so affinity(M, M) = 0 for any M.
    const Mask pred_w = (pred.array() > tau).select(pred, 0.0);
    const Mask gt_w = (gt.array() > tau).select(gt, 0.0);

    MaskLoss out;
    out.d_mask = Mask::Zero(pred.rows(), pred.cols());
    double* grad = out.d_mask.data();
    const double* p = pred_w.data();
    const double* g = gt_w.data();
    const BoolMask pred_support = support_of(pred, tau);
    const bool* in_pred = pred_support.data();

    // Both sums evaluate d² · (value here · value at nearest support), so
    // swapping the masks swaps the two sums term for term.
    CompensatedSum first;
    if (to_gt.has_support())
    {
        for (Index i = 0; i < pred.size(); ++i)
        {
            const Index r = i / width;
            const Index c = i % width;
            const auto k = static_cast<Index>(to_gt.nearest(r, c));
            const auto d2 = static_cast<double>(to_gt.dist_sq(r, c));
            first.add(d2 * (p[i] * g[k]));
            if (in_pred[i])
            {
                grad[i] += d2 * g[k];
            }
        }
    }
    const DistanceField to_pred = distance_transform(pred_support);
    CompensatedSum second;
    if (to_pred.has_support())
    {
        for (Index i = 0; i < pred.size(); ++i)
        {
            const Index r = i / width;
            const Index c = i % width;
            const auto k = static_cast<Index>(to_pred.nearest(r, c));
            const auto d2 = static_cast<double>(to_pred.dist_sq(r, c));
            second.add(d2 * (g[i] * p[k]));
            grad[k] += d2 * g[i];
        }
    }
    out.value = first.value() + second.value();
    return out;
}

LossValue total_loss(std::span<const Mask> preds, std::span<const Mask> gts,
                     const LossConfig& cfg)
{
    cfg.validate();
    if (preds.size() != gts.size())
    {
        throw ShapeMismatch("total_loss: " + std::to_string(preds.size()) +
                            " predicted masks for " +
                            std::to_string(gts.size()) + " ground-truth masks");
    }
    LossValue out;
    out.d_mask.reserve(preds.size());
    CompensatedSum bce_sum;
    CompensatedSum aff_sum;
    for (std::size_t v = 0; v < preds.size(); ++v)
    {
        MaskLoss b = bce(preds[v], gts[v], cfg.bce_epsilon);
        bce_sum.add(b.value);
        const MaskLoss a = affinity(preds[v], gts[v], cfg.support_threshold);
        aff_sum.add(a.value);
        b.d_mask += cfg.lambda_aff * a.d_mask;
        out.d_mask.push_back(std::move(b.d_mask));
    }
    out.bce = bce_sum.value();
    out.affinity = aff_sum.value();
    out.total = out.bce + cfg.lambda_aff * out.affinity;
    return out;
}

} // namespace pointsil
