///
/// \file losses.hpp
///
/// Mask-space losses and their gradients with respect to the predicted mask.
/// All sums are unnormalized (per pixel, summed over views).
///
#ifndef POINTSIL_LOSSES_HPP
#define POINTSIL_LOSSES_HPP

#include <span>
#include <vector>

#include "pointsil/types.hpp"

namespace pointsil
{

struct LossConfig
{
    /// Weight of the affinity term.
    double lambda_aff{1.0};
    /// A pixel belongs to a mask's support when its value exceeds this.
    double support_threshold{1e-3};
    /// Predicted values are clamped to [eps, 1 − eps] inside the logarithms.
    double bce_epsilon{1e-7};

    void validate() const;
};

/// A scalar loss and its gradient with respect to the predicted mask.
struct MaskLoss
{
    double value{0};
    Mask d_mask;
};

struct LossValue
{
    double total{0};
    double bce{0};
    double affinity{0};
    /// One gradient image per view.
    std::vector<Mask> d_mask;
};

/// Binary cross-entropy summed over pixels; gradient is zero where the clamp
/// is active.
MaskLoss bce(const Mask& pred, const Mask& gt, double eps);

///
/// Symmetric nearest-support affinity loss. For every pixel the nearest
/// support pixel of the other mask is found in squared pixel distance; the
/// term is that distance weighted by this pixel's value and the value of the
/// nearest support pixel. An empty support set contributes zero. The gradient
/// holds argmin indices and support membership constant.
///
MaskLoss affinity(const Mask& pred, const Mask& gt, double tau);

/// bce + λ·affinity summed over views, with per-view mask gradients.
LossValue total_loss(std::span<const Mask> preds, std::span<const Mask> gts,
                     const LossConfig& cfg);

} // namespace pointsil

#endif // POINTSIL_LOSSES_HPP
