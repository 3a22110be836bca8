///
/// \file gradcheck.hpp
///
/// Central finite-difference check of the full analytic gradient chain
/// (transform → render → losses and back).
///
#ifndef POINTSIL_GRADCHECK_HPP
#define POINTSIL_GRADCHECK_HPP

#include <optional>
#include <span>
#include <vector>

#include "pointsil/optimize.hpp"

namespace pointsil
{

struct GradcheckOptions
{
    double step{1e-4};
    /// Coordinates whose perturbation by ±margin_factor·step changes a support
    /// bit, clamp state or kernel window are flagged instead of compared.
    double margin_factor{2.0};
    /// Test hook: corrupts the analytic gradient.
    bool break_gradient{false};
};

struct GradcheckEntry
{
    Index point{0};
    int axis{0};
    double analytic{0};
    double numeric{0};
    double rel_error{0};
    bool flagged{false};
};

struct GradcheckReport
{
    std::vector<GradcheckEntry> entries;
    /// Over unflagged coordinates.
    double max_rel_error{0};
    double mean_rel_error{0};
    std::size_t n_flagged{0};
    /// Entry with the largest unflagged error.
    std::optional<std::size_t> worst;

    bool passed(double tolerance = 1e-4) const
    {
        return max_rel_error < tolerance;
    }
};

/// |a − b| / max(|a|, |b|, 1e-8).
double relative_error(double a, double b);

GradcheckReport gradcheck(const PointCloud& pc, std::span<const View> views,
                          std::span<const Mask> gt_masks,
                          const LossConfig& loss_cfg, const KernelConfig& kernel,
                          const GradcheckOptions& options = {});

/// A seeded small problem for gradient checks.
struct GradcheckInstance
{
    PointCloud points;
    std::vector<View> views;
    std::vector<Mask> gt_masks;
    /// Number of point redraws needed to clear the discontinuity margins.
    int redraws{0};
    /// True when no coordinate is flagged.
    bool clean{false};
};

///
/// Sphere silhouettes from `n_views` random cameras at size×size, and
/// `n_points` random points inside the ball of radius 1.2. Points whose
/// coordinates fall inside a discontinuity margin are redrawn until none do.
///
GradcheckInstance make_gradcheck_instance(Index n_points, Index size,
                                          int n_views, std::uint64_t seed,
                                          const LossConfig& loss_cfg,
                                          const KernelConfig& kernel,
                                          const GradcheckOptions& options = {});

} // namespace pointsil

#endif // POINTSIL_GRADCHECK_HPP
