///
/// \file optimize.hpp
///
/// First-order fitting of point coordinates to multi-view silhouettes.
///
#ifndef POINTSIL_OPTIMIZE_HPP
#define POINTSIL_OPTIMIZE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pointsil/geometry.hpp"
#include "pointsil/losses.hpp"
#include "pointsil/projection.hpp"

namespace pointsil
{

//------------------------------------------------------------------------------
// Adam
//------------------------------------------------------------------------------

struct AdamParams
{
    double learning_rate{5e-3};
    double beta1{0.9};
    double beta2{0.999};
    double epsilon{1e-8};
};

struct AdamState
{
    Eigen::MatrixX3d first_moment;
    Eigen::MatrixX3d second_moment;
    std::int64_t step_count{0};
    AdamParams params;

    static AdamState fresh(Index n_points, const AdamParams& params = {})
    {
        return {Eigen::MatrixX3d::Zero(n_points, 3),
                Eigen::MatrixX3d::Zero(n_points, 3), 0, params};
    }
};

/// One bias-corrected Adam update.
std::pair<PointCloud, AdamState> adam_step(const PointCloud& pc,
                                           const GradBuffer& grads,
                                           const AdamState& state);

//------------------------------------------------------------------------------
// Multi-view objective
//------------------------------------------------------------------------------

/// Loss and gradient of the combined mask loss over every view.
struct Objective
{
    LossValue loss;
    GradBuffer grad;
    std::vector<Mask> rendered;
};

Objective evaluate_objective(const PointCloud& pc, std::span<const View> views,
                             std::span<const Mask> gt_masks,
                             const LossConfig& loss_cfg,
                             const KernelConfig& kernel);

//------------------------------------------------------------------------------
// Fitting
//------------------------------------------------------------------------------

/// λ is decayed once when the best total loss has not improved by a relative
/// `plateau_rel_delta` for `plateau_window` consecutive iterations.
struct LambdaSchedule
{
    int plateau_window{200};
    double plateau_rel_delta{1e-3};
    double decay_factor{0.02};
};

struct FitConfig
{
    int iterations{2000};
    LossConfig loss;
    KernelConfig kernel;
    LambdaSchedule lambda_schedule;
    std::uint64_t seed{0};
    /// Weight of the Chamfer anchor in tso_direct.
    double gamma{1e6};
    AdamParams adam;
    /// Stop once the total loss changes by less than 1e-6 (relative) over
    /// 50 iterations.
    bool early_stop{false};

    void validate() const;
};

struct TraceRow
{
    int iteration{0};
    double total{0};
    double bce{0};
    double affinity{0};
    /// Chamfer to the reference cloud; NaN without one.
    double chamfer{0};
};

struct FitReport
{
    std::vector<TraceRow> trace;
    PointCloud final_cloud;
    double wall_seconds{0};
    FitConfig config;
    /// Iteration at which λ was decayed, if it was.
    std::optional<int> lambda_decay_iteration;
    /// Set when early stopping ended the run.
    std::optional<int> early_stop_iteration;
};

/// Uniform random cloud in [−1, 1]³.
PointCloud random_init(Index n_points, std::uint64_t seed);

///
/// Multi-view fit: transform → render → loss → render_backward →
/// transform_backward → Adam, for cfg.iterations. Trace row t holds the loss
/// at the points before update t.
///
/// \throws DegenerateInput when no point is visible in any view.
///
FitReport fit(const PointCloud& init, std::span<const View> views,
              std::span<const Mask> gt_masks, const FitConfig& cfg,
              const PointCloud* reference = nullptr);

///
/// Test-stage refinement of a cloud y against a single view:
/// minimizes bce(render(y′), gt) + γ·chamfer(y, y′) over y′, starting at y.
/// The trace's affinity column holds the Chamfer anchor term.
///
FitReport tso_direct(const PointCloud& init, const View& view,
                     const Mask& gt_mask, const FitConfig& cfg,
                     const PointCloud* reference = nullptr);

/// FitConfig defaults for tso_direct: 50 iterations, γ = 1e6, lr = 5e-4.
FitConfig tso_defaults();

} // namespace pointsil

#endif // POINTSIL_OPTIMIZE_HPP
