#include "pointsil/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pointsil/dataio.hpp"
#include "pointsil/random.hpp"

namespace pointsil
{

namespace
{

using State = std::vector<std::int64_t>;

// Everything the loss treats as piecewise constant: kernel windows, support
// membership and clamp activity. A perturbation that leaves this unchanged
// stays on one smooth piece of the loss.
State discrete_state(const PointCloud& pc, std::span<const View> views,
                     const LossConfig& loss_cfg, const KernelConfig& kernel)
{
    State state;
    for (const View& view : views)
    {
        CamPoints cam;
        try
        {
            cam = transform(pc, view);
        }
        catch (const PerspectiveDepthError&)
        {
            return {-1};
        }
        for (Index n = 0; n < cam.rows(); ++n)
        {
            const PixelRange cols =
                kernel_window(cam(n, 0), kernel.truncation_radius, view.width);
            const PixelRange rows =
                kernel_window(cam(n, 1), kernel.truncation_radius, view.height);
            state.insert(state.end(), {cols.lo, cols.hi, rows.lo, rows.hi});
        }
        const Mask pred = render(cam, view.height, view.width, kernel);
        const double eps = loss_cfg.bce_epsilon;
        for (Index i = 0; i < pred.size(); ++i)
        {
            const double v = pred.data()[i];
            state.push_back((v > loss_cfg.support_threshold ? 1 : 0) |
                            (v < eps ? 2 : 0) | (v > 1.0 - eps ? 4 : 0));
        }
    }
    return state;
}

bool coordinate_flagged(const PointCloud& pc, Index point, int axis,
                        std::span<const View> views, const LossConfig& loss_cfg,
                        const KernelConfig& kernel, const GradcheckOptions& options,
                        const State& base)
{
    const double margin = std::max(1.0, options.margin_factor) * options.step;
    for (const double offset : {options.step, -options.step, margin, -margin})
    {
        PointCloud moved = pc;
        moved(point, axis) += offset;
        if (discrete_state(moved, views, loss_cfg, kernel) != base)
        {
            return true;
        }
    }
    return false;
}

double total_at(const PointCloud& pc, std::span<const View> views,
                std::span<const Mask> gt_masks, const LossConfig& loss_cfg,
                const KernelConfig& kernel)
{
    std::vector<Mask> preds;
    preds.reserve(views.size());
    for (const View& view : views)
    {
        preds.push_back(render(transform(pc, view), view.height, view.width, kernel));
    }
    return total_loss(preds, gt_masks, loss_cfg).total;
}

} // namespace

double relative_error(double a, double b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

GradcheckReport gradcheck(const PointCloud& pc, std::span<const View> views,
                          std::span<const Mask> gt_masks,
                          const LossConfig& loss_cfg, const KernelConfig& kernel,
                          const GradcheckOptions& options)
{
    if (!(options.step > 0))
    {
        throw InvalidArgument("gradcheck step must be > 0");
    }
    GradcheckReport report;
    if (pc.rows() == 0)
    {
        return report;
    }

    GradBuffer analytic =
        evaluate_objective(pc, views, gt_masks, loss_cfg, kernel).grad;
    if (options.break_gradient)
    {
        analytic = 1.1 * analytic.array() + 1e-3;
    }
    const State base = discrete_state(pc, views, loss_cfg, kernel);

    double sum = 0.0;
    std::size_t counted = 0;
    for (Index n = 0; n < pc.rows(); ++n)
    {
        for (int a = 0; a < 3; ++a)
        {
            PointCloud plus = pc;
            PointCloud minus = pc;
            plus(n, a) += options.step;
            minus(n, a) -= options.step;

            GradcheckEntry e;
            e.point = n;
            e.axis = a;
            e.analytic = analytic(n, a);
            e.flagged = coordinate_flagged(pc, n, a, views, loss_cfg, kernel,
                                           options, base);
            if (e.flagged)
            {
                e.numeric = std::nan("");
                e.rel_error = std::nan("");
                ++report.n_flagged;
            }
            else
            {
                e.numeric = (total_at(plus, views, gt_masks, loss_cfg, kernel) -
                             total_at(minus, views, gt_masks, loss_cfg, kernel)) /
                            (2.0 * options.step);
                e.rel_error = relative_error(e.analytic, e.numeric);
                sum += e.rel_error;
                ++counted;
                if (!report.worst || e.rel_error > report.max_rel_error)
                {
                    report.max_rel_error = e.rel_error;
                    report.worst = report.entries.size();
                }
            }
            report.entries.push_back(e);
        }
    }
    report.mean_rel_error = counted > 0 ? sum / static_cast<double>(counted) : 0.0;
    return report;
}

GradcheckInstance make_gradcheck_instance(Index n_points, Index size,
                                          int n_views, std::uint64_t seed,
                                          const LossConfig& loss_cfg,
                                          const KernelConfig& kernel,
                                          const GradcheckOptions& options)
{
    RigSpec rig;
    rig.n_views = n_views;
    rig.height = size;
    rig.width = size;
    rig.seed = seed;

    GradcheckInstance inst;
    inst.views = sample_views(rig);
    ShapeSpec shape{ShapeKind::sphere, 64, 20000, seed};
    const PointCloud dense = generate_shape(shape).dense;
    for (const View& v : inst.views)
    {
        inst.gt_masks.push_back(gt_mask(dense, v));
    }

    Rng rng(seed, 0x67c);
    auto draw = [&]() {
        Eigen::RowVector3d p;
        do
        {
            p << rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2);
        } while (p.squaredNorm() > 1.44);
        return p;
    };
    inst.points.resize(n_points, 3);
    for (Index n = 0; n < n_points; ++n)
    {
        inst.points.row(n) = draw();
    }

    constexpr int max_rounds = 200;
    for (int round = 0; round < max_rounds; ++round)
    {
        const State base = discrete_state(inst.points, inst.views, loss_cfg, kernel);
        std::set<Index> flagged;
        for (Index n = 0; n < n_points; ++n)
        {
            for (int a = 0; a < 3 && !flagged.contains(n); ++a)
            {
                if (coordinate_flagged(inst.points, n, a, inst.views, loss_cfg,
                                       kernel, options, base))
                {
                    flagged.insert(n);
                }
            }
        }
        if (flagged.empty())
        {
            inst.clean = true;
            break;
        }
        // One point at a time; moving a point can flag its neighbors.
        inst.points.row(*flagged.begin()) = draw();
        ++inst.redraws;
    }
    return inst;
}

} // namespace pointsil
