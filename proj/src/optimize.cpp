#include "pointsil/optimize.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "pointsil/chamfer.hpp"
#include "pointsil/random.hpp"

namespace pointsil
{

std::pair<PointCloud, AdamState> adam_step(const PointCloud& pc,
                                           const GradBuffer& grads,
                                           const AdamState& state)
{
    if (grads.rows() != pc.rows() || state.first_moment.rows() != pc.rows() ||
        state.second_moment.rows() != pc.rows())
    {
        throw ShapeMismatch("adam_step: point, gradient and moment counts differ");
    }
    if (state.step_count < 0)
    {
        throw InvalidArgument("adam_step: negative step count");
    }
    const AdamParams& hp = state.params;
    AdamState next = state;
    next.step_count += 1;
    next.first_moment = hp.beta1 * state.first_moment + (1.0 - hp.beta1) * grads;
    next.second_moment = hp.beta2 * state.second_moment +
                         (1.0 - hp.beta2) * grads.cwiseAbs2();

    const auto t = static_cast<double>(next.step_count);
    const double bias1 = 1.0 - std::pow(hp.beta1, t);
    const double bias2 = 1.0 - std::pow(hp.beta2, t);

    PointCloud out = pc;
    for (Index i = 0; i < pc.rows(); ++i)
    {
        for (Index a = 0; a < 3; ++a)
        {
            const double m_hat = next.first_moment(i, a) / bias1;
            const double v_hat = next.second_moment(i, a) / bias2;
            out(i, a) -= hp.learning_rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
        }
    }
    return {std::move(out), std::move(next)};
}

namespace
{

void check_views(std::span<const View> views, std::span<const Mask> gt_masks)
{
    if (views.empty())
    {
        throw InvalidArgument("at least one view is required");
    }
    if (views.size() != gt_masks.size())
    {
        throw ShapeMismatch(std::to_string(views.size()) + " views but " +
                            std::to_string(gt_masks.size()) + " masks");
    }
    for (std::size_t v = 0; v < views.size(); ++v)
    {
        if (gt_masks[v].rows() != views[v].height ||
            gt_masks[v].cols() != views[v].width)
        {
            throw ShapeMismatch("mask " + std::to_string(v) +
                                " does not match its view dimensions");
        }
        check_mask(gt_masks[v], "ground-truth mask");
    }
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

} // namespace

Objective evaluate_objective(const PointCloud& pc, std::span<const View> views,
                             std::span<const Mask> gt_masks,
                             const LossConfig& loss_cfg,
                             const KernelConfig& kernel)
{
    check_views(views, gt_masks);

    std::vector<CamPoints> cams;
    Objective out;
    cams.reserve(views.size());
    out.rendered.reserve(views.size());
    for (const View& view : views)
    {
        cams.push_back(transform(pc, view));
        out.rendered.push_back(
            render(cams.back(), view.height, view.width, kernel));
    }
    out.loss = total_loss(out.rendered, gt_masks, loss_cfg);

    out.grad = GradBuffer::Zero(pc.rows(), 3);
    for (std::size_t v = 0; v < views.size(); ++v)
    {
        const View& view = views[v];
        const ImageGrad d_cam =
            render_backward(cams[v], view.height, view.width, kernel,
                            out.loss.d_mask[v], out.rendered[v]);
        out.grad += transform_backward(pc, view, d_cam);
    }
    return out;
}

void FitConfig::validate() const
{
    if (iterations < 1)
    {
        throw InvalidArgument("iterations must be >= 1");
    }
    loss.validate();
    kernel.validate();
    if (!(lambda_schedule.decay_factor > 0 && lambda_schedule.decay_factor <= 1))
    {
        throw InvalidArgument("lambda decay factor must lie in (0, 1]");
    }
    if (!(lambda_schedule.plateau_rel_delta >= 0))
    {
        throw InvalidArgument("plateau relative delta must be >= 0");
    }
    if (lambda_schedule.plateau_window < 1)
    {
        throw InvalidArgument("plateau window must be >= 1");
    }
    if (!(gamma >= 0) || !std::isfinite(gamma))
    {
        throw InvalidArgument("gamma must be finite and >= 0");
    }
    if (!(adam.learning_rate > 0))
    {
        throw InvalidArgument("learning rate must be > 0");
    }
}

PointCloud random_init(Index n_points, std::uint64_t seed)
{
    Rng rng(seed, 0x1417);
    PointCloud pc(n_points, 3);
    for (Index i = 0; i < n_points; ++i)
    {
        for (Index a = 0; a < 3; ++a)
        {
            pc(i, a) = rng.uniform(-1.0, 1.0);
        }
    }
    return pc;
}

FitReport fit(const PointCloud& init, std::span<const View> views,
              std::span<const Mask> gt_masks, const FitConfig& cfg,
              const PointCloud* reference)
{
    cfg.validate();
    check_views(views, gt_masks);
    const auto start = std::chrono::steady_clock::now();

    bool visible = false;
    for (const View& view : views)
    {
        visible = visible || any_visible(transform(init, view), view.height,
                                         view.width, cfg.kernel);
    }
    if (!visible)
    {
        throw DegenerateInput("no point projects into any view");
    }

    FitReport report;
    report.config = cfg;
    report.trace.reserve(static_cast<std::size_t>(cfg.iterations));

    LossConfig loss_cfg = cfg.loss;
    PointCloud pc = init;
    AdamState adam = AdamState::fresh(pc.rows(), cfg.adam);

    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    constexpr int early_stop_window = 50;

    for (int it = 0; it < cfg.iterations; ++it)
    {
        Objective obj = evaluate_objective(pc, views, gt_masks, loss_cfg, cfg.kernel);

        TraceRow row;
        row.iteration = it;
        row.total = obj.loss.total;
        row.bce = obj.loss.bce;
        row.affinity = obj.loss.affinity;
        row.chamfer = (reference != nullptr && pc.rows() > 0)
                          ? chamfer(*reference, pc)
                          : std::numeric_limits<double>::quiet_NaN();
        report.trace.push_back(row);

        if (row.total < best * (1.0 - cfg.lambda_schedule.plateau_rel_delta))
        {
            best = row.total;
            since_best = 0;
        }
        else
        {
            ++since_best;
        }
        if (!report.lambda_decay_iteration &&
            since_best >= cfg.lambda_schedule.plateau_window)
        {
            loss_cfg.lambda_aff *= cfg.lambda_schedule.decay_factor;
            report.lambda_decay_iteration = it;
        }

        if (cfg.early_stop && it >= early_stop_window)
        {
            const double past =
                report.trace[static_cast<std::size_t>(it - early_stop_window)].total;
            if (std::abs(row.total - past) <= 1e-6 * std::abs(past))
            {
                report.early_stop_iteration = it;
                break;
            }
        }

        std::tie(pc, adam) = adam_step(pc, obj.grad, adam);
    }

    report.final_cloud = std::move(pc);
    report.wall_seconds = seconds_since(start);
    return report;
}

FitConfig tso_defaults()
{
    FitConfig cfg;
    cfg.iterations = 50;
    cfg.gamma = 1e6;
    cfg.adam.learning_rate = 5e-4;
    return cfg;
}

FitReport tso_direct(const PointCloud& init, const View& view,
                     const Mask& gt_mask, const FitConfig& cfg,
                     const PointCloud* reference)
{
    cfg.validate();
    const std::span<const View> views(&view, 1);
    const std::span<const Mask> masks(&gt_mask, 1);
    check_views(views, masks);
    if (init.rows() == 0)
    {
        throw EmptyCloud("tso_direct: initial cloud is empty");
    }
    const auto start = std::chrono::steady_clock::now();
    if (!any_visible(transform(init, view), view.height, view.width, cfg.kernel))
    {
        throw DegenerateInput("no point projects into the view");
    }

    FitReport report;
    report.config = cfg;
    report.trace.reserve(static_cast<std::size_t>(cfg.iterations));

    const PointCloud& anchor = init;
    PointCloud pc = init;
    AdamState adam = AdamState::fresh(pc.rows(), cfg.adam);

    for (int it = 0; it < cfg.iterations; ++it)
    {
        const CamPoints cam = transform(pc, view);
        const Mask pred = render(cam, view.height, view.width, cfg.kernel);
        const MaskLoss b = bce(pred, gt_mask, cfg.loss.bce_epsilon);
        const ImageGrad d_cam = render_backward(cam, view.height, view.width,
                                                cfg.kernel, b.d_mask, pred);
        const ChamferGradient reg = chamfer_with_gradient(anchor, pc);

        TraceRow row;
        row.iteration = it;
        row.bce = b.value;
        row.affinity = reg.value;
        row.total = b.value + cfg.gamma * reg.value;
        row.chamfer = reference != nullptr
                          ? chamfer(*reference, pc)
                          : std::numeric_limits<double>::quiet_NaN();
        report.trace.push_back(row);

        const GradBuffer grad =
            transform_backward(pc, view, d_cam) + cfg.gamma * reg.grad;
        std::tie(pc, adam) = adam_step(pc, grad, adam);
    }

    report.final_cloud = std::move(pc);
    report.wall_seconds = seconds_since(start);
    return report;
}

} // namespace pointsil
