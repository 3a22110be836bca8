#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pointsil/chamfer.hpp"
#include "pointsil/dataio.hpp"
#include "pointsil/gradcheck.hpp"
#include "pointsil/io.hpp"
#include "pointsil/optimize.hpp"
#include "pointsil/projection.hpp"
#include "pointsil/version.hpp"

namespace pointsil::cli
{

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double report_scale = 1000.0;

struct Invocation
{
    std::vector<std::string> args;
    Clock::time_point start;
};

struct Manifest
{
    std::string command;
    json config = json::object();
    std::uint64_t seed{0};
    json inputs = json::object();
    json outputs = json::array();
};

void write_manifest(const fs::path& path, const Invocation& inv, const Manifest& m)
{
    json doc;
    doc["format"] = "pointsil-manifest";
    doc["version"] = 1;
    doc["command"] = m.command;
    doc["args"] = inv.args;
    doc["cwd"] = fs::current_path().string();
    doc["config"] = m.config;
    doc["seed"] = m.seed;
    doc["inputs"] = m.inputs;
    doc["outputs"] = m.outputs;
    doc["library_version"] = version;
    doc["wall_seconds"] =
        std::chrono::duration<double>(Clock::now() - inv.start).count();
    std::ofstream out(path);
    if (!out)
    {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
}

fs::path manifest_beside(const fs::path& artifact)
{
    fs::path p = artifact;
    p += ".manifest.json";
    return p;
}

// Output paths in a manifest are relative to the manifest's directory.
std::string relative_to(const fs::path& manifest, const fs::path& artifact)
{
    return fs::proximate(fs::absolute(artifact), fs::absolute(manifest).parent_path())
        .generic_string();
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
    {
        throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

// Creates the directory a single-file output goes into.
void ensure_parent(const fs::path& file)
{
    if (file.has_parent_path())
    {
        ensure_dir(file.parent_path());
    }
}

std::string fmt(double v)
{
    return io::format_double(v);
}

std::pair<Index, Index> image_size(const std::vector<Index>& size)
{
    const Index h = size.at(0);
    const Index w = size.size() > 1 ? size[1] : h;
    return {h, w};
}

const View& pick_view(const std::vector<View>& views, std::size_t index,
                      const std::string& path)
{
    if (index >= views.size())
    {
        throw InvalidArgument("view index " + std::to_string(index) + " out of range: '" +
                              path + "' holds " + std::to_string(views.size()) +
                              " view(s)");
    }
    return views[index];
}

double max_displacement(const PointCloud& a, const PointCloud& b)
{
    return a.rows() == 0 ? 0.0 : (a - b).rowwise().norm().maxCoeff();
}

void print_chamfer(const std::string& label, const ChamferTerms& ch)
{
    std::cout << label << " total " << fmt(ch.total) << " fwd " << fmt(ch.forward)
              << " bwd " << fmt(ch.backward) << '\n';
    std::cout << label << "_x1000 total " << fmt(report_scale * ch.total) << " fwd "
              << fmt(report_scale * ch.forward) << " bwd "
              << fmt(report_scale * ch.backward) << '\n';
}

//------------------------------------------------------------------------------
// Fit core, shared by fit and sweep
//------------------------------------------------------------------------------

struct FitArgs
{
    std::string shape;
    std::string target;
    std::string rig;
    std::vector<std::string> masks;
    int views{4};
    std::vector<Index> size{64};
    double sigma_sq{0.4};
    double lambda{1.0};
    int iters{2000};
    std::uint64_t seed{0};
    double lr{5e-3};
    Index points{512};
    Index dense{100000};
    bool early_stop{false};
    std::string out;
};

json fit_config_json(const FitArgs& a)
{
    const auto [h, w] = image_size(a.size);
    return {{"shape", a.shape},   {"target", a.target},  {"rig", a.rig},
            {"masks", a.masks},   {"views", a.views},    {"height", h},
            {"width", w},         {"sigma_sq", a.sigma_sq}, {"lambda", a.lambda},
            {"iterations", a.iters}, {"learning_rate", a.lr}, {"points", a.points},
            {"dense", a.dense},   {"early_stop", a.early_stop}};
}

struct FitOutcome
{
    std::vector<View> views;
    std::vector<Mask> gts;
    std::optional<PointCloud> reference;
    std::optional<PointCloud> surface;
    FitReport report;
    std::vector<Mask> rendered;
};

FitOutcome run_fit(const FitArgs& a)
{
    if (!a.shape.empty() && !a.target.empty())
    {
        throw InvalidArgument("--shape and --target are mutually exclusive");
    }
    FitOutcome o;
    if (!a.shape.empty())
    {
        const ShapeSample s =
            generate_shape(ShapeSpec{parse_shape_kind(a.shape), a.points, a.dense, a.seed});
        o.reference = s.sparse;
        o.surface = s.dense;
    }
    else if (!a.target.empty())
    {
        const PointCloud dense = io::load_cloud(a.target);
        o.reference = farthest_point_sampling(dense, std::min(a.points, dense.rows()));
        o.surface = dense;
    }

    if (!a.rig.empty())
    {
        o.views = io::load_rig(a.rig);
    }
    else
    {
        const auto [h, w] = image_size(a.size);
        RigSpec rig;
        rig.n_views = a.views;
        rig.height = h;
        rig.width = w;
        rig.seed = a.seed;
        o.views = sample_views(rig);
    }

    if (!a.masks.empty())
    {
        if (a.masks.size() != o.views.size())
        {
            throw ShapeMismatch(std::to_string(a.masks.size()) + " mask file(s) for " +
                                std::to_string(o.views.size()) + " view(s)");
        }
        for (const std::string& p : a.masks)
        {
            o.gts.push_back(io::load_pgm(p));
        }
    }
    else if (o.surface)
    {
        for (const View& v : o.views)
        {
            o.gts.push_back(gt_mask(*o.surface, v));
        }
    }
    else
    {
        throw InvalidArgument("need --shape, --target or --masks for supervision");
    }

    FitConfig cfg;
    cfg.iterations = a.iters;
    cfg.loss.lambda_aff = a.lambda;
    cfg.kernel = KernelConfig::with_variance(a.sigma_sq);
    cfg.seed = a.seed;
    cfg.adam.learning_rate = a.lr;
    cfg.early_stop = a.early_stop;

    const PointCloud init = random_init(a.points, a.seed);
    o.report = fit(init, o.views, o.gts, cfg, o.reference ? &*o.reference : nullptr);
    for (const View& v : o.views)
    {
        o.rendered.push_back(render(transform(o.report.final_cloud, v), v.height, v.width,
                                    cfg.kernel));
    }
    return o;
}

double mean_view_l1(const std::vector<Mask>& preds, const std::vector<Mask>& gts)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
    {
        sum += mean_l1(preds[i], gts[i]);
    }
    return sum / static_cast<double>(preds.size());
}

// Pixels inside the ground-truth silhouette that the rendering leaves uncovered.
Index total_holes(const std::vector<Mask>& preds, const std::vector<Mask>& gts)
{
    Index n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
    {
        n += count_uncovered(preds[i], gts[i]);
    }
    return n;
}

//------------------------------------------------------------------------------
// Commands
//------------------------------------------------------------------------------

struct RenderArgs
{
    std::string cloud;
    std::string camera;
    std::size_t view{0};
    double sigma_sq{0.4};
    std::string out;
    bool discrete{false};
    bool exact{false};
};

int cmd_render(const RenderArgs& a, const Invocation& inv)
{
    const PointCloud pc = io::load_cloud(a.cloud);
    const std::vector<View> views = io::load_rig(a.camera);
    const View& v = pick_view(views, a.view, a.camera);
    const CamPoints cam = transform(pc, v);
    ensure_parent(a.out);
    if (a.discrete)
    {
        io::save_pgm(a.out, rasterize_discrete(cam, v.height, v.width), 255);
    }
    else
    {
        const KernelConfig kernel =
            a.exact ? KernelConfig::exact(a.sigma_sq) : KernelConfig::with_variance(a.sigma_sq);
        io::save_pgm(a.out, render(cam, v.height, v.width, kernel), 65535);
    }
    Manifest m;
    m.command = "render";
    m.config = {{"view", a.view},
                {"sigma_sq", a.sigma_sq},
                {"discrete", a.discrete},
                {"exact", a.exact}};
    m.inputs = {{"cloud", a.cloud}, {"camera", a.camera}};
    m.outputs = {relative_to(manifest_beside(a.out), a.out)};
    write_manifest(manifest_beside(a.out), inv, m);
    return 0;
}

int cmd_fit(const FitArgs& a, const Invocation& inv)
{
    const fs::path dir = a.out;
    ensure_dir(dir);
    const FitOutcome o = run_fit(a);

    Manifest m;
    m.command = "fit";
    m.config = fit_config_json(a);
    m.seed = a.seed;
    m.inputs = {{"target", a.target}, {"rig", a.rig}, {"masks", a.masks}};

    io::save_trace_csv(dir / "trace.csv", o.report.trace);
    io::save_xyz(dir / "final.xyz", o.report.final_cloud);
    io::save_rig(dir / "rig.json", o.views);
    m.outputs = {"trace.csv", "final.xyz", "rig.json"};
    for (std::size_t i = 0; i < o.views.size(); ++i)
    {
        const std::string gt = "gt_" + std::to_string(i) + ".pgm";
        const std::string pred = "pred_" + std::to_string(i) + ".pgm";
        io::save_pgm(dir / gt, o.gts[i], 255);
        io::save_pgm(dir / pred, o.rendered[i], 65535);
        m.outputs.push_back(gt);
        m.outputs.push_back(pred);
    }
    m.config["lambda_decay_iteration"] =
        o.report.lambda_decay_iteration ? json(*o.report.lambda_decay_iteration) : json();
    write_manifest(dir / "manifest.json", inv, m);

    const TraceRow& last = o.report.trace.back();
    std::cout << "final_loss total " << fmt(last.total) << " bce " << fmt(last.bce)
              << " affinity " << fmt(last.affinity) << '\n';
    if (o.reference)
    {
        // Forward is target to prediction.
        print_chamfer("chamfer", chamfer_terms(*o.reference, o.report.final_cloud));
        std::cout << "outliers " << count_outliers(o.report.final_cloud, *o.surface)
                  << '\n';
    }
    return 0;
}

struct TsoArgs
{
    std::string init;
    std::string camera;
    std::size_t view{0};
    std::string gt;
    std::string reference;
    double gamma{1e6};
    int iters{50};
    double lr{5e-4};
    double sigma_sq{0.4};
    std::string out;
};

int cmd_tso(const TsoArgs& a, const Invocation& inv)
{
    const fs::path dir = a.out;
    ensure_dir(dir);
    const PointCloud init = io::load_cloud(a.init);
    const std::vector<View> views = io::load_rig(a.camera);
    const View& v = pick_view(views, a.view, a.camera);
    const Mask gt = io::load_pgm(a.gt);
    std::optional<PointCloud> reference;
    if (!a.reference.empty())
    {
        reference = io::load_cloud(a.reference);
    }

    FitConfig cfg = tso_defaults();
    cfg.gamma = a.gamma;
    cfg.iterations = a.iters;
    cfg.adam.learning_rate = a.lr;
    cfg.kernel = KernelConfig::with_variance(a.sigma_sq);
    const FitReport r = tso_direct(init, v, gt, cfg, reference ? &*reference : nullptr);

    const Mask before = render(transform(init, v), v.height, v.width, cfg.kernel);
    const Mask after = render(transform(r.final_cloud, v), v.height, v.width, cfg.kernel);
    const double bce_before = bce(before, gt, cfg.loss.bce_epsilon).value;
    const double bce_after = bce(after, gt, cfg.loss.bce_epsilon).value;

    io::save_xyz(dir / "before.xyz", init);
    io::save_xyz(dir / "after.xyz", r.final_cloud);
    io::save_pgm(dir / "before.pgm", before, 65535);
    io::save_pgm(dir / "after.pgm", after, 65535);
    io::save_trace_csv(dir / "trace.csv", r.trace);

    Manifest m;
    m.command = "tso";
    m.config = {{"view", a.view},       {"gamma", a.gamma},      {"iterations", a.iters},
                {"learning_rate", a.lr}, {"sigma_sq", a.sigma_sq}};
    m.inputs = {{"init", a.init}, {"camera", a.camera}, {"gt_mask", a.gt},
                {"reference", a.reference}};
    m.outputs = {"before.xyz", "after.xyz", "before.pgm", "after.pgm", "trace.csv"};
    write_manifest(dir / "manifest.json", inv, m);

    std::cout << "bce before " << fmt(bce_before) << " after " << fmt(bce_after) << '\n';
    std::cout << "displacement total " << fmt((r.final_cloud - init).norm()) << " max_point "
              << fmt(max_displacement(init, r.final_cloud)) << '\n';
    if (reference)
    {
        std::cout << "chamfer before " << fmt(chamfer(*reference, init)) << " after "
                  << fmt(chamfer(*reference, r.final_cloud)) << '\n';
    }
    return 0;
}

struct EvalArgs
{
    std::string a;
    std::string b;
    std::optional<Index> fps;
};

int cmd_eval(const EvalArgs& a)
{
    PointCloud pa = io::load_cloud(a.a);
    PointCloud pb = io::load_cloud(a.b);
    if (a.fps)
    {
        pa = farthest_point_sampling(pa, *a.fps);
        pb = farthest_point_sampling(pb, *a.fps);
    }
    print_chamfer("chamfer", chamfer_terms(pa, pb));
    return 0;
}

struct GradcheckArgs
{
    Index n{16};
    Index size{32};
    int views{2};
    std::uint64_t seed{0};
    double step{1e-4};
    double sigma_sq{0.4};
    double lambda{1.0};
    bool break_gradient{false};
};

int cmd_gradcheck(const GradcheckArgs& a)
{
    if (a.n == 0)
    {
        std::cout << "vacuous pass: no points to check\n";
        return 0;
    }
    LossConfig loss;
    loss.lambda_aff = a.lambda;
    const KernelConfig kernel = KernelConfig::with_variance(a.sigma_sq);
    GradcheckOptions opts;
    opts.step = a.step;
    opts.break_gradient = a.break_gradient;
    const GradcheckInstance inst =
        make_gradcheck_instance(a.n, a.size, a.views, a.seed, loss, kernel, opts);
    const GradcheckReport r =
        gradcheck(inst.points, inst.views, inst.gt_masks, loss, kernel, opts);

    std::cout << "max_rel_error " << fmt(r.max_rel_error) << '\n'
              << "mean_rel_error " << fmt(r.mean_rel_error) << '\n'
              << "flagged " << r.n_flagged << " of " << r.entries.size() << '\n'
              << "redraws " << inst.redraws << '\n';
    if (r.passed())
    {
        return 0;
    }
    const GradcheckEntry& e = r.entries.at(*r.worst);
    std::cerr << "gradcheck failed: worst coordinate point " << e.point << " axis "
              << e.axis << " analytic " << fmt(e.analytic) << " numeric "
              << fmt(e.numeric) << " rel_error " << fmt(e.rel_error) << '\n';
    return 1;
}

struct SweepArgs
{
    std::string axis;
    std::vector<double> values;
    std::string cloud;
    FitArgs fit;
};

int cmd_sweep(const SweepArgs& a, const Invocation& inv)
{
    if (a.values.size() < 2)
    {
        throw InvalidArgument("sweep needs at least two --values");
    }
    if (a.fit.shape.empty())
    {
        throw InvalidArgument("sweep needs --shape for its ground-truth oracle");
    }
    const fs::path dir = a.fit.out;
    ensure_dir(dir);

    std::ostringstream csv;
    csv << "axis,value,l1,holes,chamfer,outliers\n";
    if (a.axis == "sigma-sq")
    {
        FitArgs f = a.fit;
        const ShapeSample s =
            generate_shape(ShapeSpec{parse_shape_kind(f.shape), f.points, f.dense, f.seed});
        const PointCloud fixture = a.cloud.empty() ? s.sparse : io::load_cloud(a.cloud);
        const auto [h, w] = image_size(f.size);
        RigSpec rig;
        rig.n_views = f.views;
        rig.height = h;
        rig.width = w;
        rig.seed = f.seed;
        const std::vector<View> views = sample_views(rig);
        std::vector<Mask> gts;
        for (const View& v : views)
        {
            gts.push_back(gt_mask(s.dense, v));
        }
        for (const double sigma_sq : a.values)
        {
            const KernelConfig kernel = KernelConfig::with_variance(sigma_sq);
            std::vector<Mask> preds;
            for (const View& v : views)
            {
                preds.push_back(render(transform(fixture, v), v.height, v.width, kernel));
            }
            csv << a.axis << ',' << fmt(sigma_sq) << ',' << fmt(mean_view_l1(preds, gts))
                << ',' << total_holes(preds, gts) << ",nan,nan\n";
        }
    }
    else if (a.axis == "views" || a.axis == "lambda")
    {
        for (const double value : a.values)
        {
            FitArgs f = a.fit;
            if (a.axis == "views")
            {
                if (value < 1 || value != std::floor(value))
                {
                    throw InvalidArgument("views axis values must be positive integers");
                }
                f.views = static_cast<int>(value);
            }
            else
            {
                f.lambda = value;
            }
            const FitOutcome o = run_fit(f);
            csv << a.axis << ',' << fmt(value) << ','
                << fmt(mean_view_l1(o.rendered, o.gts)) << ',' << total_holes(o.rendered, o.gts)
                << ',' << fmt(chamfer(*o.reference, o.report.final_cloud)) << ','
                << count_outliers(o.report.final_cloud, *o.surface) << '\n';
        }
    }
    else
    {
        throw InvalidArgument("unknown sweep axis '" + a.axis +
                              "' (expected sigma-sq, views or lambda)");
    }

    {
        std::ofstream out(dir / "sweep.csv");
        if (!out)
        {
            throw Error("cannot write '" + (dir / "sweep.csv").string() + "'");
        }
        out << csv.str();
    }
    std::cout << csv.str();

    Manifest m;
    m.command = "sweep";
    m.config = fit_config_json(a.fit);
    m.config["axis"] = a.axis;
    m.config["values"] = a.values;
    m.seed = a.fit.seed;
    m.inputs = {{"cloud", a.cloud}};
    m.outputs = {"sweep.csv"};
    write_manifest(dir / "manifest.json", inv, m);
    return 0;
}

struct ShapeArgs
{
    std::string shape;
    Index points{1024};
    Index dense{100000};
    std::uint64_t seed{0};
    std::string out;
    std::string dense_out;
};

int cmd_shape(const ShapeArgs& a, const Invocation& inv)
{
    const ShapeSample s =
        generate_shape(ShapeSpec{parse_shape_kind(a.shape), a.points, a.dense, a.seed});
    ensure_parent(a.out);
    io::save_cloud(a.out, s.sparse);
    Manifest m;
    m.command = "shape";
    m.config = {{"shape", a.shape}, {"points", a.points}, {"dense", a.dense}};
    m.seed = a.seed;
    m.outputs = {relative_to(manifest_beside(a.out), a.out)};
    if (!a.dense_out.empty())
    {
        ensure_parent(a.dense_out);
        io::save_cloud(a.dense_out, s.dense);
        m.outputs.push_back(relative_to(manifest_beside(a.out), a.dense_out));
    }
    write_manifest(manifest_beside(a.out), inv, m);
    return 0;
}

struct RigArgs
{
    RigSpec spec;
    std::vector<Index> size{64};
    std::string mode{"perspective"};
    std::string out;
};

int cmd_rig(RigArgs a, const Invocation& inv)
{
    std::tie(a.spec.height, a.spec.width) = image_size(a.size);
    if (a.mode == "perspective")
    {
        a.spec.mode = ProjectionMode::perspective;
    }
    else if (a.mode == "orthographic")
    {
        a.spec.mode = ProjectionMode::orthographic;
    }
    else
    {
        throw InvalidArgument("unknown projection mode '" + a.mode + "'");
    }
    ensure_parent(a.out);
    io::save_rig(a.out, sample_views(a.spec));
    Manifest m;
    m.command = "rig";
    m.config = {{"views", a.spec.n_views},
                {"height", a.spec.height},
                {"width", a.spec.width},
                {"distance", a.spec.distance},
                {"focal", a.spec.resolved_focal()},
                {"elevation_min", a.spec.elevation_min_deg},
                {"elevation_max", a.spec.elevation_max_deg},
                {"mode", a.mode}};
    m.seed = a.spec.seed;
    m.outputs = {relative_to(manifest_beside(a.out), a.out)};
    write_manifest(manifest_beside(a.out), inv, m);
    return 0;
}

struct GtMaskArgs
{
    std::string cloud;
    std::string camera;
    std::size_t view{0};
    std::string out;
};

int cmd_gtmask(const GtMaskArgs& a, const Invocation& inv)
{
    const PointCloud dense = io::load_cloud(a.cloud);
    const std::vector<View> views = io::load_rig(a.camera);
    ensure_parent(a.out);
    io::save_pgm(a.out, gt_mask(dense, pick_view(views, a.view, a.camera)), 255);
    Manifest m;
    m.command = "gtmask";
    m.config = {{"view", a.view}};
    m.inputs = {{"cloud", a.cloud}, {"camera", a.camera}};
    m.outputs = {relative_to(manifest_beside(a.out), a.out)};
    write_manifest(manifest_beside(a.out), inv, m);
    return 0;
}

void add_fit_options(CLI::App* sub, FitArgs& f)
{
    sub->add_option("--shape", f.shape, "Target shape")
        ->check(CLI::IsMember({"sphere", "cube", "torus", "chair", "airplane",
                               "elongated_box", "chair_primitive",
                               "airplane_primitive"}));
    sub->add_option("--views", f.views, "Number of views")->capture_default_str();
    sub->add_option("--size", f.size, "Image size: H [W]")->expected(1, 2)
        ->capture_default_str();
    sub->add_option("--sigma-sq", f.sigma_sq, "Kernel variance")->capture_default_str();
    sub->add_option("--lambda", f.lambda, "Affinity weight")->capture_default_str();
    sub->add_option("--iters", f.iters, "Iterations")->capture_default_str();
    sub->add_option("--seed", f.seed, "Seed")->capture_default_str();
    sub->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
    sub->add_option("--points", f.points, "Points in the fitted cloud")
        ->capture_default_str();
    sub->add_option("--dense", f.dense, "Oracle surface samples")->capture_default_str();
    sub->add_option("--out", f.out, "Output directory")->required();
}

} // namespace

int run(int argc, char** argv)
{
    Invocation inv;
    inv.start = Clock::now();
    for (int i = 1; i < argc; ++i)
    {
        inv.args.emplace_back(argv[i]);
    }

    CLI::App app{"Point cloud reconstruction from silhouettes"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    std::function<int()> action;

    RenderArgs render_args;
    auto* render_cmd = app.add_subcommand("render", "Render a cloud to a mask");
    render_cmd->add_option("--cloud", render_args.cloud, "Point cloud (.xyz or .ply)")
        ->required();
    render_cmd->add_option("--camera", render_args.camera, "Camera rig file")->required();
    render_cmd->add_option("--view", render_args.view, "View index")->capture_default_str();
    render_cmd->add_option("--sigma-sq", render_args.sigma_sq, "Kernel variance")
        ->capture_default_str();
    render_cmd->add_option("--out", render_args.out, "Output PGM")->required();
    render_cmd->add_flag("--discrete", render_args.discrete, "Nearest-pixel rasterization");
    render_cmd->add_flag("--exact", render_args.exact, "Disable kernel truncation");
    render_cmd->callback([&] { action = [&] { return cmd_render(render_args, inv); }; });

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a random cloud to multi-view masks");
    add_fit_options(fit_cmd, fit_args);
    fit_cmd->add_option("--target", fit_args.target, "Target surface cloud");
    fit_cmd->add_option("--rig", fit_args.rig, "Camera rig file");
    fit_cmd->add_option("--masks", fit_args.masks, "Ground-truth masks, one per view");
    fit_cmd->add_flag("--early-stop", fit_args.early_stop, "Stop on a flat loss");
    fit_cmd->callback([&] { action = [&] { return cmd_fit(fit_args, inv); }; });

    TsoArgs tso_args;
    auto* tso_cmd = app.add_subcommand("tso", "Test-stage refinement against one view");
    tso_cmd->add_option("--init", tso_args.init, "Initial cloud")->required();
    tso_cmd->add_option("--camera", tso_args.camera, "Camera rig file")->required();
    tso_cmd->add_option("--view", tso_args.view, "View index")->capture_default_str();
    tso_cmd->add_option("--gt-mask", tso_args.gt, "Ground-truth mask")->required();
    tso_cmd->add_option("--reference", tso_args.reference, "Cloud for Chamfer reporting");
    tso_cmd->add_option("--gamma", tso_args.gamma, "Anchor weight")->capture_default_str();
    tso_cmd->add_option("--iters", tso_args.iters, "Iterations")->capture_default_str();
    tso_cmd->add_option("--lr", tso_args.lr, "Adam learning rate")->capture_default_str();
    tso_cmd->add_option("--sigma-sq", tso_args.sigma_sq, "Kernel variance")
        ->capture_default_str();
    tso_cmd->add_option("--out", tso_args.out, "Output directory")->required();
    tso_cmd->callback([&] { action = [&] { return cmd_tso(tso_args, inv); }; });

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Chamfer distance between two clouds");
    eval_cmd->add_option("cloud-a", eval_args.a, "First cloud (forward = A to B)")
        ->required();
    eval_cmd->add_option("cloud-b", eval_args.b, "Second cloud")->required();
    eval_cmd->add_option("--fps", eval_args.fps, "Farthest point sample both to K");
    eval_cmd->callback([&] { action = [&] { return cmd_eval(eval_args); }; });

    GradcheckArgs gc_args;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    gc_cmd->add_option("--n", gc_args.n, "Points")->capture_default_str();
    gc_cmd->add_option("--size", gc_args.size, "Image size")->capture_default_str();
    gc_cmd->add_option("--views", gc_args.views, "Views")->capture_default_str();
    gc_cmd->add_option("--seed", gc_args.seed, "Seed")->capture_default_str();
    gc_cmd->add_option("--step", gc_args.step, "Central difference step")
        ->capture_default_str();
    gc_cmd->add_option("--sigma-sq", gc_args.sigma_sq, "Kernel variance")
        ->capture_default_str();
    gc_cmd->add_option("--lambda", gc_args.lambda, "Affinity weight")->capture_default_str();
    gc_cmd->add_flag("--break-gradient", gc_args.break_gradient, "Corrupt the gradient");
    gc_cmd->callback([&] { action = [&] { return cmd_gradcheck(gc_args); }; });

    SweepArgs sweep_args;
    sweep_args.fit.points = 1024;
    auto* sweep_cmd = app.add_subcommand("sweep", "Metric versus one parameter");
    add_fit_options(sweep_cmd, sweep_args.fit);
    sweep_cmd->add_option("--axis", sweep_args.axis, "Swept parameter")
        ->required()
        ->check(CLI::IsMember({"sigma-sq", "views", "lambda"}));
    sweep_cmd->add_option("--values", sweep_args.values, "Axis values")->required();
    sweep_cmd->add_option("--cloud", sweep_args.cloud, "Fixture cloud for sigma-sq");
    sweep_cmd->callback([&] { action = [&] { return cmd_sweep(sweep_args, inv); }; });

    ShapeArgs shape_args;
    auto* shape_cmd = app.add_subcommand("shape", "Sample a synthetic shape");
    shape_cmd->add_option("--shape", shape_args.shape, "Shape name")->required();
    shape_cmd->add_option("--points", shape_args.points, "Points")->capture_default_str();
    shape_cmd->add_option("--dense", shape_args.dense, "Dense oracle points")
        ->capture_default_str();
    shape_cmd->add_option("--seed", shape_args.seed, "Seed")->capture_default_str();
    shape_cmd->add_option("--out", shape_args.out, "Sparse cloud output")->required();
    shape_cmd->add_option("--dense-out", shape_args.dense_out, "Dense cloud output");
    shape_cmd->callback([&] { action = [&] { return cmd_shape(shape_args, inv); }; });

    RigArgs rig_args;
    auto* rig_cmd = app.add_subcommand("rig", "Sample a camera rig");
    rig_cmd->add_option("--views", rig_args.spec.n_views, "Views")->capture_default_str();
    rig_cmd->add_option("--size", rig_args.size, "Image size: H [W]")->expected(1, 2);
    rig_cmd->add_option("--seed", rig_args.spec.seed, "Seed")->capture_default_str();
    rig_cmd->add_option("--distance", rig_args.spec.distance, "Camera distance")
        ->capture_default_str();
    rig_cmd->add_option("--focal", rig_args.spec.focal, "Focal length in pixels, 0 = auto")
        ->capture_default_str();
    rig_cmd->add_option("--elevation-min", rig_args.spec.elevation_min_deg, "Degrees")
        ->capture_default_str();
    rig_cmd->add_option("--elevation-max", rig_args.spec.elevation_max_deg, "Degrees")
        ->capture_default_str();
    rig_cmd->add_option("--mode", rig_args.mode, "perspective or orthographic")
        ->capture_default_str();
    rig_cmd->add_option("--out", rig_args.out, "Rig file")->required();
    rig_cmd->callback([&] { action = [&] { return cmd_rig(rig_args, inv); }; });

    GtMaskArgs gt_args;
    auto* gt_cmd = app.add_subcommand("gtmask", "Ground-truth silhouette of a dense cloud");
    gt_cmd->add_option("--cloud", gt_args.cloud, "Dense cloud")->required();
    gt_cmd->add_option("--camera", gt_args.camera, "Camera rig file")->required();
    gt_cmd->add_option("--view", gt_args.view, "View index")->capture_default_str();
    gt_cmd->add_option("--out", gt_args.out, "Output PGM")->required();
    gt_cmd->callback([&] { action = [&] { return cmd_gtmask(gt_args, inv); }; });

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e);
    }

    try
    {
        return action();
    }
    catch (const std::exception& e)
    {
        std::cerr << "pointsil: error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace pointsil::cli
