#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "pointsil/chamfer.hpp"
#include "pointsil/dataio.hpp"
#include "pointsil/random.hpp"

namespace pointsil
{

namespace
{

struct NamedShape
{
    ShapeKind kind;
    const char* name;
};

constexpr NamedShape shape_names[] = {
    {ShapeKind::sphere, "sphere"},
    {ShapeKind::cube, "cube"},
    {ShapeKind::torus, "torus"},
    {ShapeKind::chair, "chair"},
    {ShapeKind::airplane, "airplane"},
    {ShapeKind::elongated_box, "elongated_box"},
    {ShapeKind::chair, "chair_primitive"},
    {ShapeKind::airplane, "airplane_primitive"},
};

PointCloud fibonacci_sphere(Index n)
{
    PointCloud pc(n, 3);
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (Index i = 0; i < n; ++i)
    {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) /
                                   static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * static_cast<double>(i);
        pc.row(i) << r * std::cos(phi), r * std::sin(phi), z;
    }
    return pc;
}

PointCloud sample_torus(Index n, Rng& rng)
{
    constexpr double big = torus_major_radius;
    constexpr double small = torus_minor_radius;
    PointCloud pc(n, 3);
    Index filled = 0;
    while (filled < n)
    {
        const double u = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double v = rng.uniform(0.0, 2.0 * std::numbers::pi);
        // Area element is proportional to (R + r cos v).
        if (rng.uniform() * (big + small) > big + small * std::cos(v))
        {
            continue;
        }
        const double ring = big + small * std::cos(v);
        pc.row(filled++) << ring * std::cos(u), ring * std::sin(u),
            small * std::sin(v);
    }
    return pc;
}

struct Face
{
    Eigen::Vector3d lo;
    Eigen::Vector3d hi; // equal to lo along the fixed axis
    double area;
};

std::vector<Face> faces_of(const std::vector<Box>& boxes)
{
    std::vector<Face> faces;
    for (const Box& b : boxes)
    {
        for (int axis = 0; axis < 3; ++axis)
        {
            const int u = (axis + 1) % 3;
            const int v = (axis + 2) % 3;
            const double area = (b.hi[u] - b.lo[u]) * (b.hi[v] - b.lo[v]);
            for (const double level : {b.lo[axis], b.hi[axis]})
            {
                Face f{b.lo, b.hi, area};
                f.lo[axis] = level;
                f.hi[axis] = level;
                faces.push_back(f);
            }
        }
    }
    return faces;
}

// Largest-remainder apportionment of n samples by face area.
std::vector<Index> allocate(const std::vector<Face>& faces, Index n)
{
    double total = 0.0;
    for (const Face& f : faces)
    {
        total += f.area;
    }
    std::vector<Index> counts(faces.size());
    std::vector<double> remainder(faces.size());
    Index assigned = 0;
    for (std::size_t i = 0; i < faces.size(); ++i)
    {
        const double quota = static_cast<double>(n) * faces[i].area / total;
        counts[i] = static_cast<Index>(std::floor(quota));
        remainder[i] = quota - std::floor(quota);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(faces.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainder[a] > remainder[b];
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned)
    {
        ++counts[order[k % order.size()]];
    }
    return counts;
}

PointCloud sample_boxes(const std::vector<Box>& boxes, Index n, Rng& rng)
{
    const std::vector<Face> faces = faces_of(boxes);
    const std::vector<Index> counts = allocate(faces, n);
    PointCloud pc(n, 3);
    Index row = 0;
    for (std::size_t i = 0; i < faces.size(); ++i)
    {
        for (Index k = 0; k < counts[i]; ++k)
        {
            for (int a = 0; a < 3; ++a)
            {
                pc(row, a) = faces[i].lo[a] == faces[i].hi[a]
                                 ? faces[i].lo[a]
                                 : rng.uniform(faces[i].lo[a], faces[i].hi[a]);
            }
            ++row;
        }
    }
    return pc;
}

Box box(double x0, double x1, double y0, double y1, double z0, double z1)
{
    return {Eigen::Vector3d(x0, y0, z0), Eigen::Vector3d(x1, y1, z1)};
}

PointCloud sample_surface(ShapeKind kind, Index n, Rng& rng)
{
    switch (kind)
    {
    case ShapeKind::sphere:
        return fibonacci_sphere(n);
    case ShapeKind::torus:
        return sample_torus(n, rng);
    default:
        return sample_boxes(shape_boxes(kind), n, rng);
    }
}

} // namespace

ShapeKind parse_shape_kind(std::string_view name)
{
    for (const auto& s : shape_names)
    {
        if (name == s.name)
        {
            return s.kind;
        }
    }
    throw UnknownShape("unknown shape '" + std::string(name) +
                       "' (expected sphere, cube, torus, chair, airplane or "
                       "elongated_box)");
}

const char* to_string(ShapeKind kind)
{
    for (const auto& s : shape_names)
    {
        if (s.kind == kind)
        {
            return s.name;
        }
    }
    return "unknown";
}

void ShapeSpec::validate() const
{
    if (n_points < 1)
    {
        throw InvalidArgument("shape n_points must be >= 1");
    }
    if (dense_n < 10 * n_points)
    {
        throw InvalidArgument("shape dense_n must be >= 10 * n_points");
    }
}

std::vector<Box> shape_boxes(ShapeKind kind)
{
    switch (kind)
    {
    case ShapeKind::cube:
        return {box(-1, 1, -1, 1, -1, 1)};
    case ShapeKind::elongated_box:
        return {box(-1, 1, -0.45, 0.45, -0.35, 0.35)};
    case ShapeKind::chair:
        return {
            box(-0.6, 0.6, -0.6, 0.6, -0.1, 0.05),     // seat
            box(-0.6, 0.6, 0.48, 0.6, 0.05, 1.0),      // back
            box(-0.58, -0.48, -0.58, -0.48, -1.0, -0.1), // legs
            box(0.48, 0.58, -0.58, -0.48, -1.0, -0.1),
            box(-0.58, -0.48, 0.48, 0.58, -1.0, -0.1),
            box(0.48, 0.58, 0.48, 0.58, -1.0, -0.1),
        };
    case ShapeKind::airplane:
        return {
            box(-1.0, 1.0, -0.1, 0.1, -0.08, 0.08),     // fuselage
            box(-0.25, 0.15, -0.95, 0.95, -0.02, 0.02), // wing
            box(0.75, 0.95, -0.3, 0.3, -0.02, 0.02),    // tail
        };
    default:
        throw UnknownShape(std::string(to_string(kind)) + " is not built from boxes");
    }
}

ShapeSample generate_shape(const ShapeSpec& spec)
{
    spec.validate();
    Rng sparse_rng(spec.seed, 1);
    Rng dense_rng(spec.seed, 2);
    ShapeSample out;
    out.sparse = sample_surface(spec.kind, spec.n_points, sparse_rng);
    out.dense = sample_surface(spec.kind, spec.dense_n, dense_rng);
    return out;
}

PointCloud farthest_point_sampling(const PointCloud& pc, Index k)
{
    const std::vector<Index> idx = farthest_point_indices(pc, k);
    PointCloud out(k, 3);
    for (Index i = 0; i < k; ++i)
    {
        out.row(i) = pc.row(idx[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<Index> farthest_point_indices(const PointCloud& pc, Index k)
{
    if (k < 0 || k > pc.rows())
    {
        throw KTooLarge("farthest_point_sampling: k = " + std::to_string(k) +
                        " but the cloud has " + std::to_string(pc.rows()) +
                        " points");
    }
    std::vector<Index> selected;
    if (k == 0)
    {
        return selected;
    }
    selected.reserve(static_cast<std::size_t>(k));

    const Eigen::RowVector3d centroid = pc.colwise().mean();
    Index first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < pc.rows(); ++i)
    {
        const double d = (pc.row(i) - centroid).squaredNorm();
        if (d < best)
        {
            best = d;
            first = i;
        }
    }
    selected.push_back(first);

    Eigen::VectorXd min_dist(pc.rows());
    for (Index i = 0; i < pc.rows(); ++i)
    {
        min_dist[i] = (pc.row(i) - pc.row(first)).squaredNorm();
    }
    while (static_cast<Index>(selected.size()) < k)
    {
        Index next = 0;
        min_dist.maxCoeff(&next); // first maximal index
        selected.push_back(next);
        for (Index i = 0; i < pc.rows(); ++i)
        {
            min_dist[i] = std::min(min_dist[i], (pc.row(i) - pc.row(next)).squaredNorm());
        }
    }
    return selected;
}

Index count_outliers(const PointCloud& pc, const PointCloud& surface,
                     double threshold)
{
    if (pc.rows() == 0)
    {
        return 0;
    }
    const NearestNeighbors nn = nearest_neighbors(pc, surface);
    return static_cast<Index>(std::count_if(nn.dist_sq.begin(), nn.dist_sq.end(),
                                            [&](double d) { return d > threshold; }));
}

} // namespace pointsil
