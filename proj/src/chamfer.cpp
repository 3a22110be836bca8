#include "pointsil/chamfer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pointsil/summation.hpp"

namespace pointsil
{

namespace
{

inline double squared_distance(const PointCloud& a, Index i, const PointCloud& b,
                               Index j)
{
    const double dx = a(i, 0) - b(j, 0);
    const double dy = a(i, 1) - b(j, 1);
    const double dz = a(i, 2) - b(j, 2);
    return dx * dx + dy * dy + dz * dz;
}

struct Best
{
    double dist_sq{std::numeric_limits<double>::infinity()};
    Index index{-1};

    void offer(double d2, Index j)
    {
        if (d2 < dist_sq || (d2 == dist_sq && j < index))
        {
            dist_sq = d2;
            index = j;
        }
    }
};

NearestNeighbors brute_force(const PointCloud& queries, const PointCloud& targets)
{
    NearestNeighbors out;
    out.dist_sq.resize(static_cast<std::size_t>(queries.rows()));
    out.index.resize(static_cast<std::size_t>(queries.rows()));
    for (Index i = 0; i < queries.rows(); ++i)
    {
        Best best;
        for (Index j = 0; j < targets.rows(); ++j)
        {
            best.offer(squared_distance(queries, i, targets, j), j);
        }
        out.dist_sq[static_cast<std::size_t>(i)] = best.dist_sq;
        out.index[static_cast<std::size_t>(i)] = best.index;
    }
    return out;
}

// Uniform bucket grid over the target cloud, roughly two points per cell.
class UniformGrid
{
public:
    explicit UniformGrid(const PointCloud& targets) : targets_(targets)
    {
        lo_ = targets.colwise().minCoeff().transpose();
        const Eigen::Vector3d extent =
            targets.colwise().maxCoeff().transpose() - lo_;
        const double longest = extent.maxCoeff();
        const double per_axis =
            std::max(1.0, std::cbrt(static_cast<double>(targets.rows()) / 2.0));
        cell_ = longest > 0 ? longest / per_axis : 1.0;
        for (int a = 0; a < 3; ++a)
        {
            dims_[a] = std::clamp<Index>(
                static_cast<Index>(std::floor(extent[a] / cell_)) + 1, 1, 512);
        }

        const Index n_cells = dims_[0] * dims_[1] * dims_[2];
        start_.assign(static_cast<std::size_t>(n_cells + 1), 0);
        std::vector<Index> cell_of(static_cast<std::size_t>(targets.rows()));
        for (Index j = 0; j < targets.rows(); ++j)
        {
            const auto c = cell_coords(targets.row(j).transpose());
            cell_of[static_cast<std::size_t>(j)] = linear(c);
            ++start_[static_cast<std::size_t>(linear(c) + 1)];
        }
        for (std::size_t k = 1; k < start_.size(); ++k)
        {
            start_[k] += start_[k - 1];
        }
        members_.resize(static_cast<std::size_t>(targets.rows()));
        std::vector<Index> fill(start_.begin(), start_.end() - 1);
        for (Index j = 0; j < targets.rows(); ++j)
        {
            auto& slot = fill[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(j)])];
            members_[static_cast<std::size_t>(slot++)] = j;
        }
    }

    Best query(const PointCloud& queries, Index i) const
    {
        const Eigen::Vector3d q = queries.row(i).transpose();
        const auto c = cell_coords(q);
        Best best;
        for (Index s = 0;; ++s)
        {
            visit_shell(c, s, [&](Index cell) {
                for (Index k = start_[static_cast<std::size_t>(cell)];
                     k < start_[static_cast<std::size_t>(cell + 1)]; ++k)
                {
                    const Index j = members_[static_cast<std::size_t>(k)];
                    best.offer(squared_distance(queries, i, targets_, j), j);
                }
            });

            // Lower bound on the distance to any cell outside the visited
            // block, shrunk slightly to absorb rounding in cell assignment.
            double bound = std::numeric_limits<double>::infinity();
            bool remaining = false;
            for (int a = 0; a < 3; ++a)
            {
                if (c[a] - s - 1 >= 0)
                {
                    remaining = true;
                    bound = std::min(bound, q[a] - (lo_[a] + static_cast<double>(c[a] - s) * cell_));
                }
                if (c[a] + s + 1 < dims_[a])
                {
                    remaining = true;
                    bound = std::min(bound, (lo_[a] + static_cast<double>(c[a] + s + 1) * cell_) - q[a]);
                }
            }
            if (!remaining)
            {
                break;
            }
            bound -= 1e-9 * cell_;
            if (bound > 0 && bound * bound > best.dist_sq)
            {
                break;
            }
        }
        return best;
    }

private:
    using Coords = std::array<Index, 3>;

    Coords cell_coords(const Eigen::Vector3d& p) const
    {
        Coords c{};
        for (int a = 0; a < 3; ++a)
        {
            const double f = std::floor((p[a] - lo_[a]) / cell_);
            const double clamped =
                std::clamp(f, 0.0, static_cast<double>(dims_[a] - 1));
            c[a] = static_cast<Index>(clamped);
        }
        return c;
    }

    Index linear(const Coords& c) const
    {
        return (c[2] * dims_[1] + c[1]) * dims_[0] + c[0];
    }

    template <typename F>
    void visit_shell(const Coords& c, Index s, F&& f) const
    {
        Coords lo{}, hi{};
        for (int a = 0; a < 3; ++a)
        {
            lo[a] = std::max<Index>(c[a] - s, 0);
            hi[a] = std::min<Index>(c[a] + s, dims_[a] - 1);
        }
        for (Index z = lo[2]; z <= hi[2]; ++z)
        {
            for (Index y = lo[1]; y <= hi[1]; ++y)
            {
                for (Index x = lo[0]; x <= hi[0]; ++x)
                {
                    const Index cheb = std::max(
                        {std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])});
                    if (cheb == s)
                    {
                        f(linear({x, y, z}));
                    }
                }
            }
        }
    }

    const PointCloud& targets_;
    Eigen::Vector3d lo_;
    double cell_{1};
    Coords dims_{1, 1, 1};
    std::vector<Index> start_;
    std::vector<Index> members_;
};

double sum_of(const std::vector<double>& values)
{
    CompensatedSum s;
    for (const double v : values)
    {
        s.add(v);
    }
    return s.value();
}

} // namespace

NearestNeighbors nearest_neighbors(const PointCloud& queries,
                                   const PointCloud& targets,
                                   NeighborSearch method)
{
    if (targets.rows() == 0)
    {
        throw EmptyCloud("nearest_neighbors: target cloud is empty");
    }
    if (method == NeighborSearch::brute_force)
    {
        return brute_force(queries, targets);
    }
    const UniformGrid grid(targets);
    NearestNeighbors out;
    out.dist_sq.resize(static_cast<std::size_t>(queries.rows()));
    out.index.resize(static_cast<std::size_t>(queries.rows()));
    for (Index i = 0; i < queries.rows(); ++i)
    {
        const Best b = grid.query(queries, i);
        out.dist_sq[static_cast<std::size_t>(i)] = b.dist_sq;
        out.index[static_cast<std::size_t>(i)] = b.index;
    }
    return out;
}

ChamferTerms chamfer_terms(const PointCloud& p, const PointCloud& q,
                           NeighborSearch method)
{
    if (p.rows() == 0 || q.rows() == 0)
    {
        throw EmptyCloud("chamfer: both clouds must be nonempty");
    }
    ChamferTerms out;
    out.forward = sum_of(nearest_neighbors(p, q, method).dist_sq);
    out.backward = sum_of(nearest_neighbors(q, p, method).dist_sq);
    out.total = out.forward + out.backward;
    return out;
}

ChamferGradient chamfer_with_gradient(const PointCloud& anchor,
                                      const PointCloud& moving)
{
    if (anchor.rows() == 0 || moving.rows() == 0)
    {
        throw EmptyCloud("chamfer: both clouds must be nonempty");
    }
    const NearestNeighbors to_moving = nearest_neighbors(anchor, moving);
    const NearestNeighbors to_anchor = nearest_neighbors(moving, anchor);

    ChamferGradient out;
    out.grad = GradBuffer::Zero(moving.rows(), 3);
    for (Index a = 0; a < anchor.rows(); ++a)
    {
        const Index b = to_moving.index[static_cast<std::size_t>(a)];
        out.grad.row(b) += 2.0 * (moving.row(b) - anchor.row(a));
    }
    for (Index b = 0; b < moving.rows(); ++b)
    {
        const Index a = to_anchor.index[static_cast<std::size_t>(b)];
        out.grad.row(b) += 2.0 * (moving.row(b) - anchor.row(a));
    }
    out.value = sum_of(to_moving.dist_sq) + sum_of(to_anchor.dist_sq);
    return out;
}

} // namespace pointsil
