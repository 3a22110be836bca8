#include "pointsil/distance_transform.hpp"

#include <limits>
#include <vector>

namespace pointsil
{

namespace
{

using i64 = std::int64_t;

constexpr i64 neg_inf = std::numeric_limits<i64>::min();
constexpr i64 pos_inf = std::numeric_limits<i64>::max();

i64 floor_div(i64 a, i64 b)
{
    // b > 0
    const i64 q = a / b;
    return (a % b != 0 && a < 0) ? q - 1 : q;
}

//
// Lower envelope of the parabolas scale·(x − v)² + offset(v) over the integer
// domain [0, n). All envelope values are distinct at integer points (the
// offsets carry a unique lexicographic rank), so boundaries are kept as the
// first integer at which the newer parabola wins and no tie handling is
// needed.
//
class Envelope
{
public:
    explicit Envelope(i64 scale) : scale_(scale)
    {
    }

    void reset()
    {
        vertex_.clear();
        offset_.clear();
        start_.clear();
    }

    /// Vertices must be added in increasing order.
    void add(i64 v, i64 offset)
    {
        i64 s = neg_inf;
        while (!vertex_.empty())
        {
            s = first_win(vertex_.back(), offset_.back(), v, offset);
            if (s > start_.back())
            {
                break;
            }
            vertex_.pop_back();
            offset_.pop_back();
            start_.pop_back();
            s = neg_inf;
        }
        vertex_.push_back(v);
        offset_.push_back(offset);
        start_.push_back(s);
    }

    bool empty() const
    {
        return vertex_.empty();
    }

    /// Calls out(x, vertex, value) for x = 0 … n−1.
    template <typename Out>
    void sample(i64 n, Out&& out) const
    {
        std::size_t k = 0;
        for (i64 x = 0; x < n; ++x)
        {
            while (k + 1 < vertex_.size() && start_[k + 1] <= x)
            {
                ++k;
            }
            const i64 d = x - vertex_[k];
            out(x, vertex_[k], scale_ * d * d + offset_[k]);
        }
    }

private:
    // Smallest integer x at which parabola q (q > p) is strictly below p.
    i64 first_win(i64 p, i64 fp, i64 q, i64 fq) const
    {
        const i64 num = scale_ * (q * q - p * p) + fq - fp;
        const i64 den = 2 * scale_ * (q - p);
        return floor_div(num, den) + 1;
    }

    i64 scale_;
    std::vector<i64> vertex_;
    std::vector<i64> offset_;
    std::vector<i64> start_;
};

} // namespace

DistanceField distance_transform(const BoolMask& support)
{
    const i64 height = support.rows();
    const i64 width = support.cols();

    DistanceField field;
    field.dist_sq.setConstant(height, width, no_support);
    field.nearest.setConstant(height, width, no_support);
    if (height == 0 || width == 0 || !support.any())
    {
        return field;
    }

    // key = scale·dist² + (row·W + col); scale exceeds every rank, so the
    // minimum key is the lexicographic minimum of (dist², row, col).
    const i64 scale = height * width;
    const long double bound = static_cast<long double>(scale) *
                              static_cast<long double>(height * height +
                                                       width * width + 2);
    if (bound > static_cast<long double>(pos_inf / 4))
    {
        throw InvalidArgument("distance_transform: image too large");
    }

    // Pass 1: along each column, min over support rows k of
    // scale·(row − k)² + k·W.
    Eigen::Matrix<i64, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> column_key(
        height, width);
    Eigen::Matrix<i64, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> column_arg(
        height, width);
    column_key.setConstant(pos_inf);
    column_arg.setConstant(no_support);

    Envelope env(scale);
    for (i64 col = 0; col < width; ++col)
    {
        env.reset();
        for (i64 row = 0; row < height; ++row)
        {
            if (support(row, col))
            {
                env.add(row, row * width);
            }
        }
        if (env.empty())
        {
            continue;
        }
        env.sample(height, [&](i64 row, i64 k, i64 value) {
            column_key(row, col) = value;
            column_arg(row, col) = k;
        });
    }

    // Pass 2: along each row, min over columns l of
    // scale·(col − l)² + column_key(row, l) + l.
    for (i64 row = 0; row < height; ++row)
    {
        env.reset();
        for (i64 l = 0; l < width; ++l)
        {
            if (column_arg(row, l) != no_support)
            {
                env.add(l, column_key(row, l) + l);
            }
        }
        env.sample(width, [&](i64 col, i64 l, i64 /*value*/) {
            const i64 k = column_arg(row, l);
            const i64 dr = row - k;
            const i64 dc = col - l;
            field.dist_sq(row, col) = dr * dr + dc * dc;
            field.nearest(row, col) = k * width + l;
        });
    }
    return field;
}

} // namespace pointsil
