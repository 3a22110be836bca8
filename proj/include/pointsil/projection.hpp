///
/// \file projection.hpp
///
/// Continuous-approximation point renderer: every point scatters a separable
/// un-normalized Gaussian into the image and the per-pixel sum is squashed
/// with tanh,
///
///   M̂(row, col) = tanh( Σ_n φ(x̂_n − col) · φ(ŷ_n − row) ),
///   φ(k)        = exp(−k² / 2σ²).
///
/// φ is truncated per axis at KernelConfig::truncation_radius; the truncated
/// function is what render() evaluates and what render_backward()
/// differentiates. Kernel sums always accumulate in double, in ascending
/// (x̂, ŷ, index) point order, so masks are bit-identical under any
/// permutation of the input.
///
#ifndef POINTSIL_PROJECTION_HPP
#define POINTSIL_PROJECTION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "pointsil/types.hpp"

namespace pointsil
{

struct KernelConfig
{
    /// Kernel variance σ² in pixel².
    double sigma_sq{0.4};
    /// Per-axis cutoff in pixels; +inf disables truncation.
    double truncation_radius{6.0 * std::sqrt(0.4)};

    /// Truncation at 6σ.
    static KernelConfig with_variance(double sigma_sq)
    {
        KernelConfig k{sigma_sq, 6.0 * std::sqrt(sigma_sq)};
        k.validate();
        return k;
    }

    /// No truncation; every point reaches every pixel.
    static KernelConfig exact(double sigma_sq)
    {
        KernelConfig k{sigma_sq, std::numeric_limits<double>::infinity()};
        k.validate();
        return k;
    }

    bool is_exact() const noexcept
    {
        return std::isinf(truncation_radius);
    }

    void validate() const
    {
        if (!(sigma_sq > 0) || !std::isfinite(sigma_sq))
        {
            throw InvalidArgument("kernel variance must be finite and > 0");
        }
        if (!(truncation_radius > 0) ||
            truncation_radius < 3.0 * std::sqrt(sigma_sq))
        {
            throw InvalidArgument(
                "truncation radius must be at least 3 standard deviations");
        }
    }
};

/// Closed integer range [lo, hi]; empty when lo > hi.
struct PixelRange
{
    Index lo;
    Index hi;

    bool empty() const noexcept
    {
        return lo > hi;
    }
    friend bool operator==(const PixelRange&, const PixelRange&) = default;
};

/// Pixel indices within `radius` of coordinate `c`, clipped to [0, extent).
inline PixelRange kernel_window(double c, double radius, Index extent)
{
    if (std::isinf(radius))
    {
        return {0, extent - 1};
    }
    const double lo = std::ceil(c - radius);
    const double hi = std::floor(c + radius);
    if (hi < 0 || lo > static_cast<double>(extent - 1))
    {
        return {1, 0};
    }
    return {static_cast<Index>(std::max(lo, 0.0)),
            static_cast<Index>(std::min(hi, static_cast<double>(extent - 1)))};
}

/// Point indices in ascending (x̂, ŷ, index) order.
template <typename Scalar>
std::vector<Index> accumulation_order(const CamPointsT<Scalar>& cam)
{
    std::vector<Index> order(static_cast<std::size_t>(cam.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (cam(a, 0) != cam(b, 0))
        {
            return cam(a, 0) < cam(b, 0);
        }
        if (cam(a, 1) != cam(b, 1))
        {
            return cam(a, 1) < cam(b, 1);
        }
        return a < b;
    });
    return order;
}

namespace detail
{

inline void check_render_args(Index height, Index width,
                              const KernelConfig& kernel)
{
    if (height < 1 || width < 1)
    {
        throw InvalidArgument("render: image must be at least 1x1");
    }
    kernel.validate();
}

template <typename Scalar>
void check_cam_finite(const CamPointsT<Scalar>& cam)
{
    if (!cam.leftCols(2).allFinite())
    {
        throw InvalidArgument("render: non-finite projected coordinates");
    }
}

/// Fills `phi` with φ(c − k) for k in `range`.
inline void kernel_row(double c, PixelRange range, double inv_two_var,
                       std::vector<double>& phi)
{
    phi.clear();
    for (Index k = range.lo; k <= range.hi; ++k)
    {
        const double d = c - static_cast<double>(k);
        phi.push_back(std::exp(-d * d * inv_two_var));
    }
}

} // namespace detail

///
/// Truncated kernel sum Σ_n φ(x̂_n − col)·φ(ŷ_n − row) before tanh.
///
template <typename Scalar>
MaskT<double> kernel_sum(const CamPointsT<Scalar>& cam, Index height,
                         Index width, const KernelConfig& kernel)
{
    detail::check_render_args(height, width, kernel);
    detail::check_cam_finite(cam);

    MaskT<double> sum = MaskT<double>::Zero(height, width);
    const double inv_two_var = 0.5 / kernel.sigma_sq;
    std::vector<double> phi_x;
    std::vector<double> phi_y;
    for (const Index n : accumulation_order(cam))
    {
        const double x = static_cast<double>(cam(n, 0));
        const double y = static_cast<double>(cam(n, 1));
        const PixelRange cols = kernel_window(x, kernel.truncation_radius, width);
        const PixelRange rows = kernel_window(y, kernel.truncation_radius, height);
        if (cols.empty() || rows.empty())
        {
            continue;
        }
        detail::kernel_row(x, cols, inv_two_var, phi_x);
        detail::kernel_row(y, rows, inv_two_var, phi_y);
        for (Index r = rows.lo; r <= rows.hi; ++r)
        {
            const double wy = phi_y[static_cast<std::size_t>(r - rows.lo)];
            double* row = sum.row(r).data();
            for (Index c = cols.lo; c <= cols.hi; ++c)
            {
                row[c] += phi_x[static_cast<std::size_t>(c - cols.lo)] * wy;
            }
        }
    }
    return sum;
}

/// Continuous silhouette of the projected points; values in [0, 1).
template <typename Scalar>
MaskT<Scalar> render(const CamPointsT<Scalar>& cam, Index height, Index width,
                     const KernelConfig& kernel)
{
    return kernel_sum(cam, height, width, kernel)
        .unaryExpr([](double s) { return std::tanh(s); })
        .template cast<Scalar>();
}

///
/// Gradient of Σ d_mask ⊙ render(cam) with respect to (x̂_n, ŷ_n), given the
/// forward mask. Points outside the image receive zero.
///
template <typename Scalar>
ImageGradT<Scalar> render_backward(const CamPointsT<Scalar>& cam, Index height,
                                   Index width, const KernelConfig& kernel,
                                   const MaskT<Scalar>& d_mask,
                                   const MaskT<Scalar>& forward)
{
    detail::check_render_args(height, width, kernel);
    if (d_mask.rows() != height || d_mask.cols() != width ||
        forward.rows() != height || forward.cols() != width)
    {
        throw ShapeMismatch("render_backward: mask gradient is " +
                            std::to_string(d_mask.rows()) + "x" +
                            std::to_string(d_mask.cols()) + ", image is " +
                            std::to_string(height) + "x" +
                            std::to_string(width));
    }
    detail::check_cam_finite(cam);

    // dL/dS = dL/dM̂ · (1 − M̂²)
    const MaskT<double> weight =
        d_mask.template cast<double>().cwiseProduct(
            (1.0 - forward.template cast<double>().array().square()).matrix());

    const double inv_two_var = 0.5 / kernel.sigma_sq;
    const double inv_var = 1.0 / kernel.sigma_sq;
    ImageGradT<Scalar> out = ImageGradT<Scalar>::Zero(cam.rows(), 2);
    std::vector<double> phi_x;
    std::vector<double> phi_y;
    for (Index n = 0; n < cam.rows(); ++n)
    {
        const double x = static_cast<double>(cam(n, 0));
        const double y = static_cast<double>(cam(n, 1));
        const PixelRange cols = kernel_window(x, kernel.truncation_radius, width);
        const PixelRange rows = kernel_window(y, kernel.truncation_radius, height);
        if (cols.empty() || rows.empty())
        {
            continue;
        }
        detail::kernel_row(x, cols, inv_two_var, phi_x);
        detail::kernel_row(y, rows, inv_two_var, phi_y);
        double gx = 0.0;
        double gy = 0.0;
        for (Index r = rows.lo; r <= rows.hi; ++r)
        {
            const double wy = phi_y[static_cast<std::size_t>(r - rows.lo)];
            const double dy = y - static_cast<double>(r);
            const double* wrow = weight.row(r).data();
            double acc_x = 0.0;
            double acc_y = 0.0;
            for (Index c = cols.lo; c <= cols.hi; ++c)
            {
                const double k =
                    wrow[c] * phi_x[static_cast<std::size_t>(c - cols.lo)];
                acc_x += k * (x - static_cast<double>(c));
                acc_y += k;
            }
            gx += wy * acc_x;
            gy += wy * dy * acc_y;
        }
        out(n, 0) = static_cast<Scalar>(-gx * inv_var);
        out(n, 1) = static_cast<Scalar>(-gy * inv_var);
    }
    return out;
}

/// As above, recomputing the forward mask.
template <typename Scalar>
ImageGradT<Scalar> render_backward(const CamPointsT<Scalar>& cam, Index height,
                                   Index width, const KernelConfig& kernel,
                                   const MaskT<Scalar>& d_mask)
{
    return render_backward(cam, height, width, kernel, d_mask,
                           render(cam, height, width, kernel));
}

///
/// Naive discretized projection: pixel (round(ŷ), round(x̂)) is set for every
/// point that lands inside the image.
///
template <typename Scalar>
MaskT<Scalar> rasterize_discrete(const CamPointsT<Scalar>& cam, Index height,
                                 Index width)
{
    if (height < 1 || width < 1)
    {
        throw InvalidArgument("rasterize_discrete: image must be at least 1x1");
    }
    detail::check_cam_finite(cam);
    MaskT<Scalar> out = MaskT<Scalar>::Zero(height, width);
    for (Index n = 0; n < cam.rows(); ++n)
    {
        const double col = std::round(static_cast<double>(cam(n, 0)));
        const double row = std::round(static_cast<double>(cam(n, 1)));
        if (col >= 0 && row >= 0 && col < static_cast<double>(width) &&
            row < static_cast<double>(height))
        {
            out(static_cast<Index>(row), static_cast<Index>(col)) = Scalar(1);
        }
    }
    return out;
}

/// True when at least one point's kernel window overlaps the image.
template <typename Scalar>
bool any_visible(const CamPointsT<Scalar>& cam, Index height, Index width,
                 const KernelConfig& kernel)
{
    for (Index n = 0; n < cam.rows(); ++n)
    {
        const double x = static_cast<double>(cam(n, 0));
        const double y = static_cast<double>(cam(n, 1));
        if (!kernel_window(x, kernel.truncation_radius, width).empty() &&
            !kernel_window(y, kernel.truncation_radius, height).empty())
        {
            return true;
        }
    }
    return false;
}

} // namespace pointsil

#endif // POINTSIL_PROJECTION_HPP
