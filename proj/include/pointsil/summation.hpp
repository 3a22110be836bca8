#ifndef POINTSIL_SUMMATION_HPP
#define POINTSIL_SUMMATION_HPP

#include <cmath>

namespace pointsil
{

/// Neumaier compensated sum. Deterministic for a fixed addition order.
class CompensatedSum
{
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
        {
            carry_ += (sum_ - t) + x;
        }
        else
        {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const noexcept
    {
        return sum_ + carry_;
    }

private:
    double sum_{0};
    double carry_{0};
};

} // namespace pointsil

#endif // POINTSIL_SUMMATION_HPP
