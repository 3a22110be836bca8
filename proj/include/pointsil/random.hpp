#ifndef POINTSIL_RANDOM_HPP
#define POINTSIL_RANDOM_HPP

#include <cstdint>
#include <random>

namespace pointsil
{

/// splitmix64 finalizer; derives independent stream seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

///
/// mt19937_64 with a fixed 53-bit mantissa conversion, so sequences are the
/// same across standard library implementations.
///
class Rng
{
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(mix_seed(seed, stream))
    {
    }

    /// Uniform in [0, 1).
    double uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi)
    {
        return lo + (hi - lo) * uniform();
    }

    std::uint64_t next()
    {
        return engine_();
    }

private:
    std::mt19937_64 engine_;
};

} // namespace pointsil

#endif // POINTSIL_RANDOM_HPP
