#ifndef POINTSIL_VERSION_HPP
#define POINTSIL_VERSION_HPP

namespace pointsil
{

inline constexpr const char* version = "0.1.0";

} // namespace pointsil

#endif // POINTSIL_VERSION_HPP
