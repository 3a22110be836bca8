///
/// \file io.hpp
///
/// File formats: XYZ and ASCII PLY point clouds, PGM masks, JSON camera rigs
/// and CSV fit traces. See docs/formats.md.
///
#ifndef POINTSIL_IO_HPP
#define POINTSIL_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "pointsil/geometry.hpp"
#include "pointsil/optimize.hpp"

namespace pointsil::io
{

namespace fs = std::filesystem;

/// One "x y z" line per point, 17 significant digits. '#' starts a comment.
void save_xyz(const fs::path& path, const PointCloud& pc);
PointCloud load_xyz(const fs::path& path);

void save_ply(const fs::path& path, const PointCloud& pc);
PointCloud load_ply(const fs::path& path);

/// Dispatches on the extension (.ply, anything else is XYZ).
PointCloud load_cloud(const fs::path& path);
void save_cloud(const fs::path& path, const PointCloud& pc);

/// Binary PGM (P5). Stored value is round(v·maxval); maxval 255 or 65535.
void save_pgm(const fs::path& path, const Mask& mask, int maxval);
Mask load_pgm(const fs::path& path);

/// Camera rig document (JSON).
void save_rig(const fs::path& path, const std::vector<View>& views);
std::vector<View> load_rig(const fs::path& path);

/// Header "iteration,total,bce,affinity,chamfer".
void save_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace);

/// Shortest round-trip decimal form used in every text artifact.
std::string format_double(double v);

/// Reads a whole file as bytes.
std::string read_file(const fs::path& path);

} // namespace pointsil::io

#endif // POINTSIL_IO_HPP
