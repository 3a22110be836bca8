///
/// \file chamfer.hpp
///
/// Symmetric Chamfer distance (sum of squared nearest-neighbor distances in
/// both directions) with a brute-force reference path and a uniform-grid
/// accelerated path that returns bit-identical results.
///
#ifndef POINTSIL_CHAMFER_HPP
#define POINTSIL_CHAMFER_HPP

#include <vector>

#include "pointsil/types.hpp"

namespace pointsil
{

enum class NeighborSearch
{
    brute_force,
    grid
};

/// Squared distance and index of the nearest target for every query point.
/// Ties resolve to the smallest target index.
struct NearestNeighbors
{
    std::vector<double> dist_sq;
    std::vector<Index> index;
};

NearestNeighbors nearest_neighbors(const PointCloud& queries,
                                   const PointCloud& targets,
                                   NeighborSearch method = NeighborSearch::grid);

struct ChamferTerms
{
    /// Σ_{p∈P} min_{q∈Q} ‖p − q‖².
    double forward{0};
    /// Σ_{q∈Q} min_{p∈P} ‖p − q‖².
    double backward{0};
    double total{0};
};

/// \throws EmptyCloud if either cloud is empty.
ChamferTerms chamfer_terms(const PointCloud& p, const PointCloud& q,
                           NeighborSearch method = NeighborSearch::grid);

inline double chamfer(const PointCloud& p, const PointCloud& q,
                      NeighborSearch method = NeighborSearch::grid)
{
    return chamfer_terms(p, q, method).total;
}

///
/// Chamfer distance between a fixed anchor and a moving cloud together with
/// its gradient with respect to the moving points; correspondences are held
/// constant.
///
struct ChamferGradient
{
    double value{0};
    GradBuffer grad;
};

ChamferGradient chamfer_with_gradient(const PointCloud& anchor,
                                      const PointCloud& moving);

} // namespace pointsil

#endif // POINTSIL_CHAMFER_HPP
