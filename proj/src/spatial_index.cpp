#include "epibench/spatial_index.hpp"

#include <algorithm>
#include <cmath>

#include "epibench/error.hpp"

namespace epibench {

SpatialGrid::SpatialGrid(std::span<const Point> points, double radius)
    : points_(points.begin(), points.end()), radius_(radius)
{
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw Error(ErrorCode::ConfigInvalid, "neighbor radius must be positive and finite");
    }
    if (!points_.empty()) {
        origin_x_ = points_.front().x;
        origin_y_ = points_.front().y;
        for (const auto& p : points_) {
            origin_x_ = std::min(origin_x_, p.x);
            origin_y_ = std::min(origin_y_, p.y);
        }
    }
    for (std::size_t idx = 0; idx < points_.size(); ++idx) {
        const auto& p = points_[idx];
        cells_[key(cell_of(p.x, origin_x_), cell_of(p.y, origin_y_))].push_back(idx);
    }
}

long long SpatialGrid::cell_of(double coordinate, double origin) const
{
    return static_cast<long long>(std::floor((coordinate - origin) / radius_));
}

std::vector<std::size_t> SpatialGrid::query(const Point& center) const
{
    std::vector<std::size_t> found;
    // One extra ring of cells absorbs rounding at cell boundaries.
    const long long cx0 = cell_of(center.x - radius_, origin_x_) - 1;
    const long long cx1 = cell_of(center.x + radius_, origin_x_) + 1;
    const long long cy0 = cell_of(center.y - radius_, origin_y_) - 1;
    const long long cy1 = cell_of(center.y + radius_, origin_y_) + 1;
    for (long long cx = cx0; cx <= cx1; ++cx) {
        for (long long cy = cy0; cy <= cy1; ++cy) {
            const auto it = cells_.find(key(cx, cy));
            if (it == cells_.end()) {
                continue;
            }
            for (std::size_t idx : it->second) {
                if (within_radius(points_[idx], center, radius_)) {
                    found.push_back(idx);
                }
            }
        }
    }
    std::sort(found.begin(), found.end());
    return found;
}

std::vector<std::size_t> brute_force_neighbors(std::span<const Point> points, const Point& center,
                                               double radius)
{
    std::vector<std::size_t> found;
    for (std::size_t idx = 0; idx < points.size(); ++idx) {
        if (within_radius(points[idx], center, radius)) {
            found.push_back(idx);
        }
    }
    return found;
}

}  // namespace epibench
