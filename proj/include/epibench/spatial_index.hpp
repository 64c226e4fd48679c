#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

namespace epibench {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// True when `a` and `b` are within `radius` (inclusive). Shared by the binned
/// and brute-force searches so both apply the identical predicate.
inline bool within_radius(const Point& a, const Point& b, double radius)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy <= radius * radius;
}

/// Uniform binning of points into square cells of side `radius`. Queries
/// return the indices of all stored points within `radius` of the center,
/// sorted ascending.
class SpatialGrid {
public:
    SpatialGrid(std::span<const Point> points, double radius);

    std::vector<std::size_t> query(const Point& center) const;

    double radius() const { return radius_; }

private:
    long long cell_of(double coordinate, double origin) const;
    static long long key(long long cx, long long cy) { return (cx << 32) ^ (cy & 0xffffffffLL); }

    std::vector<Point> points_;
    double radius_;
    double origin_x_ = 0.0;
    double origin_y_ = 0.0;
    std::unordered_map<long long, std::vector<std::size_t>> cells_;
};

/// All-pairs reference scan; same contract as SpatialGrid::query.
std::vector<std::size_t> brute_force_neighbors(std::span<const Point> points, const Point& center,
                                               double radius);

}  // namespace epibench
