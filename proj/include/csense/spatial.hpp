/*
 * Copyright (C) 2026 The csense Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Planar geometry for the simulators: square regions with optional torus
// metric, and a uniform cell grid for fixed-radius neighbor queries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "csense/error.hpp"
#include "csense/rng.hpp"

namespace csense {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct SimRegion {
  double side_m = 2000.0;
  bool wraparound = true;

  void validate() const {
    if (!(side_m > 0.0)) throw ConfigError("SimRegion: side must be > 0");
  }

  double area() const { return side_m * side_m; }

  Point uniform_point(Rng& rng) const { return {rng.uniform() * side_m, rng.uniform() * side_m}; }

  Point center() const { return {0.5 * side_m, 0.5 * side_m}; }

  // Maps a point back into [0, L)^2 on the torus; identity otherwise.
  Point wrap(Point p) const {
    if (!wraparound) return p;
    p.x -= side_m * std::floor(p.x / side_m);
    p.y -= side_m * std::floor(p.y / side_m);
    if (p.x >= side_m) p.x = 0.0;
    if (p.y >= side_m) p.y = 0.0;
    return p;
  }

  double dist2(const Point& a, const Point& b) const {
    double dx = std::fabs(a.x - b.x);
    double dy = std::fabs(a.y - b.y);
    if (wraparound) {
      dx = std::min(dx, side_m - dx);
      dy = std::min(dy, side_m - dy);
    }
    return dx * dx + dy * dy;
  }

  double distance(const Point& a, const Point& b) const { return std::sqrt(dist2(a, b)); }
};

/// Points bucketed into square cells of side >= the query radius it was built
/// for. Queries with larger radii still work; they scan more cells.
class SpatialGrid {
 public:
  SpatialGrid(const SimRegion& region, const std::vector<Point>& points, double cell_size)
      : region_(region), points_(&points) {
    constexpr int kMaxCellsPerSide = 1024;
    cells_per_side_ = std::clamp(static_cast<int>(std::floor(region.side_m / std::max(cell_size, 1e-9))), 1,
                                 kMaxCellsPerSide);
    cell_size_ = region.side_m / cells_per_side_;
    const std::size_t ncell = static_cast<std::size_t>(cells_per_side_) * cells_per_side_;
    start_.assign(ncell + 1, 0);
    std::vector<std::uint32_t> cell_of(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of[i] = static_cast<std::uint32_t>(cell_index(cell_coord(points[i].x), cell_coord(points[i].y)));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < ncell; ++c) start_[c + 1] += start_[c];
    items_.resize(points.size());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) items_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  }

  /// Calls fn(index, squared distance) for every point within `radius` of `p`
  /// (under the region metric). Each point is visited at most once.
  template <class Fn>
  void for_each_within(const Point& p, double radius, Fn&& fn) const {
    const double r2 = radius * radius;
    const int reach = static_cast<int>(std::ceil(radius / cell_size_));
    const int cx = cell_coord(p.x), cy = cell_coord(p.y);
    const bool all = region_.wraparound && 2 * reach + 1 >= cells_per_side_;
    int x0, x1, y0, y1;
    if (all) {
      x0 = y0 = 0;
      x1 = y1 = cells_per_side_ - 1;
    } else if (region_.wraparound) {
      x0 = cx - reach, x1 = cx + reach, y0 = cy - reach, y1 = cy + reach;
    } else {
      x0 = std::max(0, cx - reach), x1 = std::min(cells_per_side_ - 1, cx + reach);
      y0 = std::max(0, cy - reach), y1 = std::min(cells_per_side_ - 1, cy + reach);
    }
    const auto& pts = *points_;
    for (int gy = y0; gy <= y1; ++gy) {
      const int wy = wrap_cell(gy);
      for (int gx = x0; gx <= x1; ++gx) {
        const std::size_t c = cell_index(wrap_cell(gx), wy);
        for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k) {
          const std::uint32_t idx = items_[k];
          const double d2 = region_.dist2(p, pts[idx]);
          if (d2 <= r2) fn(idx, d2);
        }
      }
    }
  }

 private:
  int cell_coord(double v) const {
    int c = static_cast<int>(std::floor(v / cell_size_));
    return std::clamp(c, 0, cells_per_side_ - 1);
  }
  int wrap_cell(int c) const { return ((c % cells_per_side_) + cells_per_side_) % cells_per_side_; }
  std::size_t cell_index(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * cells_per_side_ + static_cast<std::size_t>(cx);
  }

  SimRegion region_;
  const std::vector<Point>* points_;
  int cells_per_side_ = 1;
  double cell_size_ = 1.0;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> items_;
};

}  // namespace csense
