#pragma once

// Bucket grid over double-precision bounding boxes. Only used to prune
// candidate pairs; every geometric decision afterwards is exact. Boxes are
// padded so that rounding to double can never drop a true candidate.

#include "pahomeo/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pahomeo::detail {

struct Box {
  double x0, y0, x1, y1;
};

inline Box bounding_box(std::span<const Point2> pts) {
  Box b{pts[0].x.get_d(), pts[0].y.get_d(), pts[0].x.get_d(), pts[0].y.get_d()};
  for (const Point2& p : pts) {
    const double x = p.x.get_d();
    const double y = p.y.get_d();
    b.x0 = std::min(b.x0, x);
    b.y0 = std::min(b.y0, y);
    b.x1 = std::max(b.x1, x);
    b.y1 = std::max(b.y1, y);
  }
  return b;
}

class BucketGrid {
 public:
  BucketGrid(const Box& extent, std::size_t expected_items) {
    const double w = extent.x1 - extent.x0;
    const double h = extent.y1 - extent.y0;
    pad_ = 1e-9 * std::max({w, h, 1e-300});
    x0_ = extent.x0 - pad_;
    y0_ = extent.y0 - pad_;
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(expected_items) + 1.0)));
    nx_ = ny_ = std::clamp<std::size_t>(side, 1, 2048);
    cw_ = (w + 2 * pad_) / static_cast<double>(nx_);
    ch_ = (h + 2 * pad_) / static_cast<double>(ny_);
    if (cw_ <= 0) cw_ = 1;
    if (ch_ <= 0) ch_ = 1;
    buckets_.resize(nx_ * ny_);
  }

  void insert(std::uint32_t id, const Box& b) {
    for_cells(b, [&](std::size_t cell) { buckets_[cell].push_back(id); });
  }

  /// Candidate ids whose padded box may meet b, deduplicated and sorted.
  std::vector<std::uint32_t> query(const Box& b) const {
    std::vector<std::uint32_t> out;
    for_cells(b, [&](std::size_t cell) {
      out.insert(out.end(), buckets_[cell].begin(), buckets_[cell].end());
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  template <class F>
  void for_cells(const Box& b, F&& f) const {
    const auto clampi = [](double v, std::size_t n) {
      if (!(v > 0)) return std::size_t{0};
      const auto i = static_cast<std::size_t>(v);
      return std::min(i, n - 1);
    };
    const std::size_t i0 = clampi((b.x0 - pad_ - x0_) / cw_, nx_);
    const std::size_t i1 = clampi((b.x1 + pad_ - x0_) / cw_, nx_);
    const std::size_t j0 = clampi((b.y0 - pad_ - y0_) / ch_, ny_);
    const std::size_t j1 = clampi((b.y1 + pad_ - y0_) / ch_, ny_);
    for (std::size_t j = j0; j <= j1; ++j) {
      for (std::size_t i = i0; i <= i1; ++i) f(j * nx_ + i);
    }
  }

  double x0_ = 0, y0_ = 0, cw_ = 1, ch_ = 1, pad_ = 0;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

/// Position of x on the boundary of a convex polygon as (edge, parameter in
/// [0,1)), or nothing when x is not on the boundary.
struct BoundaryPosition {
  std::size_t edge;
  Rational t;
};

inline std::optional<BoundaryPosition> boundary_position(const ConvexPolygon& poly, const Point2& x) {
  const std::size_t m = poly.size();
  for (std::size_t e = 0; e < m; ++e) {
    const Point2& a = poly[e];
    const Point2& b = poly[(e + 1) % m];
    if (cross(a, b, x) != 0) continue;
    const Point2 d = b - a;
    Rational t = dot(x - a, d) / squared_norm(d);
    if (t >= 0 && t < 1) return BoundaryPosition{e, std::move(t)};
  }
  return std::nullopt;
}

}  // namespace pahomeo::detail
