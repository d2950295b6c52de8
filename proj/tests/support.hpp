#pragma once

// Helpers shared by the test binaries. The oracles here are written out
// independently of the library (plain loops and closed forms) so that a test
// compares two separate computations.

#include "pahomeo/block.hpp"
#include "pahomeo/densify.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using pahomeo::AffineMap2;
using pahomeo::Mat2;
using pahomeo::Point2;
using pahomeo::Rational;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen_); }

  // Uniform on a grid of step 1/den inside [lo, hi].
  Rational in(const Rational& lo, const Rational& hi, long den = 9973) {
    const long t = integer(0, den);
    return lo + (hi - lo) * Rational(t) / den;
  }

  Point2 point_in_unit_square() { return {in(0, 1), in(0, 1)}; }

  // Small rational with |value| <= bound.
  Rational small(long bound = 5, long den_max = 7) {
    const long den = integer(1, den_max);
    Rational q(integer(-bound * den, bound * den), den);
    q.canonicalize();
    return q;
  }

  Mat2 positive_matrix() {
    for (;;) {
      Mat2 m{small(), small(), small(), small()};
      if (m.a * m.d - m.b * m.c > 0) return m;
    }
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Rational l1_oracle(const Mat2& m) { return abs_q(m.a) + abs_q(m.b) + abs_q(m.c) + abs_q(m.d); }

// Shoelace over an explicit vertex list.
inline Rational shoelace(const std::vector<Point2>& pts) {
  Rational twice = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2& p = pts[i];
    const Point2& q = pts[(i + 1) % pts.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2;
}

// Affine map through three point pairs by Cramer's rule on the two edge
// vectors.
inline AffineMap2 cramer_affine(const Point2& p0, const Point2& p1, const Point2& p2, const Point2& q0,
                                const Point2& q1, const Point2& q2) {
  const Rational ux = p1.x - p0.x, uy = p1.y - p0.y;
  const Rational vx = p2.x - p0.x, vy = p2.y - p0.y;
  const Rational D = ux * vy - uy * vx;
  const Rational ax = q1.x - q0.x, ay = q1.y - q0.y;
  const Rational bx = q2.x - q0.x, by = q2.y - q0.y;
  // [[a b][c d]] [u v] = [A B]  =>  M = [A B] [u v]^-1
  Mat2 m{(ax * vy - bx * uy) / D, (bx * ux - ax * vx) / D, (ay * vy - by * uy) / D,
         (by * ux - ay * vx) / D};
  Point2 t{q0.x - (m.a * p0.x + m.b * p0.y), q0.y - (m.c * p0.x + m.d * p0.y)};
  return {m, t};
}

// Energy as a plain cell loop.
inline Rational energy_oracle(const pahomeo::PwaMap& f) {
  Rational e = 0;
  for (std::size_t c = 0; c < f.mesh.cells.size(); ++c) {
    std::vector<Point2> pts;
    for (auto v : f.mesh.cells[c]) pts.push_back(f.mesh.vertices[v]);
    e += shoelace(pts) * l1_oracle(f.maps[c].linear);
  }
  return e;
}

// Evaluation through a located cell.
class FastEval {
 public:
  explicit FastEval(const pahomeo::PwaMap& f) : f_(&f), loc_(f.mesh) {}
  Point2 operator()(const Point2& p) const {
    const auto c = loc_.locate(p);
    if (!c) throw std::out_of_range("point outside the domain");
    return pahomeo::affine_apply(f_->maps[*c], p);
  }

 private:
  const pahomeo::PwaMap* f_;
  pahomeo::PointLocator loc_;
};

// Same map over a finer mesh: each fine cell takes the map of the coarse
// cell containing its centroid.
inline pahomeo::PwaMap restrict_to(const pahomeo::PwaMap& f, pahomeo::Mesh fine) {
  pahomeo::PointLocator loc(f.mesh);
  std::vector<AffineMap2> maps;
  for (std::size_t c = 0; c < fine.cells.size(); ++c) {
    const auto pts = fine.cell_points(static_cast<pahomeo::CellIndex>(c));
    Point2 g{0, 0};
    for (const auto& p : pts) g = g + p;
    g = Rational(1, static_cast<long>(pts.size())) * g;
    maps.push_back(f.maps[*loc.locate(g)]);
  }
  return {std::move(fine), std::move(maps)};
}

// Unit-square boundary-identity maps used by the property and metric suites.
struct PoolEntry {
  std::string name;
  pahomeo::PwaMap map;
};

inline std::vector<PoolEntry> map_pool() {
  std::vector<PoolEntry> pool;
  pool.push_back({"identity", pahomeo::identity_two_triangles()});
  pool.push_back({"star(3/5,2/5)", pahomeo::star_homeomorphism({Rational(3, 5), Rational(2, 5)})});
  pool.push_back({"star(2/5,7/10)", pahomeo::star_homeomorphism({Rational(2, 5), Rational(7, 10)})});
  // With A = I the k = 2 block lifts nothing and is the identity itself.
  pool.push_back({"block k=3", pahomeo::build_block({Mat2::identity(), 3}).phi});
  pool.push_back({"block k=4", pahomeo::build_block({Mat2::identity(), 4}).phi});
  return pool;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("pahomeo_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
