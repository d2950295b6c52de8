#pragma once

// Exact scalar and planar primitives. Every number in the library is a GMP
// rational; nothing is ever rounded except in to_decimal().

#include <gmpxx.h>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pahomeo {

using Rational = mpq_class;

/// Parses "p/q" or "p" (optional sign, decimal digits only).
/// Throws std::invalid_argument on anything else, including q == 0.
Rational parse_rational(std::string_view text);

/// Always "p/q", also for integers ("3/1").
std::string to_string(const Rational& value);

/// Fixed-point rendering rounded half-up to `digits` fractional digits.
std::string to_decimal(const Rational& value, int digits = 12);

/// sqrt(x) as a rational when x is the square of a rational.
std::optional<Rational> exact_sqrt(const Rational& x);

/// Rational bounds lo <= sqrt(x) <= hi with hi - lo <= 2^-bits.
/// Both are exact when x is a rational square.
Rational sqrt_upper(const Rational& x, unsigned bits = 64);
Rational sqrt_lower(const Rational& x, unsigned bits = 64);

mpz_class floor_to_integer(const Rational& x);
mpz_class ceil_to_integer(const Rational& x);

struct Point2 {
  Rational x;
  Rational y;

  friend Point2 operator+(const Point2& p, const Point2& q) { return {p.x + q.x, p.y + q.y}; }
  friend Point2 operator-(const Point2& p, const Point2& q) { return {p.x - q.x, p.y - q.y}; }
  friend Point2 operator*(const Rational& s, const Point2& p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2& p, const Point2& q) { return p.x == q.x && p.y == q.y; }
  // Lexicographic (x, then y).
  friend bool operator<(const Point2& p, const Point2& q) {
    const int c = cmp(p.x, q.x);
    return c < 0 || (c == 0 && p.y < q.y);
  }
};

inline Rational dot(const Point2& p, const Point2& q) { return p.x * q.x + p.y * q.y; }
inline Rational squared_norm(const Point2& p) { return p.x * p.x + p.y * p.y; }

/// Twice the signed area of (o, a, b); positive for a counterclockwise turn.
inline Rational cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline Point2 midpoint(const Point2& p, const Point2& q) {
  return {(p.x + q.x) / 2, (p.y + q.y) / 2};
}

/// Row-major [[a, b], [c, d]].
struct Mat2 {
  Rational a;
  Rational b;
  Rational c;
  Rational d;

  static Mat2 identity() { return {1, 0, 0, 1}; }

  Mat2 transpose() const { return {a, c, b, d}; }

  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
            m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
  friend Point2 operator*(const Mat2& m, const Point2& p) {
    return {m.a * p.x + m.b * p.y, m.c * p.x + m.d * p.y};
  }
  friend Mat2 operator*(const Rational& s, const Mat2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
  friend Mat2 operator+(const Mat2& m, const Mat2& n) {
    return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
  }
  friend Mat2 operator-(const Mat2& m, const Mat2& n) {
    return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
  }
  friend bool operator==(const Mat2& m, const Mat2& n) {
    return m.a == n.a && m.b == n.b && m.c == n.c && m.d == n.d;
  }
};

Rational mat_norm_l1(const Mat2& m);
Rational det(const Mat2& m);

/// x -> linear * x + translation
struct AffineMap2 {
  Mat2 linear = Mat2::identity();
  Point2 translation{0, 0};

  static AffineMap2 identity() { return {}; }
  static AffineMap2 translate(const Point2& t) { return {Mat2::identity(), t}; }
  static AffineMap2 scale(const Rational& s) { return {{s, 0, 0, s}, {0, 0}}; }

  friend bool operator==(const AffineMap2& f, const AffineMap2& g) {
    return f.linear == g.linear && f.translation == g.translation;
  }
};

Point2 affine_apply(const AffineMap2& f, const Point2& p);

/// outer ∘ inner
AffineMap2 compose(const AffineMap2& outer, const AffineMap2& inner);

/// Throws std::domain_error("non-invertible affine map") when det == 0.
AffineMap2 affine_invert(const AffineMap2& f);

/// The unique affine map with src[i] -> dst[i].
/// Throws std::domain_error("degenerate source triangle") for collinear src.
AffineMap2 affine_from_three_points(const std::array<Point2, 3>& src,
                                    const std::array<Point2, 3>& dst);

/// Strictly convex, counterclockwise, rotated so the lexicographically
/// smallest vertex comes first. Equality is therefore structural.
class ConvexPolygon {
 public:
  /// Throws std::invalid_argument if the vertex list is not a strictly
  /// convex counterclockwise polygon with at least three distinct vertices.
  explicit ConvexPolygon(std::vector<Point2> vertices);

  static ConvexPolygon rectangle(const Rational& x0, const Rational& y0,
                                 const Rational& x1, const Rational& y1);
  static ConvexPolygon unit_square() { return rectangle(0, 0, 1, 1); }

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }

  /// Closed containment.
  bool contains(const Point2& p) const;

  friend bool operator==(const ConvexPolygon& p, const ConvexPolygon& q) {
    return p.vertices_ == q.vertices_;
  }

 private:
  std::vector<Point2> vertices_;
};

/// Shoelace area of a counterclockwise point loop (any simple polygon).
Rational loop_area(std::span<const Point2> loop);

Rational polygon_area(const ConvexPolygon& p);
Rational squared_diameter(const ConvexPolygon& p);
Rational squared_diameter(std::span<const Point2> points);

/// Drops repeated and collinear points from a closed loop. The loop is
/// assumed weakly convex and counterclockwise.
std::vector<Point2> strip_collinear(std::span<const Point2> loop);

/// Intersection of two convex polygons when it has positive area.
std::optional<ConvexPolygon> convex_clip(const ConvexPolygon& subject,
                                         const ConvexPolygon& clip);

/// Sutherland-Hodgman on a raw weakly convex loop. The output may contain
/// repeated or collinear points, or be empty.
std::vector<Point2> clip_loop(std::span<const Point2> subject, const ConvexPolygon& clip);

}  // namespace pahomeo
