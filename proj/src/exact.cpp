#include "pahomeo/exact.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace pahomeo {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::optional<mpz_class> exact_isqrt(const mpz_class& v) {
  if (v < 0) return std::nullopt;
  mpz_class r;
  mpz_sqrt(r.get_mpz_t(), v.get_mpz_t());
  if (r * r != v) return std::nullopt;
  return r;
}

// floor(sqrt(x) * 2^bits)
mpz_class scaled_isqrt(const Rational& x, unsigned bits) {
  mpz_class scaled = x.get_num();
  scaled <<= 2 * bits;
  mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), x.get_den().get_mpz_t());
  mpz_class r;
  mpz_sqrt(r.get_mpz_t(), scaled.get_mpz_t());
  return r;
}

Rational scaled_to_rational(const mpz_class& v, unsigned bits) {
  mpz_class den = 1;
  den <<= bits;
  Rational q(v, den);
  q.canonicalize();
  return q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) body.remove_prefix(1);
  const auto slash = body.find('/');
  const std::string_view num = body.substr(0, slash);
  const std::string_view den = slash == std::string_view::npos ? std::string_view{"1"}
                                                               : body.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den)) {
    throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
  }
  mpz_class n(std::string(num), 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  if (text.front() == '-') n = -n;
  Rational q(n, d);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string to_decimal(const Rational& value, int digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  const Rational magnitude = abs(value) * scale + Rational(1, 2);
  const mpz_class scaled = floor_to_integer(magnitude);
  std::string s = scaled.get_str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits)) {
      s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    }
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  }
  if (value < 0 && scaled != 0) s.insert(0, "-");
  return s;
}

std::optional<Rational> exact_sqrt(const Rational& x) {
  const auto n = exact_isqrt(x.get_num());
  const auto d = exact_isqrt(x.get_den());
  if (!n || !d) return std::nullopt;
  Rational r(*n, *d);
  r.canonicalize();
  return r;
}

Rational sqrt_upper(const Rational& x, unsigned bits) {
  if (x < 0) throw std::domain_error("square root of a negative rational");
  if (auto r = exact_sqrt(x)) return *r;
  return scaled_to_rational(scaled_isqrt(x, bits) + 1, bits);
}

Rational sqrt_lower(const Rational& x, unsigned bits) {
  if (x < 0) throw std::domain_error("square root of a negative rational");
  if (auto r = exact_sqrt(x)) return *r;
  return scaled_to_rational(scaled_isqrt(x, bits), bits);
}

mpz_class floor_to_integer(const Rational& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

mpz_class ceil_to_integer(const Rational& x) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Rational mat_norm_l1(const Mat2& m) {
  return abs(m.a) + abs(m.b) + abs(m.c) + abs(m.d);
}

Rational det(const Mat2& m) { return m.a * m.d - m.b * m.c; }

Point2 affine_apply(const AffineMap2& f, const Point2& p) {
  return f.linear * p + f.translation;
}

AffineMap2 compose(const AffineMap2& outer, const AffineMap2& inner) {
  return {outer.linear * inner.linear, outer.linear * inner.translation + outer.translation};
}

AffineMap2 affine_invert(const AffineMap2& f) {
  const Rational D = det(f.linear);
  if (D == 0) throw std::domain_error("non-invertible affine map");
  const Mat2& m = f.linear;
  const Mat2 inv{m.d / D, -m.b / D, -m.c / D, m.a / D};
  const Point2 t = inv * f.translation;
  return {inv, {-t.x, -t.y}};
}

AffineMap2 affine_from_three_points(const std::array<Point2, 3>& src,
                                    const std::array<Point2, 3>& dst) {
  const Point2 u = src[1] - src[0];
  const Point2 v = src[2] - src[0];
  const Rational D = u.x * v.y - u.y * v.x;
  if (D == 0) throw std::domain_error("degenerate source triangle");
  const Point2 du = dst[1] - dst[0];
  const Point2 dv = dst[2] - dst[0];
  // linear * [u v] = [du dv]  =>  linear = [du dv] * [u v]^-1
  const Mat2 src_inv{v.y / D, -v.x / D, -u.y / D, u.x / D};
  const Mat2 dst_cols{du.x, dv.x, du.y, dv.y};
  const Mat2 linear = dst_cols * src_inv;
  return {linear, dst[0] - linear * src[0]};
}

ConvexPolygon::ConvexPolygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (vertices_[i] == vertices_[j]) throw std::invalid_argument("polygon has a repeated vertex");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]) <= 0) {
      throw std::invalid_argument("polygon is not strictly convex and counterclockwise");
    }
  }
  // Left turns everywhere still admit a star polygon; a convex loop goes
  // up and down exactly once.
  const auto rising = [](const Point2& p, const Point2& q) {
    return p.y < q.y || (p.y == q.y && p.x > q.x);
  };
  std::size_t direction_changes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rising(vertices_[i], vertices_[(i + 1) % n]) !=
        rising(vertices_[(i + 1) % n], vertices_[(i + 2) % n])) {
      ++direction_changes;
    }
  }
  if (direction_changes != 2) {
    throw std::invalid_argument("polygon is not strictly convex and counterclockwise");
  }
  const auto first = std::min_element(vertices_.begin(), vertices_.end());
  std::rotate(vertices_.begin(), first, vertices_.end());
}

ConvexPolygon ConvexPolygon::rectangle(const Rational& x0, const Rational& y0,
                                       const Rational& x1, const Rational& y1) {
  return ConvexPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

bool ConvexPolygon::contains(const Point2& p) const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(vertices_[i], vertices_[(i + 1) % n], p) < 0) return false;
  }
  return true;
}

Rational loop_area(std::span<const Point2> loop) {
  Rational twice = 0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = loop[i];
    const Point2& q = loop[(i + 1) % n];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2;
}

Rational polygon_area(const ConvexPolygon& p) { return loop_area(p.vertices()); }

Rational squared_diameter(std::span<const Point2> points) {
  Rational best = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      Rational d = squared_norm(points[i] - points[j]);
      if (d > best) best = std::move(d);
    }
  }
  return best;
}

Rational squared_diameter(const ConvexPolygon& p) { return squared_diameter(p.vertices()); }

std::vector<Point2> strip_collinear(std::span<const Point2> loop) {
  std::vector<Point2> pts;
  pts.reserve(loop.size());
  for (const Point2& p : loop) {
    if (pts.empty() || !(pts.back() == p)) pts.push_back(p);
  }
  while (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
  bool changed = true;
  while (changed && pts.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size() && pts.size() >= 3; ++i) {
      const std::size_t n = pts.size();
      const Point2& prev = pts[(i + n - 1) % n];
      const Point2& next = pts[(i + 1) % n];
      if (cross(prev, pts[i], next) == 0) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  if (pts.size() < 3) pts.clear();
  return pts;
}

std::vector<Point2> clip_loop(std::span<const Point2> subject, const ConvexPolygon& clip) {
  std::vector<Point2> current(subject.begin(), subject.end());
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !current.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % m];
    std::vector<Point2> next;
    next.reserve(current.size() + 2);
    const std::size_t n = current.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& p = current[i];
      const Point2& q = current[(i + 1) % n];
      const Rational sp = cross(a, b, p);
      const Rational sq = cross(a, b, q);
      if (sp >= 0) next.push_back(p);
      if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
        const Rational t = sp / (sp - sq);
        next.push_back(p + t * (q - p));
      }
    }
    current = std::move(next);
  }
  return current;
}

std::optional<ConvexPolygon> convex_clip(const ConvexPolygon& subject, const ConvexPolygon& clip) {
  std::vector<Point2> pts = strip_collinear(clip_loop(subject.vertices(), clip));
  if (pts.size() < 3) return std::nullopt;
  return ConvexPolygon(std::move(pts));
}

}  // namespace pahomeo
