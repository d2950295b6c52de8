#include "pahomeo/pwa.hpp"

#include "spatial.hpp"

#include <stdexcept>

namespace pahomeo {

namespace {

// Calls visit(i, j, loop) for every cell pair whose closed intersection is
// non-empty; loop is the raw clipped vertex list (may be degenerate).
template <class Visit>
void for_each_intersection(const Mesh& m1, const Mesh& m2, Visit&& visit) {
  detail::BucketGrid grid(detail::bounding_box(m2.domain.vertices()), m2.cell_count());
  std::vector<ConvexPolygon> clip_polys;
  clip_polys.reserve(m2.cell_count());
  for (std::size_t j = 0; j < m2.cell_count(); ++j) {
    const auto pts = m2.cell_points(static_cast<CellIndex>(j));
    grid.insert(static_cast<std::uint32_t>(j), detail::bounding_box(pts));
    clip_polys.push_back(ConvexPolygon(strip_collinear(pts)));
  }
  for (std::size_t i = 0; i < m1.cell_count(); ++i) {
    const auto pts = m1.cell_points(static_cast<CellIndex>(i));
    for (std::uint32_t j : grid.query(detail::bounding_box(pts))) {
      std::vector<Point2> loop = clip_loop(pts, clip_polys[j]);
      if (!loop.empty()) visit(static_cast<CellIndex>(i), static_cast<CellIndex>(j), loop);
    }
  }
}

void require_same_domain(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (!(a == b)) throw std::invalid_argument("meshes have different domains");
}

}  // namespace

Mesh overlay(const Mesh& m1, const Mesh& m2) {
  require_same_domain(m1.domain, m2.domain);
  VertexPool pool;
  Mesh out{{}, {}, m1.domain};
  for_each_intersection(m1, m2, [&](CellIndex, CellIndex, const std::vector<Point2>& loop) {
    const std::vector<Point2> corners = strip_collinear(loop);
    if (corners.size() < 3) return;
    std::vector<VertexIndex> cell;
    cell.reserve(corners.size());
    for (const Point2& p : corners) cell.push_back(pool.add(p));
    out.cells.push_back(std::move(cell));
  });
  out.vertices = pool.release();
  return make_conforming(std::move(out));
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  auto grid = std::make_shared<detail::BucketGrid>(detail::bounding_box(mesh.domain.vertices()), mesh.cell_count());
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    grid->insert(static_cast<std::uint32_t>(c), detail::bounding_box(mesh.cell_points(static_cast<CellIndex>(c))));
  }
  grid_ = std::move(grid);
}

std::optional<CellIndex> PointLocator::locate(const Point2& p) const {
  const double x = p.x.get_d();
  const double y = p.y.get_d();
  for (std::uint32_t c : grid_->query({x, y, x, y})) {
    const auto& cell = mesh_->cells[c];
    bool inside = true;
    for (std::size_t i = 0; i < cell.size() && inside; ++i) {
      inside = cross(mesh_->vertices[cell[i]], mesh_->vertices[cell[(i + 1) % cell.size()]], p) >= 0;
    }
    if (inside) return c;
  }
  return std::nullopt;
}

SupDistance make_sup_distance(Rational squared) {
  SupDistance s;
  s.upper = sqrt_upper(squared);
  s.exact = exact_sqrt(squared).has_value();
  s.squared = std::move(squared);
  return s;
}

SupDistance sup_distance(const PwaMap& f, const PwaMap& g) {
  require_same_domain(f.mesh.domain, g.mesh.domain);
  Rational best = 0;
  // f - g is affine on each intersection, so |f - g|^2 is convex there and
  // peaks at a vertex.
  for_each_intersection(f.mesh, g.mesh, [&](CellIndex i, CellIndex j, const std::vector<Point2>& loop) {
    const Mat2 dl = f.maps[i].linear - g.maps[j].linear;
    const Point2 dt = f.maps[i].translation - g.maps[j].translation;
    for (const Point2& p : loop) {
      Rational d = squared_norm(dl * p + dt);
      if (d > best) best = std::move(d);
    }
  });
  return make_sup_distance(std::move(best));
}

MetricReport make_metric_report(Rational sup_forward_sq, Rational sup_inverse_sq,
                                Rational var_f, Rational var_g, const Rational& M) {
  if (var_f >= M || var_g >= M) throw std::domain_error("outside space X");
  MetricReport r;
  r.sup_forward = make_sup_distance(std::move(sup_forward_sq));
  r.sup_inverse = make_sup_distance(std::move(sup_inverse_sq));
  r.variation_term = abs(Rational(1) / (M - var_f) - Rational(1) / (M - var_g));
  r.var_f = std::move(var_f);
  r.var_g = std::move(var_g);
  r.d_value = r.sup_forward.upper + r.sup_inverse.upper + r.variation_term;
  r.d_lower = sqrt_lower(r.sup_forward.squared) + sqrt_lower(r.sup_inverse.squared) + r.variation_term;
  return r;
}

MetricReport metric_d(const PwaMap& f, const PwaMap& g, const Rational& M) {
  for (const PwaMap* h : {&f, &g}) {
    if (!(h->mesh.domain == ConvexPolygon::unit_square())) {
      throw std::invalid_argument("metric_d: map is not defined on the unit square");
    }
    if (!is_identity_on_boundary(*h)) {
      throw std::invalid_argument("metric_d: boundary trace is not the identity");
    }
  }
  Rational var_f = energy(f);
  Rational var_g = energy(g);
  if (var_f >= M || var_g >= M) throw std::domain_error("outside space X");
  const PwaMap f_inv = inverse(f);
  const PwaMap g_inv = inverse(g);
  return make_metric_report(sup_distance(f, g).squared, sup_distance(f_inv, g_inv).squared,
                            std::move(var_f), std::move(var_g), M);
}

}  // namespace pahomeo
