#include "pahomeo/pwa.hpp"

#include "spatial.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace pahomeo {

std::vector<Point2> Mesh::cell_points(CellIndex c) const {
  std::vector<Point2> pts;
  pts.reserve(cells[c].size());
  for (VertexIndex v : cells[c]) pts.push_back(vertices[v]);
  return pts;
}

ConvexPolygon Mesh::cell_polygon(CellIndex c) const {
  return ConvexPolygon(strip_collinear(cell_points(c)));
}

Rational Mesh::cell_area(CellIndex c) const { return loop_area(cell_points(c)); }

VertexIndex VertexPool::add(const Point2& p) {
  const auto [it, inserted] = index_.try_emplace(p, static_cast<VertexIndex>(points_.size()));
  if (inserted) points_.push_back(p);
  return it->second;
}

namespace {

std::string cell_name(std::size_t c) { return "cell " + std::to_string(c); }

// A weakly convex loop: left or straight turns only, no reversals, and the
// corners form a strictly convex polygon.
bool weakly_convex_cell(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = pts[i];
    const Point2& q = pts[(i + 1) % n];
    const Point2& r = pts[(i + 2) % n];
    if (p == q) return false;
    const Rational turn = cross(p, q, r);
    if (turn < 0) return false;
    if (turn == 0 && dot(q - p, r - q) <= 0) return false;
  }
  try {
    ConvexPolygon corners(strip_collinear(pts));
    return loop_area(pts) == polygon_area(corners);
  } catch (const std::invalid_argument&) {
    return false;
  }
}

}  // namespace

MeshReport check_mesh(const Mesh& mesh, std::size_t pairwise_limit) {
  MeshReport report;
  auto problem = [&](std::string s) {
    if (report.problems.size() < 50) report.problems.push_back(std::move(s));
  };
  const std::size_t nv = mesh.vertices.size();
  bool shapes_ok = true;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    bool indices_ok = cell.size() >= 3;
    for (VertexIndex v : cell) indices_ok = indices_ok && v < nv;
    if (!indices_ok) {
      problem(cell_name(c) + ": bad vertex indices");
      shapes_ok = false;
      continue;
    }
    const auto pts = mesh.cell_points(static_cast<CellIndex>(c));
    if (!weakly_convex_cell(pts)) {
      problem(cell_name(c) + ": not a convex counterclockwise cell");
      shapes_ok = false;
    }
    for (const Point2& p : pts) {
      if (!mesh.domain.contains(p)) {
        problem(cell_name(c) + ": vertex outside the domain");
        shapes_ok = false;
        break;
      }
    }
  }
  if (!shapes_ok) return report;

  Rational total = 0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) total += mesh.cell_area(static_cast<CellIndex>(c));
  if (total != polygon_area(mesh.domain)) {
    problem("cell areas sum to " + to_string(total) + ", domain area is " +
            to_string(polygon_area(mesh.domain)));
  }

  // Every directed edge is matched by exactly one reversed edge, or lies on
  // the domain boundary with the domain's orientation. Together with the
  // exact area balance and a once-covered boundary this forces cells to have
  // disjoint interiors (the cell chains sum to the domain with degree one).
  std::map<std::pair<VertexIndex, VertexIndex>, std::vector<std::size_t>> directed;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    for (std::size_t i = 0; i < cell.size(); ++i) {
      directed[{cell[i], cell[(i + 1) % cell.size()]}].push_back(c);
    }
  }
  const ConvexPolygon& dom = mesh.domain;
  std::vector<Rational> covered(dom.size(), Rational(0));
  for (const auto& [edge, owners] : directed) {
    if (owners.size() > 1) {
      problem(cell_name(owners[0]) + ": directed edge shared by several cells");
      continue;
    }
    const auto reverse = directed.find({edge.second, edge.first});
    if (reverse != directed.end()) continue;
    const Point2& u = mesh.vertices[edge.first];
    const Point2& v = mesh.vertices[edge.second];
    const auto pu = detail::boundary_position(dom, u);
    bool on_boundary = false;
    if (pu) {
      const std::size_t e = pu->edge;
      const Point2& a = dom[e];
      const Point2& b = dom[(e + 1) % dom.size()];
      if (cross(a, b, v) == 0) {
        const Rational tv = dot(v - a, b - a) / squared_norm(b - a);
        if (tv > pu->t && tv <= 1) {
          covered[e] += tv - pu->t;
          on_boundary = true;
        }
      }
    }
    if (!on_boundary) {
      problem(cell_name(owners[0]) + ": edge neither shared nor on the domain boundary");
    }
  }
  for (std::size_t e = 0; e < dom.size(); ++e) {
    if (covered[e] != 1) problem("domain edge " + std::to_string(e) + " not covered exactly once");
  }

  if (report.ok() && mesh.cells.size() <= pairwise_limit) {
    std::vector<ConvexPolygon> polys;
    polys.reserve(mesh.cells.size());
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) polys.push_back(mesh.cell_polygon(static_cast<CellIndex>(c)));
    for (std::size_t i = 0; i < polys.size(); ++i) {
      for (std::size_t j = i + 1; j < polys.size(); ++j) {
        if (convex_clip(polys[i], polys[j])) {
          problem(cell_name(i) + " overlaps " + cell_name(j));
        }
      }
    }
  }
  return report;
}

Mesh make_conforming(Mesh mesh) {
  detail::BucketGrid grid(detail::bounding_box(mesh.domain.vertices()), mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Point2& p = mesh.vertices[v];
    grid.insert(static_cast<std::uint32_t>(v), detail::bounding_box(std::span<const Point2>(&p, 1)));
  }
  for (auto& cell : mesh.cells) {
    std::vector<VertexIndex> out;
    out.reserve(cell.size());
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const VertexIndex a = cell[i];
      const VertexIndex b = cell[(i + 1) % cell.size()];
      out.push_back(a);
      const Point2& pa = mesh.vertices[a];
      const Point2& pb = mesh.vertices[b];
      const Point2 ends[2] = {pa, pb};
      const Point2 d = pb - pa;
      const Rational len2 = squared_norm(d);
      std::vector<std::pair<Rational, VertexIndex>> inner;
      for (std::uint32_t w : grid.query(detail::bounding_box(ends))) {
        if (w == a || w == b) continue;
        const Point2& pw = mesh.vertices[w];
        if ((pw.x < pa.x && pw.x < pb.x) || (pw.x > pa.x && pw.x > pb.x) ||
            (pw.y < pa.y && pw.y < pb.y) || (pw.y > pa.y && pw.y > pb.y)) {
          continue;
        }
        if (cross(pa, pb, pw) != 0) continue;
        Rational t = dot(pw - pa, d) / len2;
        if (t > 0 && t < 1) inner.emplace_back(std::move(t), w);
      }
      std::sort(inner.begin(), inner.end(),
                [](const auto& l, const auto& r) { return l.first < r.first; });
      for (const auto& [t, w] : inner) out.push_back(w);
    }
    cell = std::move(out);
  }
  return mesh;
}

Mesh red_refine(const Mesh& mesh) {
  VertexPool pool;
  for (const Point2& p : mesh.vertices) pool.add(p);
  Mesh out{{}, {}, mesh.domain};
  out.cells.reserve(mesh.cells.size() * 4);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    if (cell.size() != 3) throw std::invalid_argument("red_refine: " + cell_name(c) + " is not a triangle");
    const Point2& p0 = mesh.vertices[cell[0]];
    const Point2& p1 = mesh.vertices[cell[1]];
    const Point2& p2 = mesh.vertices[cell[2]];
    const VertexIndex m01 = pool.add(midpoint(p0, p1));
    const VertexIndex m12 = pool.add(midpoint(p1, p2));
    const VertexIndex m20 = pool.add(midpoint(p2, p0));
    out.cells.push_back({cell[0], m01, m20});
    out.cells.push_back({m01, cell[1], m12});
    out.cells.push_back({m20, m12, cell[2]});
    out.cells.push_back({m01, m12, m20});
  }
  out.vertices = pool.release();
  return out;
}

}  // namespace pahomeo
