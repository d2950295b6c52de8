#include "pahomeo/pwa.hpp"

#include "spatial.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace pahomeo {

namespace {

// Three corners of a cell, enough to pin down an affine map on it.
std::array<VertexIndex, 3> cell_frame(const Mesh& mesh, CellIndex c) {
  const auto& cell = mesh.cells[c];
  const std::size_t n = cell.size();
  for (std::size_t i = 0; i < n; ++i) {
    const VertexIndex a = cell[0];
    const VertexIndex b = cell[(i + 1) % n];
    const VertexIndex d = cell[(i + 2) % n];
    if (cross(mesh.vertices[a], mesh.vertices[b], mesh.vertices[d]) != 0) return {a, b, d};
  }
  throw std::invalid_argument("cell " + std::to_string(c) + " is degenerate");
}

struct BoundaryEdge {
  CellIndex cell;
  VertexIndex from;
  VertexIndex to;
  std::size_t domain_edge;
  Rational t_from;
};

// Directed cell edges without a reversed partner, in counterclockwise order
// around the domain starting at domain vertex 0.
std::vector<BoundaryEdge> boundary_edges(const Mesh& mesh) {
  std::map<std::pair<VertexIndex, VertexIndex>, CellIndex> directed;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    for (std::size_t i = 0; i < cell.size(); ++i) {
      directed.emplace(std::pair{cell[i], cell[(i + 1) % cell.size()]}, static_cast<CellIndex>(c));
    }
  }
  std::vector<BoundaryEdge> out;
  for (const auto& [edge, cell] : directed) {
    if (directed.count({edge.second, edge.first}) != 0) continue;
    const auto pos = detail::boundary_position(mesh.domain, mesh.vertices[edge.first]);
    if (!pos) continue;
    out.push_back({cell, edge.first, edge.second, pos->edge, pos->t});
  }
  std::sort(out.begin(), out.end(), [](const BoundaryEdge& l, const BoundaryEdge& r) {
    return l.domain_edge != r.domain_edge ? l.domain_edge < r.domain_edge : l.t_from < r.t_from;
  });
  return out;
}

}  // namespace

PwaMap identity_map(Mesh mesh) {
  std::vector<AffineMap2> maps(mesh.cells.size(), AffineMap2::identity());
  return {std::move(mesh), std::move(maps)};
}

PwaMap single_cell_map(const ConvexPolygon& domain, const AffineMap2& f) {
  Mesh mesh{domain.vertices(), {}, domain};
  std::vector<VertexIndex> cell(domain.size());
  for (std::size_t i = 0; i < cell.size(); ++i) cell[i] = static_cast<VertexIndex>(i);
  mesh.cells.push_back(std::move(cell));
  return {std::move(mesh), {f}};
}

PwaMap from_vertex_values(Mesh mesh, const std::vector<Point2>& values) {
  if (values.size() != mesh.vertices.size()) {
    throw std::invalid_argument("vertex value count does not match the mesh");
  }
  std::vector<AffineMap2> maps;
  maps.reserve(mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto frame = cell_frame(mesh, static_cast<CellIndex>(c));
    AffineMap2 f = affine_from_three_points(
        {mesh.vertices[frame[0]], mesh.vertices[frame[1]], mesh.vertices[frame[2]]},
        {values[frame[0]], values[frame[1]], values[frame[2]]});
    for (VertexIndex v : mesh.cells[c]) {
      if (!(affine_apply(f, mesh.vertices[v]) == values[v])) {
        throw std::invalid_argument("vertex values are not affine on cell " + std::to_string(c));
      }
    }
    maps.push_back(std::move(f));
  }
  return {std::move(mesh), std::move(maps)};
}

std::vector<Point2> vertex_values(const PwaMap& f) {
  std::vector<Point2> out(f.mesh.vertices.size());
  std::vector<bool> seen(out.size(), false);
  for (std::size_t c = 0; c < f.mesh.cells.size(); ++c) {
    for (VertexIndex v : f.mesh.cells[c]) {
      if (seen[v]) continue;
      out[v] = affine_apply(f.maps[c], f.mesh.vertices[v]);
      seen[v] = true;
    }
  }
  return out;
}

PwaMap red_refine(const PwaMap& f) {
  Mesh refined = red_refine(f.mesh);
  std::vector<AffineMap2> maps;
  maps.reserve(refined.cells.size());
  for (const AffineMap2& m : f.maps) {
    for (int i = 0; i < 4; ++i) maps.push_back(m);
  }
  return {std::move(refined), std::move(maps)};
}

ConvexPolygon image_domain(const PwaMap& f) {
  std::vector<Point2> corners;
  corners.reserve(f.mesh.domain.size());
  for (const Point2& p : f.mesh.domain.vertices()) corners.push_back(evaluate(f, p));
  return ConvexPolygon(std::move(corners));
}

ValidationReport validate_homeomorphism(const PwaMap& f) {
  ValidationReport r;
  const Mesh& mesh = f.mesh;
  auto fail = [&](bool ValidationReport::*flag, std::string msg) {
    r.*flag = false;
    if (r.failures.size() < 50) r.failures.push_back(std::move(msg));
  };
  if (f.maps.size() != mesh.cells.size()) {
    fail(&ValidationReport::structure_ok, "structure: one affine map per cell required");
    return r;
  }
  const MeshReport mr = check_mesh(mesh, 0);
  for (const auto& p : mr.problems) fail(&ValidationReport::structure_ok, "structure: " + p);
  if (!r.structure_ok) return r;

  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (det(f.maps[c].linear) <= 0) {
      fail(&ValidationReport::orientation_ok, "orientation: cell " + std::to_string(c) + " has det <= 0");
    }
  }

  std::vector<Point2> value(mesh.vertices.size());
  std::vector<CellIndex> first(mesh.vertices.size(), static_cast<CellIndex>(-1));
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (VertexIndex v : mesh.cells[c]) {
      Point2 image = affine_apply(f.maps[c], mesh.vertices[v]);
      if (first[v] == static_cast<CellIndex>(-1)) {
        first[v] = static_cast<CellIndex>(c);
        value[v] = std::move(image);
      } else if (!(value[v] == image)) {
        fail(&ValidationReport::continuity_ok,
             "continuity: cells " + std::to_string(first[v]) + " and " + std::to_string(c) +
                 " disagree at vertex " + std::to_string(v));
      }
    }
  }

  std::optional<ConvexPolygon> target;
  try {
    std::vector<Point2> corners;
    for (const Point2& p : mesh.domain.vertices()) corners.push_back(evaluate(f, p));
    target.emplace(std::move(corners));
  } catch (const std::exception& e) {
    fail(&ValidationReport::boundary_ok, std::string("boundary: corner images ") + e.what());
  }
  if (target) {
    // Boundary vertices and edge midpoints must run once around the target
    // polygon, strictly in counterclockwise order.
    const auto edges = boundary_edges(mesh);
    const Point2 start = evaluate(f, mesh.domain[0]);
    const auto p0 = detail::boundary_position(*target, start);
    if (!p0) {
      fail(&ValidationReport::boundary_ok, "boundary: first corner image is not on the image domain");
      return r;
    }
    const std::size_t m = target->size();
    std::optional<std::pair<std::size_t, Rational>> previous;
    bool ordered = p0->t == 0;
    std::size_t k = 0;
    for (const BoundaryEdge& e : edges) {
      const AffineMap2& map = f.maps[e.cell];
      const Point2 a = mesh.vertices[e.from];
      const Point2 b = mesh.vertices[e.to];
      const Point2 fa = affine_apply(map, a);
      const Point2 fb = affine_apply(map, b);
      bool shared_edge = false;
      for (std::size_t t = 0; t < m && !shared_edge; ++t) {
        const Point2& u = (*target)[t];
        const Point2& w = (*target)[(t + 1) % m];
        shared_edge = cross(u, w, fa) == 0 && cross(u, w, fb) == 0;
      }
      if (!shared_edge) ordered = false;
      for (const Point2& q : {fa, affine_apply(map, midpoint(a, b))}) {
        const auto pos = detail::boundary_position(*target, q);
        if (!pos) {
          ordered = false;
          fail(&ValidationReport::boundary_ok, "boundary: image of boundary edge " + std::to_string(k) +
                                                   " leaves the image domain boundary");
          break;
        }
        std::pair<std::size_t, Rational> key{(pos->edge + m - p0->edge) % m, pos->t};
        if (previous && !(previous->first < key.first ||
                          (previous->first == key.first && previous->second < key.second))) {
          ordered = false;
        }
        previous = std::move(key);
      }
      ++k;
    }
    if (!ordered && r.boundary_ok) {
      fail(&ValidationReport::boundary_ok, "boundary: trace is not monotone around the image domain");
    }
    if (r.boundary_ok && r.orientation_ok) {
      Rational image_area = 0;
      for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        image_area += mesh.cell_area(static_cast<CellIndex>(c)) * det(f.maps[c].linear);
      }
      if (image_area != polygon_area(*target)) {
        fail(&ValidationReport::area_ok, "area: image cells do not tile the image domain");
      }
    }
  }
  return r;
}

bool is_identity_on_boundary(const PwaMap& f) {
  for (const BoundaryEdge& e : boundary_edges(f.mesh)) {
    for (VertexIndex v : {e.from, e.to}) {
      const Point2& p = f.mesh.vertices[v];
      if (!(affine_apply(f.maps[e.cell], p) == p)) return false;
    }
  }
  return true;
}

CellSet::CellSet(const Mesh& owner, std::vector<CellIndex> indices)
    : owner_cells_(owner.cell_count()), indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && indices_.back() >= owner_cells_) {
    throw std::invalid_argument("cell index out of range for the owning mesh");
  }
}

CellSet CellSet::all(const Mesh& owner) {
  std::vector<CellIndex> idx(owner.cell_count());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<CellIndex>(i);
  return CellSet(owner, std::move(idx));
}

bool CellSet::contains(CellIndex c) const {
  return std::binary_search(indices_.begin(), indices_.end(), c);
}

namespace {

void require_owner(const Mesh& mesh, const CellSet& region) {
  if (region.owner_cells() != mesh.cell_count()) {
    throw std::invalid_argument("cell set belongs to a different mesh");
  }
}

}  // namespace

Rational energy(const PwaMap& f) {
  Rational total = 0;
  for (std::size_t c = 0; c < f.mesh.cells.size(); ++c) {
    total += f.mesh.cell_area(static_cast<CellIndex>(c)) * mat_norm_l1(f.maps[c].linear);
  }
  return total;
}

Rational energy_on(const PwaMap& f, const CellSet& region) {
  require_owner(f.mesh, region);
  Rational total = 0;
  for (CellIndex c : region.indices()) total += f.mesh.cell_area(c) * mat_norm_l1(f.maps[c].linear);
  return total;
}

Rational area_of(const Mesh& mesh, const CellSet& region) {
  require_owner(mesh, region);
  Rational total = 0;
  for (CellIndex c : region.indices()) total += mesh.cell_area(c);
  return total;
}

Rational image_area_of(const PwaMap& f, const CellSet& region) {
  require_owner(f.mesh, region);
  Rational total = 0;
  for (CellIndex c : region.indices()) total += f.mesh.cell_area(c) * det(f.maps[c].linear);
  return total;
}

Point2 evaluate(const PwaMap& f, const Point2& p) {
  for (std::size_t c = 0; c < f.mesh.cells.size(); ++c) {
    const auto& cell = f.mesh.cells[c];
    bool inside = true;
    for (std::size_t i = 0; i < cell.size() && inside; ++i) {
      inside = cross(f.mesh.vertices[cell[i]], f.mesh.vertices[cell[(i + 1) % cell.size()]], p) >= 0;
    }
    if (inside) return affine_apply(f.maps[c], p);
  }
  throw std::out_of_range("point outside the domain");
}

PwaMap inverse(const PwaMap& f) {
  const ValidationReport report = validate_homeomorphism(f);
  if (!report.ok()) {
    throw std::invalid_argument("inverse of an invalid map: " +
                                (report.failures.empty() ? std::string("?") : report.failures.front()));
  }
  Mesh mesh{vertex_values(f), f.mesh.cells, image_domain(f)};
  std::vector<AffineMap2> maps;
  maps.reserve(f.maps.size());
  for (const AffineMap2& m : f.maps) maps.push_back(affine_invert(m));
  return {std::move(mesh), std::move(maps)};
}

std::vector<ConvexPolygon> split_to_triangles(const Mesh& mesh, const CellSet& region) {
  require_owner(mesh, region);
  std::vector<ConvexPolygon> out;
  for (CellIndex c : region.indices()) {
    const ConvexPolygon poly = mesh.cell_polygon(c);
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      out.emplace_back(std::vector<Point2>{poly[0], poly[i], poly[i + 1]});
    }
  }
  return out;
}

PwaMap conjugate(const PwaMap& f, const AffineMap2& pre, const AffineMap2& post) {
  if (det(post.linear) == 0) throw std::domain_error("non-invertible affine map");
  const AffineMap2 pre_inv = affine_invert(pre);
  const bool flip = det(pre.linear) < 0;
  Mesh mesh{{}, f.mesh.cells, f.mesh.domain};
  mesh.vertices.reserve(f.mesh.vertices.size());
  for (const Point2& v : f.mesh.vertices) mesh.vertices.push_back(affine_apply(pre_inv, v));
  if (flip) {
    for (auto& cell : mesh.cells) std::reverse(cell.begin(), cell.end());
  }
  std::vector<Point2> dom;
  for (const Point2& v : f.mesh.domain.vertices()) dom.push_back(affine_apply(pre_inv, v));
  if (flip) std::reverse(dom.begin(), dom.end());
  mesh.domain = ConvexPolygon(std::move(dom));
  std::vector<AffineMap2> maps;
  maps.reserve(f.maps.size());
  for (const AffineMap2& m : f.maps) maps.push_back(compose(post, compose(m, pre)));
  return {std::move(mesh), std::move(maps)};
}

}  // namespace pahomeo
