#pragma once

// Conforming convex-cell meshes and piecewise-affine maps over them.
//
// A mesh cell is a counterclockwise list of vertex indices whose corners form
// a strictly convex polygon. Extra vertices lying on a cell's edges are
// allowed; they appear after hanging vertices are split so that neighbouring
// cells share whole edges.

#include "pahomeo/exact.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pahomeo {

namespace detail {
class BucketGrid;
}

using CellIndex = std::uint32_t;
using VertexIndex = std::uint32_t;

struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::vector<VertexIndex>> cells;
  ConvexPolygon domain;

  std::size_t cell_count() const { return cells.size(); }
  std::vector<Point2> cell_points(CellIndex c) const;
  /// The cell's corners (collinear edge vertices removed).
  ConvexPolygon cell_polygon(CellIndex c) const;
  Rational cell_area(CellIndex c) const;
};

/// Deduplicating vertex store used by mesh builders.
class VertexPool {
 public:
  VertexIndex add(const Point2& p);
  const std::vector<Point2>& points() const { return points_; }
  std::vector<Point2> release() { return std::move(points_); }

 private:
  std::vector<Point2> points_;
  std::map<Point2, VertexIndex> index_;
};

struct MeshReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Cell shapes, exact area balance, edge conformity and boundary coverage.
/// Pairwise cell overlap is checked directly when the mesh has at most
/// `pairwise_limit` cells; otherwise it follows from the other checks.
MeshReport check_mesh(const Mesh& mesh, std::size_t pairwise_limit = 600);

/// Splits every cell edge at the mesh vertices lying strictly inside it.
Mesh make_conforming(Mesh mesh);

/// Each triangle split into four through its edge midpoints.
/// Throws std::invalid_argument for a non-triangle cell.
Mesh red_refine(const Mesh& mesh);

struct PwaMap {
  Mesh mesh;
  std::vector<AffineMap2> maps;
};

PwaMap identity_map(Mesh mesh);
PwaMap single_cell_map(const ConvexPolygon& domain, const AffineMap2& f);

/// The unique cellwise-affine map taking mesh vertex i to values[i].
/// Throws std::invalid_argument if some cell's prescribed values are not
/// affine on that cell.
PwaMap from_vertex_values(Mesh mesh, const std::vector<Point2>& values);

/// Image of each mesh vertex, taken from the first incident cell.
std::vector<Point2> vertex_values(const PwaMap& f);

/// Same map over the red-refined mesh (children inherit the parent's map).
PwaMap red_refine(const PwaMap& f);

/// Images of the domain corners, as a polygon. Throws std::invalid_argument
/// if they do not form a strictly convex counterclockwise polygon.
ConvexPolygon image_domain(const PwaMap& f);

struct ValidationReport {
  bool structure_ok = true;
  bool orientation_ok = true;
  bool continuity_ok = true;
  bool boundary_ok = true;
  bool area_ok = true;
  std::vector<std::string> failures;
  bool ok() const {
    return structure_ok && orientation_ok && continuity_ok && boundary_ok && area_ok;
  }
};

/// Certifies an orientation-preserving homeomorphism onto image_domain(f):
/// positive determinants, vertex continuity on a conforming mesh, and a
/// boundary trace that runs once around the image domain in order.
ValidationReport validate_homeomorphism(const PwaMap& f);

/// True iff every boundary vertex of the mesh is fixed.
bool is_identity_on_boundary(const PwaMap& f);

class CellSet {
 public:
  CellSet() = default;
  CellSet(const Mesh& owner, std::vector<CellIndex> indices);
  static CellSet all(const Mesh& owner);

  std::size_t owner_cells() const { return owner_cells_; }
  const std::vector<CellIndex>& indices() const { return indices_; }
  bool empty() const { return indices_.empty(); }
  std::size_t size() const { return indices_.size(); }
  bool contains(CellIndex c) const;

 private:
  std::size_t owner_cells_ = 0;
  std::vector<CellIndex> indices_;
};

Rational energy(const PwaMap& f);
/// Throws std::invalid_argument when region was not built for f's mesh.
Rational energy_on(const PwaMap& f, const CellSet& region);
Rational area_of(const Mesh& mesh, const CellSet& region);
Rational image_area_of(const PwaMap& f, const CellSet& region);

/// Throws std::out_of_range for a point outside the closed domain.
Point2 evaluate(const PwaMap& f, const Point2& p);

/// Bucketed point location. The mesh must outlive the locator.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  /// Some cell whose closure contains p.
  std::optional<CellIndex> locate(const Point2& p) const;

 private:
  const Mesh* mesh_;
  std::shared_ptr<const detail::BucketGrid> grid_;
};

/// Throws std::invalid_argument if f is not a valid homeomorphism.
PwaMap inverse(const PwaMap& f);

/// Common refinement. Throws std::invalid_argument for different domains.
Mesh overlay(const Mesh& m1, const Mesh& m2);

struct SupDistance {
  Rational squared;  // exact
  Rational upper;    // rational upper bound of the root, exact when possible
  bool exact = false;
  std::string decimal() const { return to_decimal(upper); }
};

SupDistance make_sup_distance(Rational squared);

/// sup over the domain of |f - g|, from the vertices of the pairwise cell
/// intersections. Throws std::invalid_argument for different domains.
SupDistance sup_distance(const PwaMap& f, const PwaMap& g);

struct MetricReport {
  SupDistance sup_forward;
  SupDistance sup_inverse;
  Rational var_f;
  Rational var_g;
  Rational variation_term;
  Rational d_value;  // sup_forward.upper + sup_inverse.upper + variation_term
  Rational d_lower;  // same with lower root bounds
};

/// Throws std::domain_error("outside space X") when a variation is >= M and
/// std::invalid_argument when a map is not a boundary-identity homeomorphism
/// of the unit square.
MetricReport metric_d(const PwaMap& f, const PwaMap& g, const Rational& M);
MetricReport make_metric_report(Rational sup_forward_sq, Rational sup_inverse_sq,
                                Rational var_f, Rational var_g, const Rational& M);

/// Fan triangulation of every region cell; areas preserved.
std::vector<ConvexPolygon> split_to_triangles(const Mesh& mesh, const CellSet& region);

/// post ∘ f ∘ pre on the mesh pre^-1(f.mesh). Throws std::domain_error if pre
/// or post is singular.
PwaMap conjugate(const PwaMap& f, const AffineMap2& pre, const AffineMap2& post);

}  // namespace pahomeo
