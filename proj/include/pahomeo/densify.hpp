#pragma once

// The density step: replace a boundary-identity piecewise-affine
// homeomorphism g by a nearby map that sends a set of measure < 1/n onto a
// set of measure > 1 - 1/n.
//
// Pipeline: triangulate g, red-refine until every triangle and its image is
// small, pick m, pack each triangle with dyadic squares, and put a placed
// block on every square. A block mesh has 10 k^4 cells, so the result keeps
// the blocks in template form (one strip per distinct linear part) instead of
// expanding them; materialize() expands small instances.

#include "pahomeo/block.hpp"

#include <map>

namespace pahomeo {

struct DensifySpec {
  PwaMap g;
  int n = 2;
  Rational epsilon;
  Rational M;
};

/// Same map over a triangulation: cells with three corners are kept, other
/// strictly convex cells are fan-split from their first vertex, and cells
/// carrying extra edge vertices are split from their centroid.
PwaMap triangulate_affine_mesh(const PwaMap& g);

/// Global red refinement until every cell T has diam(T) < eps/8 and
/// diam(g(T)) < eps/8 (compared on squares). Requires a triangulation.
PwaMap refine_for_diameter(const PwaMap& g, const Rational& epsilon);

/// Number of refinement rounds refine_for_diameter would perform.
int refinement_rounds(const PwaMap& g, const Rational& epsilon);

/// Smallest m > 2n with C Var(g) < M and |1/(M - target) - 1/(M - C Var(g))| < eps/2
/// at both C = 1 - 1/m and C = 1 + 1/m. Throws std::domain_error
/// ("variation too close to M") when no m below 10^6 works.
int choose_m(const PwaMap& g, const Rational& f_var_target, const Rational& epsilon,
             const Rational& M, int n);

/// Columns [first, last] of the grid squares of side 2^-q in row `row` that
/// lie in the closed triangle.
struct SquareRun {
  std::int64_t row;
  std::int64_t first;
  std::int64_t last;
};

struct SquarePacking {
  int q = 0;
  Rational side;
  std::int64_t count = 0;
  std::vector<SquareRun> runs;

  Rational covered_area() const { return Rational(count) * side * side; }
  std::vector<AxisSquare> squares() const;
};

/// Column range of level-q grid squares in `row` inside the triangle, or
/// nothing. Exact half-plane bounds.
std::optional<std::pair<std::int64_t, std::int64_t>> packed_columns(const ConvexPolygon& triangle,
                                                                     const Rational& side,
                                                                     std::int64_t row);

/// First dyadic level whose contained grid squares cover (1 - 1/m)|T|.
SquarePacking pack_squares(const ConvexPolygon& triangle, int m, bool keep_runs = true);

/// The squares packed into one base triangle, all carrying the same block.
struct Patch {
  CellIndex cell = 0;
  SquarePacking packing;  // runs not stored
  std::shared_ptr<const BlockTemplate> block;
};

class PatchedMap {
 public:
  /// base must be a triangulated valid homeomorphism of the unit square.
  PatchedMap(PwaMap base, std::vector<Patch> patches);

  const PwaMap& base() const { return *base_; }
  const std::vector<Patch>& patches() const { return patches_; }
  std::int64_t square_count() const;

  Point2 evaluate(const Point2& p) const;
  Point2 evaluate_inverse(const Point2& w) const;

  /// Var(f) split into the part of g outside the packed squares and the
  /// transplanted block energies.
  Rational energy_outside() const;
  Rational energy_blocks() const;
  Rational energy() const { return energy_outside() + energy_blocks(); }

  /// |F| and |f(F)| for F = the witness cells of every placed block.
  Rational witness_area() const;
  Rational witness_image_area() const;

  /// sup |f - g|^2 and sup |f^-1 - g^-1|^2.
  Rational sup_forward_sq() const;
  Rational sup_inverse_sq() const;

  /// Base homeomorphism with identity boundary, every block template valid,
  /// squares inside their triangles and each placed block equal to g on the
  /// square boundary.
  ValidationReport validate() const;

  /// Explicit conforming mesh. Only for small block parameters.
  std::pair<PwaMap, CellSet> materialize() const;

 private:
  const Patch* patch_of(CellIndex cell) const;
  std::optional<AxisSquare> square_at(const Patch& patch, const Point2& p) const;
  PlacedBlock placed(const Patch& patch, const AxisSquare& square) const;

  // Held by pointer so the locators stay valid when the map is moved.
  std::shared_ptr<const PwaMap> base_;
  std::shared_ptr<const PwaMap> base_inverse_;
  std::vector<Patch> patches_;
  std::vector<std::int32_t> patch_index_;  // per base cell, -1 if none
  std::shared_ptr<const PointLocator> locate_;
  std::shared_ptr<const PointLocator> locate_inverse_;
};

/// Packs every base triangle at level m and places the block found by
/// propphin for its linear part (one search per distinct linear part).
PatchedMap build_patched_map(PwaMap base, int m);

struct Certificate {
  int n = 0;
  Rational area_F;
  Rational image_area_F;
  Rational var_f;
  Rational var_g;
  Rational sup_forward_sq;
  Rational sup_inverse_sq;
  Rational variation_term;
  bool in_A_n = false;
  Rational d_bound;  // certified upper bound of d(g, f)
  // only set by densify
  Rational epsilon;
  bool variation_within = false;   // |Var f - Var g| <= Var g / m
  bool forward_within = false;     // sup |f - g| < eps/4
  bool inverse_within = false;     // sup |f^-1 - g^-1| < eps/4
  bool variation_term_within = false;  // < eps/2
  bool d_certified = false;        // d_bound < eps
};

/// Exact |E| and |f(E)| against 1/n and 1 - 1/n.
Certificate certify_An(const PwaMap& f, const CellSet& E, int n);
/// E exported as the pairwise disjoint open triangles it is made of.
std::vector<ConvexPolygon> witness_triangles(const PwaMap& f, const CellSet& E);

struct DensifyResult {
  DensifySpec spec;
  int m = 0;
  int rounds = 0;
  PatchedMap f;
  Certificate certificate;
};

/// Throws std::invalid_argument for an invalid spec (g not a boundary
/// identity homeomorphism of the unit square, n < 2, eps <= 0, M <= 2),
/// std::domain_error when Var(g) >= M, and std::logic_error
/// ("pipeline postcondition violated") when the certificate fails.
DensifyResult densify(const DensifySpec& spec);

/// Recomputes the certificate of a patched map against g.
Certificate certify_patched(const PatchedMap& f, const PwaMap& g, const DensifySpec& spec, int m);

struct NestedRow {
  std::int64_t n;
  int m;
  Rational area;
  Rational image_area;
  bool holds;
};

/// densify at n = 2^k for k = 1..depth, each run starting from g.
/// Throws std::invalid_argument for depth outside [0, 8].
std::vector<NestedRow> nested_demo(const PwaMap& g, const Rational& M, int depth,
                                   const Rational& epsilon = Rational(1, 2));

/// Boundary-identity map on the 8-triangle star of the unit square
/// (corners, edge midpoints, center) sending the center to `center_image`.
PwaMap star_homeomorphism(const Point2& center_image);

/// Identity on the unit square split along the diagonal into two triangles.
PwaMap identity_two_triangles();

Json certificate_json(const Certificate& c);
/// {"f": {"base", "blocks", "patches"}, "F": descriptor, "m", "spec", "certificate"}
Json densify_json(const DensifyResult& r);
/// Rebuilds the patched map and recomputes the certificate. Throws
/// std::invalid_argument on malformed input.
DensifyResult densify_from_json(const Json& j);

}  // namespace pahomeo
