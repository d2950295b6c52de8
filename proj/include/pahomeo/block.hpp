#pragma once

// The building block: a piecewise-affine homeomorphism of the unit square
// that agrees with the linear map A on the boundary and pushes almost all of
// the image area through thin horizontal strips.
//
// The square is cut into n^2 horizontal strips R_i of height 1/n^2 with
// n = k^2. Each strip holds ten cells:
//
//   R'  = [1/n, 1-1/n] x [0, 1/k^5]          (the witness cell)
//   R'' = [1/n, 1-1/n] x [1/k^5, 1/n^2]
//   T1..T4 tiling [0, 1/n] x [0, 1/n^2], and their mirrors under x -> 1-x.
//
// On R' the map is A' = [[a, (k-1)b], [c, (k-1)d]]; every other vertex is
// sent to A*v, and strip i is the translate of strip 0 by i/n^2 (b, d).

#include "pahomeo/io.hpp"
#include "pahomeo/pwa.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>

namespace pahomeo {

struct BlockSpec {
  Mat2 A;
  int k = 2;

  std::int64_t n() const { return static_cast<std::int64_t>(k) * k; }
};

/// Throws std::domain_error for det(A) <= 0 and std::invalid_argument for k < 2.
void require_valid(const BlockSpec& spec);

enum class CellRole : std::uint8_t {
  RPrime,
  RSecond,
  T1,
  T2,
  T3,
  T4,
  T1Mirror,
  T2Mirror,
  T3Mirror,
  T4Mirror,
};

const char* role_name(CellRole role);
inline bool is_t2_type(CellRole r) { return r == CellRole::T2 || r == CellRole::T2Mirror; }
inline bool is_t3_type(CellRole r) { return r == CellRole::T3 || r == CellRole::T3Mirror; }

struct Tiling {
  int k = 2;
  Mesh mesh;
  std::vector<CellRole> roles;
  std::vector<std::uint32_t> strips;
};

/// Whole unit square, 10 n^2 cells. Throws std::invalid_argument for k < 2.
Tiling build_tiling(int k);

/// Only the bottom strip R_0 = [0,1] x [0, 1/n^2].
Tiling build_strip_tiling(int k);

/// The gradient the construction prescribes for a cell of the given role.
Mat2 prescribed_gradient(const BlockSpec& spec, CellRole role);

struct BlockReport {
  Rational energy_phi;
  Rational energy_psi;
  Rational energy_bound;  // (1 + 2/k) energy_psi
  bool bound_holds = false;

  Rational eq1_lhs, eq1_rhs;  // energy on all R' copies vs the closed form
  bool eq1_holds = false;
  Rational eq2_lhs, eq2_rhs;  // same for R''
  bool eq2_holds = false;
  Rational eq3_phi, eq3_psi;  // energy of phi and of A on R' and R'' copies
  bool eq3_holds = false;     // eq3_phi == eq3_psi == (1 - 2/n)|A|_1

  Rational eq4_max_ratio;  // max over T2-type cells of |grad|_1 / |A|_1
  bool eq4_holds = false;  // ratio <= k
  Rational eq5_max_ratio;  // max over T3-type cells
  bool eq5_holds = false;  // ratio <= 2

  Rational area_F;
  Rational image_area_F;
  bool measures_hold = false;  // closed forms and area_F < 1/k
  bool printed_eqF_constant_holds = false;  // informational only

  Rational energy_on_F;
  Rational concentration_threshold;  // (1/2 - 1/k) |A|_1
  bool concentration_holds = false;

  bool gradients_match = false;
  bool homeomorphism_ok = false;
  bool boundary_matches_psi = false;

  /// True when every asserted identity holds (concentration and the printed
  /// constant are informational).
  bool all_identities_hold() const;
};

struct BlockResult {
  BlockSpec spec;
  PwaMap phi;
  CellSet F;
  std::vector<CellRole> roles;
  BlockReport report;
};

class BlockCheckError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Builds the map on the full tiling and fills the report.
BlockResult build_block(const BlockSpec& spec);

/// All checks recomputed from result.phi.
BlockReport compute_block_report(const BlockSpec& spec, const PwaMap& phi,
                                 const std::vector<CellRole>& roles, const CellSet& F);

/// compute_block_report, throwing BlockCheckError naming the first failed
/// identity.
BlockReport verify_block(const BlockResult& result);

Json report_json(const BlockReport& r);
Json block_json(const BlockResult& result);
/// Rebuilds a BlockResult from stored JSON (phi and F are taken from the
/// file; the report is recomputed). Throws std::invalid_argument when the
/// file does not describe a block.
BlockResult block_from_json(const Json& j);

/// One strip of the block plus the rule that stacks n^2 translated copies.
/// Everything about the full block is computed from this strip exactly.
class BlockTemplate {
 public:
  explicit BlockTemplate(BlockSpec spec);

  const BlockSpec& spec() const { return spec_; }
  const PwaMap& strip() const { return strip_; }
  const std::vector<CellRole>& roles() const { return roles_; }
  const Rational& strip_height() const { return height_; }
  std::int64_t strip_count() const { return spec_.n() * spec_.n(); }

  Rational energy() const;
  Rational witness_area() const;
  Rational witness_image_area() const;
  Rational witness_energy() const;

  /// u in the closed unit square.
  Point2 evaluate(const Point2& u) const;
  /// w in A(unit square).
  Point2 evaluate_inverse(const Point2& w) const;

  /// sup |phi - A|^2 and sup |phi^-1 - A^-1|^2 over the whole block.
  const Rational& deviation_sq() const { return deviation_sq_; }
  const Rational& inverse_deviation_sq() const { return inverse_deviation_sq_; }

  /// Strip homeomorphism onto A(R_0) with boundary values A*v.
  ValidationReport validate() const;

  /// The block report summed strip by strip; agrees exactly with
  /// compute_block_report on the materialized block.
  BlockReport report() const;

  BlockResult materialize() const { return build_block(spec_); }

 private:
  std::int64_t strip_of(const Rational& y) const;

  BlockSpec spec_;
  Rational height_;
  PwaMap strip_;
  PwaMap strip_inverse_;
  std::vector<CellRole> roles_;
  AffineMap2 psi_inverse_;
  Rational deviation_sq_;
  Rational inverse_deviation_sq_;
  ValidationReport validation_;
};

struct ConcentrationResult {
  bool holds = false;
  bool switched = false;
  Rational energy_on_F;
  Rational threshold;
  Rational deficit;  // threshold - energy_on_F when the inequality fails, else 0
};

/// Var(phi, F) > (1/2 - 1/k) Var(A, Q). When the first column dominates,
/// the block is built for the coordinate-swapped matrix and conjugated back.
ConcentrationResult check_concentration(const BlockSpec& spec);

struct AxisSquare {
  Point2 origin;
  Rational side;

  ConvexPolygon polygon() const {
    return ConvexPolygon::rectangle(origin.x, origin.y, origin.x + side, origin.y + side);
  }
};

/// A block transplanted onto an axis-parallel square: p -> phi(o) + s * block((p - o)/s).
struct PlacedBlock {
  std::shared_ptr<const BlockTemplate> block;
  AxisSquare square;
  Point2 image_origin;

  Point2 evaluate(const Point2& p) const;
  Point2 evaluate_inverse(const Point2& w) const;
  AffineMap2 pre() const;   // square -> unit square
  AffineMap2 post() const;  // block image -> target
};

struct PropphinResult {
  PlacedBlock placed;
  AffineMap2 phi;
  int n = 0;
  int k = 0;
  Rational var_phi;
  Rational var_block;
  Rational area_ratio;
  Rational image_ratio;
  bool item1 = false;
  bool item2 = false;
  bool item3 = false;

  bool ok() const { return item1 && item2 && item3; }
  /// Explicit map on the square together with its witness cells. Size is
  /// 10 k^4 cells, so only sensible for small k.
  std::pair<PwaMap, CellSet> materialize() const;
};

/// Smallest k >= 2 for which the block for phi's linear part, placed on the
/// square, satisfies the three approximation items at level n. Throws
/// std::runtime_error("parameter search failed") past k = 4n + 16 and
/// std::domain_error for det <= 0.
PropphinResult propphin(const AffineMap2& phi, const AxisSquare& square, int n);

/// Places a given block on the square and evaluates the three items.
PropphinResult place_block(std::shared_ptr<const BlockTemplate> block, const AffineMap2& phi,
                           const AxisSquare& square, int n);

}  // namespace pahomeo
