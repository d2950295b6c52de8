#pragma once

// Property suites over the pool of boundary-identity maps. Each suite
// returns how many checks ran and a description of the first failure.

#include "support.hpp"

#include "pahomeo/io.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace testing_support {

struct SuiteResult {
  long checks = 0;
  long failures = 0;
  std::string first_failure;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures++ == 0) first_failure = what;
  }
  bool ok() const { return failures == 0; }
};

class MapPool {
 public:
  MapPool() : entries_(map_pool()) {
    for (const auto& e : entries_) inverses_.push_back(pahomeo::inverse(e.map));
  }
  const std::vector<PoolEntry>& entries() const { return entries_; }
  const pahomeo::PwaMap& inverse_of(std::size_t i) const { return inverses_[i]; }

 private:
  std::vector<PoolEntry> entries_;
  std::vector<pahomeo::PwaMap> inverses_;
};

// f^-1(f(p)) == p and f(f^-1(q)) == q on random points.
inline SuiteResult inverse_round_trip(const MapPool& pool, int points, std::uint64_t seed) {
  SuiteResult r;
  Rng rng(seed);
  for (std::size_t i = 0; i < pool.entries().size(); ++i) {
    const auto& e = pool.entries()[i];
    const FastEval f(e.map), g(pool.inverse_of(i));
    for (int s = 0; s < points; ++s) {
      const Point2 p = rng.point_in_unit_square();
      r.expect(g(f(p)) == p, e.name + ": f^-1(f(p)) != p");
      const Point2 q = rng.point_in_unit_square();
      r.expect(f(g(q)) == q, e.name + ": f(f^-1(q)) != q");
    }
  }
  return r;
}

// The overlay sup is at least every sampled deviation, forward and inverse.
inline SuiteResult sup_dominates_samples(const MapPool& pool, int points, std::uint64_t seed) {
  SuiteResult r;
  Rng rng(seed);
  const auto& es = pool.entries();
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (std::size_t j = i + 1; j < es.size(); ++j) {
      for (int direction = 0; direction < 2; ++direction) {
        const pahomeo::PwaMap& f = direction == 0 ? es[i].map : pool.inverse_of(i);
        const pahomeo::PwaMap& g = direction == 0 ? es[j].map : pool.inverse_of(j);
        const Rational sup = pahomeo::sup_distance(f, g).squared;
        const FastEval fe(f), ge(g);
        Rational sampled = 0;
        for (int s = 0; s < points; ++s) {
          const Point2 p = rng.point_in_unit_square();
          sampled = std::max(sampled, pahomeo::squared_norm(fe(p) - ge(p)));
        }
        r.expect(sampled <= sup, es[i].name + " vs " + es[j].name + ": sampled deviation above the sup");
      }
    }
  }
  return r;
}

// Var is a property of the map, not of the mesh it is written on.
inline SuiteResult energy_invariance(const MapPool& pool) {
  SuiteResult r;
  for (const auto& e : pool.entries()) {
    const Rational var = pahomeo::energy(e.map);
    r.expect(var == energy_oracle(e.map), e.name + ": energy differs from the cell loop");
    const pahomeo::PwaMap tri = pahomeo::triangulate_affine_mesh(e.map);
    r.expect(pahomeo::energy(tri) == var, e.name + ": triangulation changed the energy");
    r.expect(pahomeo::energy(pahomeo::red_refine(tri)) == var, e.name + ": red refinement changed the energy");
    for (const auto& other : pool.entries()) {
      const pahomeo::PwaMap over = restrict_to(e.map, pahomeo::overlay(e.map.mesh, other.map.mesh));
      r.expect(pahomeo::energy(over) == var, e.name + " over " + other.name + ": overlay changed the energy");
    }
  }
  return r;
}

// Serialize, parse, serialize again: same bytes, same map.
inline SuiteResult json_round_trip(const MapPool& pool) {
  SuiteResult r;
  for (const auto& e : pool.entries()) {
    const std::string text = pahomeo::to_json(e.map).dump(2);
    const pahomeo::PwaMap back = pahomeo::pwa_from_json(pahomeo::Json::parse(text));
    r.expect(pahomeo::to_json(back).dump(2) == text, e.name + ": JSON text changed on round trip");
    r.expect(back.maps == e.map.maps && back.mesh.vertices == e.map.mesh.vertices &&
                 back.mesh.cells == e.map.mesh.cells && back.mesh.domain == e.map.mesh.domain,
             e.name + ": map changed on round trip");
  }
  return r;
}

// d(f, f) = 0, d(f, g) = d(g, f), and d(f, h) <= d(f, g) + d(g, h) with the
// certified lower bound on the left and the upper bound on the right.
inline SuiteResult metric_axioms(const MapPool& pool, const Rational& M) {
  SuiteResult r;
  const auto& es = pool.entries();
  const std::size_t n = es.size();
  std::map<std::pair<std::size_t, std::size_t>, pahomeo::MetricReport> d;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d.emplace(std::pair{i, j}, pahomeo::metric_d(es[i].map, es[j].map, M));
  }
  for (std::size_t i = 0; i < n; ++i) {
    r.expect(d.at({i, i}).d_value == 0, es[i].name + ": d(f, f) != 0");
    for (std::size_t j = 0; j < n; ++j) {
      const auto& a = d.at({i, j});
      const auto& b = d.at({j, i});
      r.expect(a.d_value == b.d_value && a.d_lower == b.d_lower, es[i].name + ", " + es[j].name + ": not symmetric");
      if (i != j) r.expect(a.d_lower > 0, es[i].name + ", " + es[j].name + ": distinct maps at distance 0");
      for (std::size_t k = 0; k < n; ++k) {
        r.expect(d.at({i, k}).d_lower <= a.d_value + d.at({j, k}).d_value,
                 es[i].name + ", " + es[j].name + ", " + es[k].name + ": triangle inequality fails");
      }
    }
  }
  return r;
}

}  // namespace testing_support
