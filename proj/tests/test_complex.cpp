#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "regge/error.hpp"
#include "regge/reflection.hpp"

using namespace regge;

namespace {

SimplicialComplex example42() { return build_complex({{0, 1, 2, 3}, {1, 2, 3, 4}}); }

SimplicialComplex boundary_of_4_simplex() {
  return build_complex({{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 3, 4}, {0, 2, 3, 4}, {1, 2, 3, 4}});
}

Automorphism swap(Vertex a, Vertex b) { return Automorphism({{a, b}, {b, a}}); }

// Brute-force face closure check.
bool face_closed(const SimplicialComplex& k) {
  for (int d = 1; d <= k.dimension(); ++d)
    for (const auto& s : k.simplices(d))
      for (std::size_t i = 0; i < s.size(); ++i)
        if (!k.contains(s.without(i))) return false;
  return true;
}

// Facets of the top simplexes with exactly one coface, counted directly.
std::size_t free_facets(const SimplicialComplex& k) {
  const int n = k.dimension();
  std::size_t count = 0;
  for (const auto& f : k.simplices(n - 1)) {
    std::size_t c = 0;
    for (const auto& t : k.simplices(n)) c += f.is_face_of(t);
    count += c == 1;
  }
  return count;
}

/// A stacked n-ball: start with one n-simplex, then repeatedly cone a new
/// vertex over a random free facet.
SimplicialComplex stacked_ball(int n, int extra, std::mt19937_64& rng) {
  std::vector<std::vector<Vertex>> tops;
  std::vector<Vertex> first(n + 1);
  for (int i = 0; i <= n; ++i) first[i] = i;
  tops.push_back(first);
  Vertex next = n + 1;
  for (int s = 0; s < extra; ++s) {
    const auto k = build_complex(tops);
    const auto bd = boundary_complex(k);
    const auto facets = bd.simplices(n - 1);
    std::uniform_int_distribution<std::size_t> pick(0, facets.size() - 1);
    const Simplex& f = facets[pick(rng)];
    std::vector<Vertex> t(f.vertices().begin(), f.vertices().end());
    t.push_back(next++);
    tops.push_back(t);
  }
  return build_complex(tops);
}

}  // namespace

TEST_CASE("simplex canonical form") {
  const Simplex s{3, 1, 2};
  CHECK(s.to_string() == "{1,2,3}");
  CHECK(s.dimension() == 2);
  CHECK_THROWS_AS(Simplex({1, 1}), ComplexError);
  CHECK_THROWS_AS(Simplex({-1, 2}), ComplexError);
  CHECK_THROWS_AS(Simplex(std::vector<Vertex>{}), ComplexError);
}

TEST_CASE("build_complex face counts") {
  const auto tri = build_complex({{0, 1, 2}});
  CHECK(tri.count(2) == 1);
  CHECK(tri.count(1) == 3);
  CHECK(tri.count(0) == 3);

  const auto s4 = boundary_of_4_simplex();
  CHECK(s4.count(3) == 5);
  CHECK(s4.count(2) == 10);
  CHECK(s4.count(1) == 10);
  CHECK(s4.count(0) == 5);

  const auto k = example42();
  CHECK(k.dimension() == 3);
  CHECK(k.count(3) == 2);
  CHECK(k.contains(Simplex{1, 2, 3}));
  CHECK(k.count(1) == 9);
  CHECK(face_closed(k));
  CHECK(face_closed(s4));

  CHECK_THROWS_AS(build_complex({}), ComplexError);
  CHECK_THROWS_AS(build_complex({{0, 1}, {}}), ComplexError);
  CHECK_THROWS_AS(build_complex({{0, 1, 1}}), ComplexError);
}

TEST_CASE("boundary_complex") {
  CHECK(boundary_complex(boundary_of_4_simplex()).empty());

  const auto tet = build_complex({{0, 1, 2, 3}});
  const auto bt = boundary_complex(tet);
  CHECK(bt.count(2) == 4);
  CHECK(bt.count(1) == 6);

  const auto b42 = boundary_complex(example42());
  CHECK(b42.count(2) == 6);
  CHECK(!b42.contains(Simplex{1, 2, 3}));
  CHECK(b42.count(2) == free_facets(example42()));
}

TEST_CASE("pseudomanifold conditions") {
  CHECK(is_pseudomanifold(boundary_of_4_simplex()).ok());
  CHECK(is_pseudomanifold(example42()).ok());

  const auto touching = build_complex({{0, 1, 2, 3}, {3, 4, 5, 6}});
  const auto r3 = is_pseudomanifold(touching);
  REQUIRE_FALSE(r3.ok());
  CHECK(std::any_of(r3.violations.begin(), r3.violations.end(), [](auto& v) { return v.condition == 3; }));

  const auto dangling = build_complex({{0, 1, 2, 3}, {3, 7}});
  const auto r1 = is_pseudomanifold(dangling);
  REQUIRE_FALSE(r1.ok());
  CHECK(std::any_of(r1.violations.begin(), r1.violations.end(), [](auto& v) { return v.condition == 1; }));

  const auto book = build_complex({{0, 1, 2}, {0, 1, 3}, {0, 1, 4}});
  const auto r2 = is_pseudomanifold(book);
  REQUIRE_FALSE(r2.ok());
  CHECK(std::any_of(r2.violations.begin(), r2.violations.end(), [](auto& v) { return v.condition == 2; }));
}

TEST_CASE("verify_reflection on the two-tetrahedron complex") {
  const auto k = example42();
  const auto rep = verify_reflection(k, swap(0, 4), build_complex({{0, 1, 2, 3}}));
  REQUIRE(rep.ok());
  const auto& r = rep.value();
  CHECK(r.k_zero() == build_complex({{1, 2, 3}}));
  CHECK(r.k_minus() == build_complex({{1, 2, 3, 4}}));
}

TEST_CASE("verify_reflection failures are itemized") {
  const auto k = example42();
  const auto kp = build_complex({{0, 1, 2, 3}});

  const auto id = verify_reflection(k, Automorphism(), kp);
  CHECK_FALSE(id.ok());
  CHECK(id.failed(ReflectionCheck::identity));

  const auto whole = verify_reflection(k, swap(0, 4), k);
  CHECK_FALSE(whole.ok());
  CHECK(whole.failed(ReflectionCheck::k_zero_invalid));

  // 3-cycle on three tetrahedra around an edge: not an involution, and the
  // halves are not exchanged.
  const auto fan = build_complex({{0, 1, 2, 3}, {0, 1, 3, 4}, {0, 1, 2, 4}});
  const auto cyc = verify_reflection(fan, Automorphism({{2, 3}, {3, 4}, {4, 2}}), kp);
  CHECK(cyc.failed(ReflectionCheck::not_involution));
  CHECK(cyc.failed(ReflectionCheck::halves_not_exchanged));
  bool bullet2 = false;
  for (const auto& f : cyc.failures) bullet2 = bullet2 || f.bullet == 2;
  CHECK(bullet2);
  CHECK_THROWS_AS(cyc.value(), ComplexError);
}

TEST_CASE("double_complex of a tetrahedron along one facet") {
  const auto tet = build_complex({{0, 1, 2, 3}});
  const auto d = double_complex(tet, build_complex({{1, 2, 3}}));
  REQUIRE(d.verification.ok());
  CHECK(d.complex.count(3) == 2);
  CHECK(d.complex.count(1) == 9);
  CHECK(d.offset == 4);
  CHECK(d.copy_of.at(0) == 4);
  CHECK(d.copy_of.at(1) == 1);
  // Relabelling 4 -> 4 gives exactly the two-tetrahedron complex.
  CHECK(d.complex == example42());
}

TEST_CASE("double_complex of an n-simplex along one facet, any n") {
  for (int n = 1; n <= 5; ++n) {
    std::vector<Vertex> top(n + 1), facet(n);
    for (int i = 0; i <= n; ++i) top[i] = i;
    for (int i = 0; i < n; ++i) facet[i] = i + 1;
    const auto d = double_complex(build_complex({top}), build_complex({facet}));
    CAPTURE(n);
    CHECK(d.verification.ok());
    CHECK(d.complex.count(n) == 2);
    const auto order = canonical_edge_order(d.complex, d.verification.value());
    CHECK(order.zero_count() == static_cast<std::size_t>(n * (n - 1) / 2));
    CHECK(order.plus_count() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("double_complex along the whole boundary of a tetrahedron is not a simplicial complex") {
  // Both copies would have the vertex set {0,1,2,3}; a simplicial complex
  // cannot hold two distinct tetrahedra on the same vertices.
  MESSAGE("closed doubling of a single simplex is rejected (not an induced K'_0)");
  const auto tet = build_complex({{0, 1, 2, 3}});
  CHECK_THROWS_AS(double_complex(tet, boundary_complex(tet)), ComplexError);
}

TEST_CASE("double_complex rejects bad K'_0") {
  const auto tet = build_complex({{0, 1, 2, 3}});
  CHECK_THROWS_AS(double_complex(tet, SimplicialComplex()), ComplexError);
  const auto k = example42();
  CHECK_THROWS_AS(double_complex(k, build_complex({{1, 2, 3}})), ComplexError);  // interior facet
  CHECK_THROWS_AS(double_complex(boundary_of_4_simplex(), build_complex({{0, 1, 2}})), ComplexError);
}

TEST_CASE("canonical edge order on the two-tetrahedron complex") {
  const auto k = example42();
  const auto r = verify_reflection(k, swap(0, 4), build_complex({{0, 1, 2, 3}})).value();
  const auto o = canonical_edge_order(k, r);
  CHECK(o.plus_count() == 3);
  CHECK(o.zero_count() == 3);
  CHECK(o.minus_count() == 3);
  CHECK(o.edge(0) == Simplex{0, 1});
  CHECK(o.edge(3) == Simplex{1, 2});
  CHECK(o.edge(6) == Simplex{1, 4});
  for (std::size_t i = 0; i < o.size(); ++i) {
    CHECK(o.theta(o.theta(i)) == i);
    CHECK(r.theta()(o.edge(i)) == o.edge(o.theta(i)));
  }
  for (std::size_t i = o.zero_begin(); i < o.half_size(); ++i) CHECK(o.theta(i) == i);
}

TEST_CASE("property: doubling stacked balls gives verified reflections") {
  std::mt19937_64 rng(20240611);
  int checked = 0, skipped = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    const auto kp = stacked_ball(n, 1 + static_cast<int>(rng() % 5), rng);
    REQUIRE(is_pseudomanifold(kp).ok());
    const auto bd = boundary_complex(kp);
    CHECK(bd.count(n - 1) == free_facets(kp));

    // Grow a connected patch of boundary facets.
    const auto facets = bd.simplices(n - 1);
    std::vector<Simplex> patch{facets[rng() % facets.size()]};
    const std::size_t target = 1 + rng() % 3;
    for (std::size_t step = 0; step < 10 && patch.size() < target; ++step) {
      const Simplex& f = facets[rng() % facets.size()];
      if (std::find(patch.begin(), patch.end(), f) != patch.end()) continue;
      bool adjacent = false;
      for (const auto& p : patch) {
        std::size_t shared = 0;
        for (Vertex v : f.vertices()) shared += p.contains(v);
        adjacent = adjacent || shared + 1 == f.size();
      }
      if (adjacent) patch.push_back(f);
    }
    const auto k0 = SimplicialComplex::closure(patch);
    if (!is_pseudomanifold(k0).ok()) {
      ++skipped;
      continue;
    }
    DoubledComplex d;
    try {
      d = double_complex(kp, k0);
    } catch (const ComplexError&) {
      ++skipped;  // patch not induced
      continue;
    }
    CAPTURE(trial);
    REQUIRE(d.verification.ok());
    ++checked;
    const auto o = canonical_edge_order(d.complex, d.verification.value());
    CHECK(o.zero_count() == k0.count(1));
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < o.size(); ++i) {
      CHECK(o.theta(o.theta(i)) == i);
      fixed += o.theta(i) == i;
    }
    CHECK(fixed == o.zero_count());
    CHECK(boundary_complex(d.complex).count(n - 1) == free_facets(d.complex));
  }
  MESSAGE("doubled " << checked << " random balls, skipped " << skipped);
  CHECK(checked >= 30);
}

TEST_CASE("edge ordering from explicit edges") {
  const auto o = EdgeOrdering::from_edges({Simplex{2, 3}, Simplex{0, 1}});
  CHECK(o.position(0, 1) == 1u);
  CHECK(o.position(3, 2) == 0u);
  CHECK_FALSE(o.position(1, 2).has_value());
  CHECK_THROWS_AS(EdgeOrdering::from_edges({Simplex{0, 1}, Simplex{0, 1}}), ComplexError);
  CHECK_THROWS_AS(EdgeOrdering::from_edges({Simplex{0, 1, 2}}), ComplexError);
}
