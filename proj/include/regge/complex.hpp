#pragma once

// Finite simplicial complexes: simplexes as sorted vertex lists, face-closed
// simplex sets, boundaries and the pseudomanifold test.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace regge {

using Vertex = std::int64_t;

/// A nonempty, strictly increasing list of non-negative vertex ids.
class Simplex {
 public:
  Simplex() = default;
  /// Sorts the ids; throws ComplexError on empty, duplicate or negative input.
  explicit Simplex(std::vector<Vertex> vertices);
  Simplex(std::initializer_list<Vertex> vertices)
      : Simplex(std::vector<Vertex>(vertices)) {}

  int dimension() const { return static_cast<int>(vertices_.size()) - 1; }
  std::size_t size() const { return vertices_.size(); }
  std::span<const Vertex> vertices() const { return vertices_; }
  Vertex operator[](std::size_t i) const { return vertices_[i]; }

  bool contains(Vertex v) const;
  bool is_face_of(const Simplex& other) const;
  /// The facet obtained by dropping the vertex at local position i.
  Simplex without(std::size_t i) const;
  /// Local position of v, if present.
  std::optional<std::size_t> local_index(Vertex v) const;

  std::string to_string() const;

  auto operator<=>(const Simplex&) const = default;

 private:
  std::vector<Vertex> vertices_;
};

struct SimplexHash {
  std::size_t operator()(const Simplex& s) const noexcept;
};

/// Face-closed set of simplexes. Simplexes of each dimension are kept in
/// lexicographic order, which is the canonical summation order everywhere.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// Downward closure of the given simplexes.
  static SimplicialComplex closure(const std::vector<Simplex>& generators);

  /// -1 for the empty complex.
  int dimension() const { return static_cast<int>(by_dim_.size()) - 1; }
  bool empty() const { return by_dim_.empty(); }

  /// Simplexes of dimension k (empty span when k is out of range).
  std::span<const Simplex> simplices(int k) const;
  std::size_t count(int k) const { return simplices(k).size(); }
  std::size_t total_count() const { return index_.size(); }

  bool contains(const Simplex& s) const { return index_.contains(s); }
  /// Position of s among the simplexes of its own dimension.
  std::optional<std::size_t> index_of(const Simplex& s) const;

  std::vector<Vertex> vertex_ids() const;
  /// Simplexes not properly contained in any other simplex, sorted.
  std::vector<Simplex> maximal_simplices() const;
  /// Indices of the k-simplexes containing s.
  std::vector<std::size_t> cofaces(const Simplex& s, int k) const;

  bool is_subcomplex_of(const SimplicialComplex& other) const;

  friend bool operator==(const SimplicialComplex& a, const SimplicialComplex& b) {
    return a.by_dim_ == b.by_dim_;
  }

 private:
  std::vector<std::vector<Simplex>> by_dim_;
  std::unordered_map<Simplex, std::size_t, SimplexHash> index_;
};

/// Builds the face closure of a list of (maximal) vertex lists.
/// Throws ComplexError on empty input, empty lists, repeated or negative ids.
SimplicialComplex build_complex(const std::vector<std::vector<Vertex>>& maximal_simplexes);

SimplicialComplex intersection(const SimplicialComplex& a, const SimplicialComplex& b);
SimplicialComplex union_of(const SimplicialComplex& a, const SimplicialComplex& b);

/// Closure of the (n-1)-simplexes lying in exactly one n-simplex.
SimplicialComplex boundary_complex(const SimplicialComplex& k);

struct PseudomanifoldViolation {
  int condition = 0;  // 0: empty complex, 1..3 as in the definition
  std::string detail;
};

struct PseudomanifoldReport {
  std::vector<PseudomanifoldViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks (1) purity, (2) at most two n-cofaces per (n-1)-simplex and
/// (3) connectivity of the facet-adjacency graph of n-simplexes.
PseudomanifoldReport is_pseudomanifold(const SimplicialComplex& k);

}  // namespace regge
