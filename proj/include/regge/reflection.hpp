#pragma once

// Reflections of pseudomanifolds: involutive automorphisms splitting K into
// a future half K_+, a past half K_- and the common present K_0.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regge/complex.hpp"

namespace regge {

/// Vertex permutation. Vertices missing from the map are fixed.
class Automorphism {
 public:
  Automorphism() = default;
  explicit Automorphism(std::map<Vertex, Vertex> mapping);

  Vertex operator()(Vertex v) const;
  Simplex operator()(const Simplex& s) const;
  SimplicialComplex apply(const SimplicialComplex& k) const;

  /// Non-identity entries only.
  const std::map<Vertex, Vertex>& mapping() const { return mapping_; }
  bool is_identity() const { return mapping_.empty(); }

  friend bool operator==(const Automorphism&, const Automorphism&) = default;

 private:
  std::map<Vertex, Vertex> mapping_;
};

/// Which requirement of a reflection failed. Bullets 1-5 refer to the five
/// conditions on (K_+, K_-, K_0); the others are the automorphism itself.
enum class ReflectionCheck {
  not_pseudomanifold,
  not_automorphism,
  not_involution,
  identity,
  k_plus_not_subcomplex,
  halves_not_pseudomanifolds,  // bullet 1
  halves_not_exchanged,        // bullet 2
  k_zero_invalid,              // bullet 3
  not_fixed_on_k_zero,         // bullet 4
  gluing_mismatch,             // bullet 5
};

struct ReflectionFailure {
  ReflectionCheck check;
  int bullet = 0;  // 0 when the failure is not one of the five bullets
  std::string detail;
};

std::string to_string(ReflectionCheck check);

struct ReflectionReport;

class Reflection {
 public:
  const Automorphism& theta() const { return theta_; }
  const SimplicialComplex& k_plus() const { return k_plus_; }
  const SimplicialComplex& k_minus() const { return k_minus_; }
  const SimplicialComplex& k_zero() const { return k_zero_; }

 private:
  friend struct ReflectionReport;
  friend ReflectionReport verify_reflection(const SimplicialComplex&, const Automorphism&,
                                            const SimplicialComplex&);
  Reflection() = default;

  Automorphism theta_;
  SimplicialComplex k_plus_, k_minus_, k_zero_;
};

struct ReflectionReport {
  std::optional<Reflection> reflection;
  std::vector<ReflectionFailure> failures;
  /// Informational findings that do not invalidate the reflection.
  std::vector<std::string> notes;

  bool ok() const { return failures.empty() && reflection.has_value(); }
  bool failed(ReflectionCheck check) const;
  /// Throws ComplexError listing the failures when !ok().
  const Reflection& value() const;
};

ReflectionReport verify_reflection(const SimplicialComplex& k, const Automorphism& theta,
                                   const SimplicialComplex& k_plus);

struct DoubledComplex {
  SimplicialComplex complex;
  Automorphism theta;
  SimplicialComplex k_plus;
  /// Original vertex -> vertex id of its copy (identified vertices map to themselves).
  std::map<Vertex, Vertex> copy_of;
  Vertex offset = 0;
  ReflectionReport verification;
};

/// Glues K' to a fresh copy of itself along K'_0 ⊆ ∂K'. Copy ids are the
/// original ids shifted above the largest original id.
/// Throws ComplexError if K'_0 is empty, not in the boundary, not an induced
/// subcomplex, or K' is not a pseudomanifold with boundary.
DoubledComplex double_complex(const SimplicialComplex& k_prime,
                              const SimplicialComplex& k_prime_zero);

/// Bijection between edges and positions 0..E-1. With a reflection the
/// positions are grouped as (K_+ \ K_0, K_0, K_- \ K_0).
class EdgeOrdering {
 public:
  EdgeOrdering() = default;
  static EdgeOrdering lexicographic(const SimplicialComplex& k);
  /// The given edges at positions 0..size-1, without a reflection.
  static EdgeOrdering from_edges(std::vector<Simplex> edges);

  std::size_t size() const { return edges_.size(); }
  const Simplex& edge(std::size_t pos) const { return edges_[pos]; }
  const std::vector<Simplex>& edges() const { return edges_; }
  std::optional<std::size_t> position(const Simplex& edge) const;
  std::optional<std::size_t> position(Vertex a, Vertex b) const;

  bool has_reflection() const { return reflected_; }
  std::size_t plus_count() const { return plus_; }
  std::size_t zero_count() const { return zero_; }
  std::size_t minus_count() const { return minus_; }
  /// Number of edges of K_+ (= of K_-): the leading plus and zero blocks.
  std::size_t half_size() const { return plus_ + zero_; }
  std::size_t zero_begin() const { return plus_; }
  std::size_t minus_begin() const { return plus_ + zero_; }

  /// Position of θ(edge at pos); the identity without a reflection.
  std::size_t theta(std::size_t pos) const { return theta_[pos]; }
  const std::vector<std::size_t>& theta_permutation() const { return theta_; }

 private:
  friend EdgeOrdering canonical_edge_order(const SimplicialComplex&, const Reflection&);

  std::vector<Simplex> edges_;
  std::unordered_map<Simplex, std::size_t, SimplexHash> index_;
  std::vector<std::size_t> theta_;
  std::size_t plus_ = 0, zero_ = 0, minus_ = 0;
  bool reflected_ = false;
};

/// Edges of K_+ \ K_0 and of K_0 in lexicographic order, then the K_- \ K_0
/// block in the order induced from the first block by θ.
EdgeOrdering canonical_edge_order(const SimplicialComplex& k, const Reflection& refl);

}  // namespace regge
