#pragma once

// Piecewise-linear geometry from squared edge lengths: Gram matrices,
// simplex volumes, dihedral angles and membership in the metric cone and
// in the cutoff region.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regge/complex.hpp"
#include "regge/reflection.hpp"

namespace regge {

inline constexpr int kMaxSimplexDim = 8;

using GramMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxSimplexDim, kMaxSimplexDim>;

/// Relative floor used for the strict inequality det A > 0 on a k-simplex
/// whose largest squared edge is `scale`.
inline constexpr double kRealizabilityEps = 1e-12;

enum class CutoffNorm { supremum, euclidean };

std::string to_string(CutoffNorm norm);
CutoffNorm parse_cutoff_norm(const std::string& text);

/// Compact cutoff region: det A(z(σ)) ≥ 1/κ for every simplex and
/// max(‖z_+‖, ‖z_-‖) ≤ κ.
struct CutoffSpec {
  double kappa = 10.0;
  CutoffNorm norm = CutoffNorm::supremum;
};

/// A complex together with an edge ordering and, per simplex, the edge
/// positions of all its vertex pairs. All metric vectors `z` passed alongside
/// a layout are indexed by `edges()`.
class MetricLayout {
 public:
  MetricLayout() = default;
  explicit MetricLayout(SimplicialComplex k);
  MetricLayout(SimplicialComplex k, EdgeOrdering order);

  const SimplicialComplex& complex() const { return complex_; }
  const EdgeOrdering& edges() const { return order_; }
  int dimension() const { return complex_.dimension(); }
  std::size_t edge_count() const { return order_.size(); }

  /// Edge positions of the pairs (i, j), i < j, of local vertices, in
  /// row-major upper-triangular order.
  std::span<const std::uint32_t> pair_positions(int k, std::size_t index) const;

  struct SimplexRef {
    int dim;
    std::size_t index;
  };
  /// Maximal simplexes of positive dimension.
  const std::vector<SimplexRef>& maximal() const { return maximal_; }

 private:
  SimplicialComplex complex_;
  EdgeOrdering order_;
  std::vector<std::vector<std::uint32_t>> pairs_;      // per dimension, flattened
  std::vector<std::size_t> pairs_per_simplex_;         // per dimension
  std::vector<SimplexRef> maximal_;
};

/// Squared length between local vertices i and j of a simplex, given its
/// pair positions. Zero on the diagonal.
double local_squared_length(std::span<const std::uint32_t> pairs, std::size_t size, std::size_t i,
                            std::size_t j, std::span<const double> z);

/// a_ij = ½(z_{0i} + z_{0j} - z_{ij}) relative to the local vertex `base`.
GramMatrix gram_from_pairs(std::span<const std::uint32_t> pairs, std::size_t size,
                           std::span<const double> z, std::size_t base = 0);

/// Gram matrix of sigma with respect to base_vertex. Throws ComplexError if
/// an edge of sigma is missing from the layout.
GramMatrix gram_matrix(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z,
                       Vertex base_vertex);

/// det A(z(σ)); independent of the base vertex. 1 for a vertex.
double gram_det(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z);
double gram_det(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z,
                Vertex base_vertex);

/// (1/k!) √det A. Throws NotRealizableError for a non-positive determinant.
double simplex_volume(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z);

/// Fast paths by (dimension, index within dimension).
double gram_det_at(const MetricLayout& layout, int k, std::size_t index, std::span<const double> z);
double volume_at(const MetricLayout& layout, int k, std::size_t index, std::span<const double> z);

double factorial(int k);

/// Every simplex of dimension 1..n has det A > ε·scale^k.
bool is_metric(const MetricLayout& layout, std::span<const double> z);
/// The simplexes failing is_metric, in canonical order.
std::vector<Simplex> metric_violations(const MetricLayout& layout, std::span<const double> z);
/// Leading principal minors along one chain of faces per maximal simplex.
bool is_metric_fast(const MetricLayout& layout, std::span<const double> z);

/// Norms of the K_+ and K_- sub-vectors.
double half_norm(std::span<const double> z, const EdgeOrdering& order, bool plus, CutoffNorm norm);

/// Membership in the cutoff region. Requires an ordering built from a
/// reflection.
bool in_cutoff(const MetricLayout& layout, std::span<const double> z, const CutoffSpec& cut);

/// Determinant conditions of the cutoff alone (no norm bound).
bool meets_cutoff_determinants(const MetricLayout& layout, std::span<const double> z, double kappa);

/// Dihedral angle at sigma_n2 inside sigma_n, in units of 2π.
double dihedral_angle(const MetricLayout& layout, const Simplex& sigma_n2, const Simplex& sigma_n,
                      std::span<const double> z);

/// Volume and all dihedral angles of one top simplex, from a single
/// Cholesky embedding. angle(a, b) is the dihedral angle at the face
/// opposite local vertices a and b.
struct TopSimplexGeometry {
  double volume = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxSimplexDim + 1, kMaxSimplexDim + 1>
      angle;
};

TopSimplexGeometry top_simplex_geometry(std::span<const std::uint32_t> pairs, std::size_t size,
                                        std::span<const double> z);

}  // namespace regge
