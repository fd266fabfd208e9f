#pragma once

// Regge curvature, volume and the Hilbert action H = γR + λV, with their
// splits into future and past halves under a reflection.

#include <cstdint>
#include <span>
#include <vector>

#include "regge/geometry.hpp"

namespace regge {

struct HilbertParams {
  double gamma = 1.0;
  double lambda = 1.0;
};

struct ActionBreakdown {
  double R = 0, V = 0, H = 0;
  double R_plus = 0, R_minus = 0;
  double V_plus = 0, V_minus = 0;
  double H_plus = 0, H_minus = 0;
};

/// Hinge and wedge tables for evaluating curvature and volume over a set of
/// top simplexes. A hinge is an (n-2)-simplex carrying a constant term
/// (1 in the interior, ½ on the boundary) minus the dihedral angles of its
/// wedges; it is weighted by its (n-2)-volume.
class CurvatureTerms {
 public:
  CurvatureTerms() = default;

  /// All of K.
  static CurvatureTerms whole(const MetricLayout& layout);

  /// The tops and hinges of a subcomplex `region` of K (a reflection half).
  /// Hinges outside K_0 keep their K constant; hinges in K_0 get half of it,
  /// so that the two halves add up to the whole term by term.
  static CurvatureTerms half(const MetricLayout& layout, const SimplicialComplex& region,
                             const SimplicialComplex& k_zero, const SimplicialComplex& boundary_of_k);

  struct Values {
    double curvature = 0;
    double volume = 0;
  };
  Values evaluate(const MetricLayout& layout, std::span<const double> z) const;

  std::size_t hinge_count() const { return hinges_.size(); }
  std::size_t top_count() const { return tops_.size(); }

 private:
  struct Wedge {
    std::uint32_t top;  // position in tops_
    std::uint8_t a, b;  // local vertices of the top opposite the hinge
  };
  struct Hinge {
    std::size_t index;  // among (n-2)-simplexes of the layout complex
    double constant;
    std::uint32_t wedge_begin, wedge_end;
  };

  static CurvatureTerms build(const MetricLayout& layout, const std::vector<std::size_t>& tops,
                              const std::vector<std::pair<std::size_t, double>>& hinges);

  int n_ = 0;
  std::vector<std::size_t> tops_;
  std::vector<Hinge> hinges_;
  std::vector<Wedge> wedges_;
};

double total_volume(const MetricLayout& layout, std::span<const double> z);
/// Deficit of an (n-2)-simplex in units of 2π.
double deficit(const MetricLayout& layout, const Simplex& sigma_n2, std::span<const double> z);
double regge_curvature(const MetricLayout& layout, std::span<const double> z);
double hilbert_action(const MetricLayout& layout, std::span<const double> z, const HilbertParams& p);

/// A complex with a verified reflection, its canonical edge ordering and
/// the layout of K_+ alone (edge positions 0..half_size()-1 of the full
/// ordering), with precomputed curvature tables.
class ReflectedGeometry {
 public:
  ReflectedGeometry(SimplicialComplex k, const Reflection& refl);

  const MetricLayout& full() const { return full_; }
  /// Layout of K_+; a vector over it is exactly z_+ = (z̃_+, z_0).
  const MetricLayout& half() const { return half_; }
  const Reflection& reflection() const { return refl_; }
  const EdgeOrdering& ordering() const { return full_.edges(); }
  std::size_t edge_count() const { return full_.edge_count(); }
  std::size_t half_size() const { return full_.edges().half_size(); }

  const CurvatureTerms& whole_terms() const { return whole_; }
  const CurvatureTerms& plus_terms() const { return plus_; }
  const CurvatureTerms& minus_terms() const { return minus_; }

  /// R_+ and V_+ as functions of z_+ alone.
  CurvatureTerms::Values half_values(std::span<const double> z_plus) const;

  /// (θz)_+, i.e. z_- read in K_+ positions.
  void mirror_half(std::span<const double> z, std::span<double> out) const;
  /// (θz)_e = z_{θ(e)}.
  std::vector<double> pullback(std::span<const double> z) const;

 private:
  Reflection refl_;
  MetricLayout full_;
  MetricLayout half_;
  CurvatureTerms whole_, plus_, minus_, half_terms_;
};

/// R, V, H and their halves. R_- and V_- are summed over K_- directly.
ActionBreakdown split_action(const ReflectedGeometry& geom, std::span<const double> z,
                             const HilbertParams& p);

/// The metric θz.
std::vector<double> theta_pullback(std::span<const double> z, const EdgeOrdering& order);

struct GradientResult {
  std::vector<double> gradient;
  std::vector<double> step_used;
  /// Components whose stencil left the metric cone even at the smallest step.
  std::vector<bool> flagged;
};

/// Central differences of R in every edge coordinate with step h = step·z_e,
/// Richardson-extrapolated from h and h/2. Steps are halved while the
/// stencil leaves the metric cone.
GradientResult grad_R(const MetricLayout& layout, std::span<const double> z, double step = 1e-3);

/// Plain central difference of R in coordinate e with absolute step h.
double central_difference_R(const MetricLayout& layout, std::span<const double> z, std::size_t e,
                            double h);

}  // namespace regge
