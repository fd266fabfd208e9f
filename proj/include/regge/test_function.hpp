#pragma once

// Complex-valued functions of the future half z_+ = (z̃_+, z_0) used as
// arguments of the reflection scalar product.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "regge/action.hpp"

namespace regge {

using Complex = std::complex<double>;

/// Componentwise products, written out so that conj(x)·conj(y) rounds to
/// exactly conj(x·y) and conj(x)·y to exactly conj(conj(y)·x).
inline Complex mul(Complex x, Complex y) {
  return {x.real() * y.real() - x.imag() * y.imag(), x.real() * y.imag() + x.imag() * y.real()};
}
inline Complex conj_mul(Complex x, Complex y) {
  return {x.real() * y.real() + x.imag() * y.imag(), x.real() * y.imag() - x.imag() * y.real()};
}
inline Complex scale(Complex x, double s) { return {x.real() * s, x.imag() * s}; }

/// A half-space point with its precomputed R_+ and V_+.
struct HalfPoint {
  std::span<const double> z;
  double curvature = 0;
  double volume = 0;
};

enum class FunctionKind {
  constant,
  coordinate_monomial,
  gaussian_radial,
  curvature_plus,
  volume_plus,
  linear_form,
  product,
};

/// z_zero: depends on the K_0 block of z_+ only.
enum class Support { z_plus, z_zero };

/// Which half a function lives on. Minus-side functions are images under Θ
/// and read (θz)_+ where plus-side functions read z_+.
enum class Side { plus, minus };

std::string to_string(FunctionKind kind);

class TestFunction {
 public:
  /// The vacuum function e_κ = 1.
  static TestFunction vacuum() { return constant(1.0); }
  static TestFunction constant(Complex c);
  /// c·z_e^p on half position e.
  static TestFunction coordinate(std::size_t edge, int power = 1, Complex c = 1.0);
  /// c·exp(-α Σ z_e²) over half positions [begin, end); end = 0 means all.
  static TestFunction gaussian(double alpha, Complex c = 1.0, std::size_t begin = 0, std::size_t end = 0);
  static TestFunction curvature(Complex c = 1.0);
  static TestFunction volume(Complex c = 1.0);
  /// c·⟨a, z_+⟩^p; missing trailing entries of a are zero.
  static TestFunction linear_form(std::vector<double> a, int power = 1, Complex c = 1.0);
  static TestFunction product(std::vector<TestFunction> factors, Complex c = 1.0);

  FunctionKind kind() const { return kind_; }
  Support support() const { return support_; }
  Side side() const { return side_; }
  Complex coefficient() const { return coefficient_; }
  int power() const { return power_; }
  /// Coefficient vector of a linear form.
  const std::vector<double>& weights() const { return weights_; }
  TestFunction with_support(Support s) const;

  Complex operator()(const HalfPoint& p) const;

  /// True when every coordinate read lies in [begin, end).
  bool reads_only(std::size_t begin, std::size_t end) const;
  bool uses_action_terms() const;

  /// Closed-form gradient in the z_+ coordinates. Throws EstimatorError for
  /// curvature and volume kinds.
  std::vector<Complex> gradient(const HalfPoint& p) const;
  bool differentiable() const;

  /// Complex conjugate of the function (coefficients conjugated).
  TestFunction conjugated() const;
  std::string describe() const;

  friend bool operator==(const TestFunction&, const TestFunction&) = default;

 private:
  friend TestFunction theta_map(const TestFunction& f);

  FunctionKind kind_ = FunctionKind::constant;
  Support support_ = Support::z_plus;
  Side side_ = Side::plus;
  Complex coefficient_ = 1.0;
  std::size_t index_ = 0, end_ = 0;
  int power_ = 1;
  double alpha_ = 0;
  std::vector<double> weights_;
  std::vector<TestFunction> factors_;
};

/// (Θf)(z_-) = conj(f((θz)_+)); flips the side. Θ∘Θ is the identity.
TestFunction theta_map(const TestFunction& f);

/// f·g as a product function.
TestFunction multiply(const TestFunction& f, const TestFunction& g);

/// Throws EstimatorError when f reads coordinates outside its declared
/// support, or outside z_+.
void validate_support(const TestFunction& f, const EdgeOrdering& order);

/// The fixed comparison corpus: e_κ, the first K_+ \ K_0 coordinate, R_+,
/// V_+, exp(-0.01‖z_+‖²) and a linear form with a unit complex coefficient.
std::vector<TestFunction> default_corpus(const ReflectedGeometry& geom);

}  // namespace regge
