#pragma once

// Monte Carlo estimators over samples of C_κ: partition function,
// expectations, thermodynamic identities, the reflection scalar product and
// its Gram matrix, time-zero products, time reversal and field-operator
// quadratic forms.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "regge/sampling.hpp"
#include "regge/test_function.hpp"

namespace regge {

struct MCEstimate {
  Complex value = 0.0;
  double std_error = 0;
  std::size_t n_samples = 0;
};

inline constexpr std::size_t kDefaultJackknifeBlocks = 32;

/// Block sums of a ratio Σ num / Σ den with a jackknife error over blocks.
/// Samples are assigned to blocks by index, and sums run in block order.
class RatioAccumulator {
 public:
  RatioAccumulator(std::size_t n_samples, std::size_t blocks);
  void add(std::size_t sample, Complex num, double den);
  MCEstimate result() const;
  Complex numerator() const;
  double denominator() const;

 private:
  std::size_t n_, blocks_;
  std::vector<Complex> num_;
  std::vector<double> den_;
};

/// Samples prepared for one coupling. For each point z it holds z_+, the
/// mirrored half (θz)_+, R_+ and V_+ of both, and the weight
/// exp(-(H_+(z_+) + H_+((θz)_+) - shift)). Because H_-(z) = H_+((θz)_+),
/// the weight is exp(-H) up to the shift and is bit-identical at z and θz.
/// In paired mode every estimator evaluates each draw at z and at θz.
class Ensemble {
 public:
  Ensemble(const ReflectedGeometry& geom, const SampleSet& samples, const HilbertParams& p,
           bool paired = true, std::size_t blocks = kDefaultJackknifeBlocks);

  const ReflectedGeometry& geometry() const { return *geom_; }
  const SampleSet& samples() const { return *samples_; }
  const HilbertParams& params() const { return params_; }
  bool paired() const { return paired_; }
  std::size_t blocks() const { return blocks_; }
  std::size_t size() const { return weight_.size(); }

  HalfPoint forward(std::size_t i) const;
  HalfPoint mirror(std::size_t i) const;
  double weight(std::size_t i) const { return weight_[i]; }
  /// Subtracted from every H before exponentiating (the smallest H).
  double log_shift() const { return shift_; }
  /// R(z) and V(z) as sums of their halves.
  double curvature(std::size_t i) const { return r_[2 * i] + r_[2 * i + 1]; }
  double volume(std::size_t i) const { return v_[2 * i] + v_[2 * i + 1]; }

  /// Σ_i w_i [t(z_+, (θz)_+) + t((θz)_+, z_+)] / Σ_i w_i [1 + 1] in paired
  /// mode; the first term alone otherwise. The arguments of t are the point's
  /// own half and its mirror half.
  MCEstimate average(const std::function<Complex(const HalfPoint& own, const HalfPoint& mirrored)>& t) const;

 private:
  const ReflectedGeometry* geom_;
  const SampleSet* samples_;
  HilbertParams params_;
  bool paired_;
  std::size_t blocks_;
  std::vector<double> mirror_;  // row-major (θz)_+
  std::vector<double> r_, v_;   // interleaved: own half, mirror half
  std::vector<double> weight_;
  double shift_ = 0;
};

/// Z = box_volume · Σ exp(-H) / attempts with a delta-method error.
/// Refuses Markov-chain samples.
MCEstimate estimate_partition(const Ensemble& ens);
/// ln Z and its error.
std::pair<double, double> log_partition(const Ensemble& ens);

enum class Observable { one, curvature, volume };

/// Self-normalized Σ obs·w / Σ w with a jackknife error.
MCEstimate estimate_expectation(const Ensemble& ens, Observable obs);
/// A test function of z: plus-side functions read z_+, minus-side ones (θz)_+.
MCEstimate estimate_expectation(const Ensemble& ens, const TestFunction& f);

struct ThermoLine {
  std::string name;
  double expectation = 0, expectation_error = 0;
  /// -(ln Z(c+δ) - ln Z(c-δ)) / 2δ for the coupling c.
  double derivative = 0;
  double difference = 0, difference_error = 0;
  double tolerance = 0;
  bool pass = false;
  /// Jackknife variance of the finite difference with common samples, and
  /// of the same difference built from independent halves (rescaled to the
  /// full sample size).
  double variance_common = 0, variance_independent = 0;
};

struct ThermoReport {
  double delta = 0;
  double effective_sample_size = 0;
  ThermoLine curvature, volume;
  bool pass() const { return curvature.pass && volume.pass; }
};

/// ⟨R⟩ = -∂ ln Z/∂γ and ⟨V⟩ = -∂ ln Z/∂λ by central differences on the
/// same samples. Pass iff |difference| ≤ max(3σ, 2% of |expectation|).
/// Throws EstimatorError when the effective sample size is below 10.
ThermoReport check_thermo_identity(const Ensemble& ens, double delta);
/// The same check on explicit per-sample R and V values with H = γR + λV.
ThermoReport thermo_identity_from_terms(std::span<const double> r, std::span<const double> v,
                                        const HilbertParams& p, double delta,
                                        std::size_t blocks = kDefaultJackknifeBlocks);

/// Z⁻¹ Σ conj(g1(θz)) g2(z) e^{-H} for two functions on the same side.
MCEstimate reflected_inner(const TestFunction& g1, const TestFunction& g2, const Ensemble& ens);
/// ⟨f1, f2⟩_∨ for functions on z_+.
MCEstimate rp_inner(const TestFunction& f1, const TestFunction& f2, const Ensemble& ens);

enum class GramEstimator { naive, naive_paired, factorized };
enum class Verdict { psd_within_tolerance, violation };
std::string to_string(GramEstimator e);
std::string to_string(Verdict v);

struct FactorizedDiagnostics {
  std::size_t n_z0 = 0, m_inner = 0;
  std::size_t infeasible_slices = 0;  // z_0 violating the K_0 constraints
  std::size_t breached_slices = 0;    // conditional acceptance below the floor
  std::uint64_t inner_attempts = 0, inner_accepted = 0;
  /// Absolute partition function from the vacuum entry.
  MCEstimate partition;
  /// Estimated O(1/m_inner) upward bias of each diagonal entry.
  std::vector<double> diagonal_bias;
};

struct RPReport {
  GramEstimator estimator = GramEstimator::naive_paired;
  std::vector<std::string> functions;
  Eigen::MatrixXcd gram;
  Eigen::MatrixXd entry_stderr;
  std::vector<double> eigenvalues;  // ascending
  double min_eigenvalue = 0;
  double spectral_norm = 0;
  /// The verdict threshold: min eigenvalue must be ≥ -tolerance.
  double tolerance = 0;
  Verdict verdict = Verdict::violation;
  bool hermitian_exact = false;
  std::size_t n_samples = 0;
  std::optional<FactorizedDiagnostics> factorized;
};

/// Matrix of rp_inner values; verdict psd iff min eigenvalue ≥ -3·max stderr.
RPReport rp_gram(const std::vector<TestFunction>& fs, const Ensemble& ens);

struct FactorizedOptions {
  /// Conditional acceptance below this rate abandons the slice.
  double inner_floor = 1e-3;
  std::size_t blocks = kDefaultJackknifeBlocks;
};

/// Nested estimator: z_0 uniform in its box, then m_inner conditional z̃_+
/// per slice. F̂_i(z_0) estimates ∫ f_i e^{-H_+} dz̃_+ and the Gram matrix is
/// Σ conj(F̂_i) F̂_j over slices divided by the vacuum entry, a sum of
/// rank-one terms. Verdict psd iff min eigenvalue ≥ -1e-12·spectral norm.
RPReport rp_gram_factorized(const std::vector<TestFunction>& fs, const ReflectedGeometry& geom,
                            const CutoffSpec& cut, const HilbertParams& p, std::size_t n_z0,
                            std::size_t m_inner, std::uint64_t seed, const FactorizedOptions& opt = {});

/// Z⁻¹ Σ |f0(π₀z)|² e^{-H} for a function of the K_0 coordinates.
MCEstimate time_zero_inner(const TestFunction& f0, const Ensemble& ens);

struct IsometryReport {
  Complex lhs = 0, rhs = 0;
  double residual = 0;
  double combined_error = 0;
  bool exact = false;
  bool pass = false;  // exact, or within 3σ when unpaired
};

/// ⟨Θf1, Θf2⟩_{∨,-} against ⟨f2, f1⟩_∨.
IsometryReport check_theta_isometry(const TestFunction& f1, const TestFunction& f2, const Ensemble& ens);

enum class FieldObservable { curvature_plus, volume_plus, curvature, volume };
std::string to_string(FieldObservable f);

/// ⟨g, f·g⟩_∨ for a test function f on z_+.
MCEstimate field_quadratic_form(const TestFunction& g, const TestFunction& f, const Ensemble& ens);
/// ⟨g, A·g⟩_∨ for A = R_+, V_+, or R, V of all of K. The latter are
/// evaluated as ⟨g, A_+ g⟩ + ⟨g, A_- g⟩ with A_-(z) = A_+((θz)_+).
MCEstimate field_quadratic_form(const TestFunction& g, FieldObservable f, const Ensemble& ens);

struct CurvatureFormReport {
  Complex full = 0;         // ⟨g, R g⟩ from the split
  Complex twice_real = 0;   // 2 Re⟨g, R_+ g⟩
  double residual = 0;      // |full - twice_real|
  Complex direct = 0;       // ⟨g, R g⟩ with R(z) = R_+ + R_- as one factor
  double direct_residual = 0;
  double std_error = 0;
};

/// ⟨ψ(g), Φ(R)ψ(g)⟩ = 2 Re⟨ψ(g), Φ(R_+)ψ(g)⟩.
CurvatureFormReport check_curvature_form(const TestFunction& g, const Ensemble& ens);

struct CommutatorReport {
  /// max |∇(fg) - f∇g - g∇f| / (1 + max |∇(fg)|), all in closed form.
  double leibniz_residual = 0;
  /// The commutator [∇, Φ(f)]g = ∇(fg) - f∇g against (∇f)g, with ∇(fg)
  /// from central differences; relative as above.
  double commutator_fd_residual = 0;
  /// max relative gap between the closed-form ∇f and central differences.
  double finite_difference_gap = 0;
  /// For f = c⟨a, z⟩: ∇f equals c·a bit for bit.
  std::optional<bool> linear_form_exact;
};

/// [∇, Φ(f)]g = (∇f)g at the half point z_+.
CommutatorReport check_gradient_commutator(const TestFunction& f, const TestFunction& g,
                                           std::span<const double> z_plus, double fd_step = 1e-5);

/// R_+ and V_+ at z_+ packaged for evaluation.
HalfPoint half_point(const ReflectedGeometry& geom, std::span<const double> z_plus);

}  // namespace regge
