#include "regge/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "regge/error.hpp"

namespace regge {

namespace {

Complex divide(Complex num, double den) { return {num.real() / den, num.imag() / den}; }

template <class Value>
double jackknife_variance(const std::vector<Value>& leave_one_out) {
  const std::size_t b = leave_one_out.size();
  if (b < 2) return 0.0;
  Value mean{};
  for (const auto& x : leave_one_out) mean += x;
  mean /= static_cast<double>(b);
  double acc = 0.0;
  for (const auto& x : leave_one_out) acc += std::norm(x - mean);
  return acc * static_cast<double>(b - 1) / static_cast<double>(b);
}

std::size_t block_of(std::size_t i, std::size_t n, std::size_t blocks) { return i * blocks / n; }

}  // namespace

RatioAccumulator::RatioAccumulator(std::size_t n_samples, std::size_t blocks)
    : n_(n_samples), blocks_(std::max<std::size_t>(1, std::min(blocks, n_samples))),
      num_(blocks_, Complex(0.0, 0.0)), den_(blocks_, 0.0) {}

void RatioAccumulator::add(std::size_t sample, Complex num, double den) {
  const std::size_t b = block_of(sample, n_, blocks_);
  num_[b] += num;
  den_[b] += den;
}

Complex RatioAccumulator::numerator() const {
  Complex s(0.0, 0.0);
  for (const auto& x : num_) s += x;
  return s;
}

double RatioAccumulator::denominator() const {
  double s = 0.0;
  for (double x : den_) s += x;
  return s;
}

MCEstimate RatioAccumulator::result() const {
  const Complex num = numerator();
  const double den = denominator();
  if (!(den > 0.0)) throw EstimatorError("estimator has zero total weight");
  MCEstimate out;
  out.value = divide(num, den);
  out.n_samples = n_;
  std::vector<Complex> loo;
  for (std::size_t b = 0; b < blocks_; ++b) {
    const double d = den - den_[b];
    if (d > 0.0) loo.push_back((num - num_[b]) / d);
  }
  out.std_error = std::sqrt(jackknife_variance(loo));
  return out;
}

Ensemble::Ensemble(const ReflectedGeometry& geom, const SampleSet& samples, const HilbertParams& p,
                   bool paired, std::size_t blocks)
    : geom_(&geom), samples_(&samples), params_(p), paired_(paired), blocks_(blocks) {
  if (samples.size() == 0) throw EstimatorError("no samples");
  if (samples.edge_count != geom.edge_count())
    throw EstimatorError("samples have " + std::to_string(samples.edge_count) + " edges, complex has " +
                         std::to_string(geom.edge_count()));
  const std::size_t n = samples.size();
  const std::size_t half = geom.half_size();
  mirror_.resize(n * half);
  r_.resize(2 * n);
  v_.resize(2 * n);
  std::vector<double> action(n);
  constexpr std::size_t kChunk = 1024;
  parallel_for((n + kChunk - 1) / kChunk, [&](std::size_t c) {
    for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
      auto z = samples.point(i);
      std::span<double> m(mirror_.data() + i * half, half);
      geom.mirror_half(z, m);
      const auto own = geom.half_values(z);
      const auto mir = geom.half_values(m);
      r_[2 * i] = own.curvature;
      v_[2 * i] = own.volume;
      r_[2 * i + 1] = mir.curvature;
      v_[2 * i + 1] = mir.volume;
      const double h_own = p.gamma * own.curvature + p.lambda * own.volume;
      const double h_mir = p.gamma * mir.curvature + p.lambda * mir.volume;
      action[i] = h_own + h_mir;
    }
  });
  shift_ = *std::min_element(action.begin(), action.end());
  weight_.resize(n);
  for (std::size_t i = 0; i < n; ++i) weight_[i] = std::exp(-(action[i] - shift_));
}

HalfPoint Ensemble::forward(std::size_t i) const {
  return {samples_->point(i).first(geom_->half_size()), r_[2 * i], v_[2 * i]};
}

HalfPoint Ensemble::mirror(std::size_t i) const {
  const std::size_t half = geom_->half_size();
  return {std::span<const double>(mirror_.data() + i * half, half), r_[2 * i + 1], v_[2 * i + 1]};
}

MCEstimate Ensemble::average(
    const std::function<Complex(const HalfPoint& own, const HalfPoint& mirrored)>& t) const {
  RatioAccumulator acc(size(), blocks_);
  for (std::size_t i = 0; i < size(); ++i) {
    const double w = weight_[i];
    const HalfPoint own = forward(i), mir = mirror(i);
    if (paired_) {
      acc.add(i, scale(t(own, mir), w) + scale(t(mir, own), w), w + w);
    } else {
      acc.add(i, scale(t(own, mir), w), w);
    }
  }
  return acc.result();
}

MCEstimate estimate_partition(const Ensemble& ens) {
  const SampleSet& s = ens.samples();
  if (!s.from_rejection())
    throw EstimatorError("the partition function needs rejection samples (attempt count unknown)");
  const double a = static_cast<double>(s.attempt_count);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    sum += ens.weight(i);
    sum2 += ens.weight(i) * ens.weight(i);
  }
  const double mean = sum / a;
  const double var = std::max(0.0, sum2 / a - mean * mean) * a / std::max(1.0, a - 1.0);
  const double factor = s.box_volume * std::exp(-ens.log_shift());
  MCEstimate out;
  out.value = factor * mean;
  out.std_error = factor * std::sqrt(var / a);
  out.n_samples = ens.size();
  return out;
}

std::pair<double, double> log_partition(const Ensemble& ens) {
  const SampleSet& s = ens.samples();
  if (!s.from_rejection())
    throw EstimatorError("the partition function needs rejection samples (attempt count unknown)");
  double sum = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) sum += ens.weight(i);
  const double log_z = std::log(s.box_volume) - ens.log_shift() + std::log(sum / static_cast<double>(s.attempt_count));
  const auto z = estimate_partition(ens);
  return {log_z, z.std_error / z.value.real()};
}

MCEstimate estimate_expectation(const Ensemble& ens, Observable obs) {
  switch (obs) {
    case Observable::one: return ens.average([](const HalfPoint&, const HalfPoint&) { return Complex(1.0, 0.0); });
    case Observable::curvature:
      return ens.average([](const HalfPoint& own, const HalfPoint& mir) {
        return Complex(own.curvature + mir.curvature, 0.0);
      });
    case Observable::volume:
      return ens.average([](const HalfPoint& own, const HalfPoint& mir) {
        return Complex(own.volume + mir.volume, 0.0);
      });
  }
  throw EstimatorError("unknown observable");
}

MCEstimate estimate_expectation(const Ensemble& ens, const TestFunction& f) {
  validate_support(f, ens.geometry().ordering());
  return ens.average([&](const HalfPoint& own, const HalfPoint& mir) {
    return f.side() == Side::plus ? f(own) : f(mir);
  });
}

ThermoReport thermo_identity_from_terms(std::span<const double> r, std::span<const double> v,
                                        const HilbertParams& p, double delta, std::size_t blocks) {
  const std::size_t n = r.size();
  if (n == 0 || v.size() != n) throw EstimatorError("thermodynamic check needs matching nonempty R and V lists");
  if (!(delta > 0.0)) throw EstimatorError("finite-difference step must be positive");
  const std::size_t nb = std::max<std::size_t>(2, std::min(blocks, n));

  // Per-block sums of exp(-(H - shift)) and of obs·exp(-(H - shift)) at one coupling.
  struct Sums {
    double shift = 0;
    std::vector<double> w, wr, wv, w2;
  };
  auto sums = [&](double gamma, double lambda) {
    Sums s;
    s.w.assign(nb, 0.0);
    s.wr.assign(nb, 0.0);
    s.wv.assign(nb, 0.0);
    s.w2.assign(nb, 0.0);
    s.shift = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) s.shift = std::min(s.shift, gamma * r[i] + lambda * v[i]);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(-(gamma * r[i] + lambda * v[i] - s.shift));
      const std::size_t b = block_of(i, n, nb);
      s.w[b] += w;
      s.wr[b] += w * r[i];
      s.wv[b] += w * v[i];
      s.w2[b] += w * w;
    }
    return s;
  };
  auto total = [](const std::vector<double>& x, std::size_t skip = SIZE_MAX, std::size_t lo = 0,
                  std::size_t hi = SIZE_MAX) {
    double t = 0.0;
    for (std::size_t b = lo; b < std::min(hi, x.size()); ++b)
      if (b != skip) t += x[b];
    return t;
  };
  auto log_z = [&](const Sums& s, std::size_t skip = SIZE_MAX, std::size_t lo = 0, std::size_t hi = SIZE_MAX) {
    return -s.shift + std::log(total(s.w, skip, lo, hi));
  };

  const Sums centre = sums(p.gamma, p.lambda);
  ThermoReport rep;
  rep.delta = delta;
  const double sw = total(centre.w);
  rep.effective_sample_size = sw * sw / total(centre.w2);
  if (rep.effective_sample_size < 10.0)
    throw EstimatorError("effective sample size " + std::to_string(rep.effective_sample_size) +
                         " is below 10; weights are degenerate");

  auto line = [&](const char* name, const std::vector<double>& obs_sums, const Sums& up, const Sums& down) {
    ThermoLine l;
    l.name = name;
    l.expectation = total(obs_sums) / sw;
    l.derivative = -(log_z(up) - log_z(down)) / (2.0 * delta);
    l.difference = l.expectation - l.derivative;
    std::vector<double> e_loo, d_loo, diff_loo;
    for (std::size_t b = 0; b < nb; ++b) {
      const double e = total(obs_sums, b) / total(centre.w, b);
      const double d = -(log_z(up, b) - log_z(down, b)) / (2.0 * delta);
      e_loo.push_back(e);
      d_loo.push_back(d);
      diff_loo.push_back(e - d);
    }
    l.expectation_error = std::sqrt(jackknife_variance(e_loo));
    l.difference_error = std::sqrt(jackknife_variance(diff_loo));
    l.variance_common = jackknife_variance(d_loo);
    // Independent draws for the two couplings: ln Z(c+δ) from the first half
    // of the blocks, ln Z(c-δ) from the second.
    const std::size_t mid = nb / 2;
    std::vector<double> up_loo, down_loo;
    for (std::size_t b = 0; b < mid; ++b) up_loo.push_back(log_z(up, b, 0, mid));
    for (std::size_t b = mid; b < nb; ++b) down_loo.push_back(log_z(down, b, mid, nb));
    const double var_halves = (jackknife_variance(up_loo) + jackknife_variance(down_loo)) / (4.0 * delta * delta);
    l.variance_independent = var_halves / 2.0;
    l.tolerance = std::max(3.0 * l.difference_error, 0.02 * std::abs(l.expectation));
    l.pass = std::abs(l.difference) <= l.tolerance;
    return l;
  };

  rep.curvature = line("R", centre.wr, sums(p.gamma + delta, p.lambda), sums(p.gamma - delta, p.lambda));
  rep.volume = line("V", centre.wv, sums(p.gamma, p.lambda + delta), sums(p.gamma, p.lambda - delta));
  return rep;
}

ThermoReport check_thermo_identity(const Ensemble& ens, double delta) {
  std::vector<double> r(ens.size()), v(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    r[i] = ens.curvature(i);
    v[i] = ens.volume(i);
  }
  return thermo_identity_from_terms(r, v, ens.params(), delta, ens.blocks());
}

namespace {

/// g evaluated at z (at_theta = false) or at θz, from the two halves of z.
Complex evaluate_at(const TestFunction& g, const HalfPoint& own, const HalfPoint& mir, bool at_theta) {
  const bool reads_own = (g.side() == Side::plus) != at_theta;
  return g(reads_own ? own : mir);
}

void require_plus(const TestFunction& f, const EdgeOrdering& order) {
  if (f.side() != Side::plus) throw EstimatorError(f.describe() + " is not a function of z_+");
  validate_support(f, order);
}

}  // namespace

MCEstimate reflected_inner(const TestFunction& g1, const TestFunction& g2, const Ensemble& ens) {
  if (g1.side() != g2.side()) throw EstimatorError("scalar product of functions on different halves");
  validate_support(g1, ens.geometry().ordering());
  validate_support(g2, ens.geometry().ordering());
  return ens.average([&](const HalfPoint& own, const HalfPoint& mir) {
    return conj_mul(evaluate_at(g1, own, mir, true), evaluate_at(g2, own, mir, false));
  });
}

MCEstimate rp_inner(const TestFunction& f1, const TestFunction& f2, const Ensemble& ens) {
  require_plus(f1, ens.geometry().ordering());
  require_plus(f2, ens.geometry().ordering());
  return reflected_inner(f1, f2, ens);
}

std::string to_string(GramEstimator e) {
  switch (e) {
    case GramEstimator::naive: return "naive";
    case GramEstimator::naive_paired: return "naive_paired";
    case GramEstimator::factorized: return "factorized";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  return v == Verdict::psd_within_tolerance ? "psd_within_tolerance" : "violation";
}

namespace {

void finish_spectrum(RPReport& rep) {
  const auto m = rep.gram.rows();
  rep.hermitian_exact = true;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (rep.gram(i, j) != std::conj(rep.gram(j, i))) rep.hermitian_exact = false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rep.gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EstimatorError("eigen-decomposition of the Gram matrix failed");
  const auto& ev = solver.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  rep.min_eigenvalue = rep.eigenvalues.front();
  rep.spectral_norm = 0.0;
  for (double x : rep.eigenvalues) rep.spectral_norm = std::max(rep.spectral_norm, std::abs(x));
}

}  // namespace

RPReport rp_gram(const std::vector<TestFunction>& fs, const Ensemble& ens) {
  if (fs.empty()) throw EstimatorError("Gram matrix of no functions");
  const auto& order = ens.geometry().ordering();
  for (const auto& f : fs) require_plus(f, order);
  const std::size_t m = fs.size(), n = ens.size();

  // f_k at z_+ and at (θz)_+ for every sample.
  std::vector<std::vector<Complex>> own(m, std::vector<Complex>(n)), mir(m, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const HalfPoint a = ens.forward(i), b = ens.mirror(i);
    for (std::size_t k = 0; k < m; ++k) {
      own[k][i] = fs[k](a);
      mir[k][i] = fs[k](b);
    }
  }

  RPReport rep;
  rep.estimator = ens.paired() ? GramEstimator::naive_paired : GramEstimator::naive;
  rep.n_samples = n;
  rep.gram.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  rep.entry_stderr.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (const auto& f : fs) rep.functions.push_back(f.describe());
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      RatioAccumulator acc(n, ens.blocks());
      for (std::size_t i = 0; i < n; ++i) {
        const double w = ens.weight(i);
        if (ens.paired())
          acc.add(i, scale(conj_mul(mir[j][i], own[k][i]), w) + scale(conj_mul(own[j][i], mir[k][i]), w), w + w);
        else
          acc.add(i, scale(conj_mul(mir[j][i], own[k][i]), w), w);
      }
      const auto est = acc.result();
      rep.gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = est.value;
      rep.entry_stderr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = est.std_error;
    }
  }
  finish_spectrum(rep);
  rep.tolerance = 3.0 * rep.entry_stderr.maxCoeff();
  rep.verdict = rep.min_eigenvalue >= -rep.tolerance ? Verdict::psd_within_tolerance : Verdict::violation;
  return rep;
}

namespace {

constexpr std::uint64_t kSliceTag = 0x5a30;
constexpr std::uint64_t kInnerTag = 0x494e;

struct Slice {
  enum Status { ok, infeasible, breached } status = ok;
  std::vector<Complex> f;  // F̂_k, the vacuum last
  std::vector<double> variance;
  std::uint64_t attempts = 0, accepted = 0;
};

}  // namespace

RPReport rp_gram_factorized(const std::vector<TestFunction>& fs, const ReflectedGeometry& geom,
                            const CutoffSpec& cut, const HilbertParams& p, std::size_t n_z0,
                            std::size_t m_inner, std::uint64_t seed, const FactorizedOptions& opt) {
  if (fs.empty()) throw EstimatorError("Gram matrix of no functions");
  if (n_z0 < 2) throw EstimatorError("factorized estimator needs at least 2 slices");
  if (m_inner < 2) throw EstimatorError("factorized estimator needs m_inner >= 2");
  if (!(opt.inner_floor > 0.0 && opt.inner_floor <= 1.0)) throw EstimatorError("inner floor must be in (0, 1]");
  const auto& order = geom.ordering();
  for (const auto& f : fs) require_plus(f, order);

  const auto start = feasible_point(geom, cut);
  const auto ref = geom.half_values(std::span<const double>(start).first(geom.half_size()));
  const double shift = p.gamma * ref.curvature + p.lambda * ref.volume;

  const std::size_t plus = order.plus_count(), half = order.half_size();
  std::vector<Simplex> zero_edges(order.edges().begin() + static_cast<std::ptrdiff_t>(plus),
                                  order.edges().begin() + static_cast<std::ptrdiff_t>(half));
  const MetricLayout zero_layout(geom.reflection().k_zero(), EdgeOrdering::from_edges(std::move(zero_edges)));
  const double lo = 1.0 / cut.kappa, hi = cut.kappa;
  const double side = box_side(cut);
  const double box_zero = std::pow(side, static_cast<double>(half - plus));
  const double box_plus = std::pow(side, static_cast<double>(plus));
  const auto cap = static_cast<std::uint64_t>(std::ceil(static_cast<double>(m_inner) / opt.inner_floor));
  const std::size_t m = fs.size();

  std::vector<Slice> slices(n_z0);
  parallel_for(n_z0, [&](std::size_t s) {
    Slice& out = slices[s];
    out.f.assign(m + 1, Complex(0.0, 0.0));
    out.variance.assign(m + 1, 0.0);
    std::vector<double> z(half);
    RandomStream zrng(seed, s, kSliceTag);
    for (std::size_t e = plus; e < half; ++e) z[e] = zrng.uniform(lo, hi);
    std::span<const double> z0(z.data() + plus, half - plus);
    if (!meets_cutoff_determinants(zero_layout, z0, cut.kappa) ||
        (cut.norm == CutoffNorm::euclidean && std::sqrt(std::inner_product(z0.begin(), z0.end(), z0.begin(), 0.0)) > cut.kappa)) {
      out.status = Slice::infeasible;
      return;
    }
    RandomStream rng(seed, s, kInnerTag);
    std::vector<Complex> sum(m + 1, Complex(0.0, 0.0));
    std::vector<double> sum2(m + 1, 0.0);
    while (out.accepted < m_inner && out.attempts < cap) {
      ++out.attempts;
      for (std::size_t e = 0; e < plus; ++e) z[e] = rng.uniform(lo, hi);
      double norm = 0.0;
      for (double x : z) norm = cut.norm == CutoffNorm::supremum ? std::max(norm, x) : norm + x * x;
      if (cut.norm == CutoffNorm::euclidean) norm = std::sqrt(norm);
      if (norm > cut.kappa || !meets_cutoff_determinants(geom.half(), z, cut.kappa)) continue;
      ++out.accepted;
      const HalfPoint hp = half_point(geom, z);
      const double w = std::exp(-(p.gamma * hp.curvature + p.lambda * hp.volume - shift));
      for (std::size_t k = 0; k < m; ++k) {
        const Complex x = scale(fs[k](hp), w);
        sum[k] += x;
        sum2[k] += std::norm(x);
      }
      sum[m] += Complex(w, 0.0);
      sum2[m] += w * w;
    }
    if (out.accepted < m_inner) {
      out.status = Slice::breached;
      return;
    }
    // Stopping at the m-th acceptance: (m-1)/(N-1) is unbiased for the
    // conditional acceptance probability.
    const double mm = static_cast<double>(m_inner);
    const double rate = (mm - 1.0) / (static_cast<double>(out.attempts) - 1.0);
    const double factor = box_plus * rate / mm;
    for (std::size_t k = 0; k <= m; ++k) {
      out.f[k] = scale(sum[k], factor);
      const Complex mean = divide(sum[k], mm);
      const double var_acc = std::max(0.0, sum2[k] / mm - std::norm(mean)) * mm / (mm - 1.0);
      out.variance[k] = box_plus * box_plus * rate * rate * (var_acc + std::norm(mean) * (1.0 - rate)) / mm;
    }
  });

  const std::size_t nb = std::max<std::size_t>(2, std::min(opt.blocks, n_z0));
  const auto dim = static_cast<Eigen::Index>(m);
  std::vector<Eigen::MatrixXcd> raw_b(nb, Eigen::MatrixXcd::Zero(dim, dim));
  std::vector<double> zraw_b(nb, 0.0);
  FactorizedDiagnostics diag;
  diag.n_z0 = n_z0;
  diag.m_inner = m_inner;
  diag.diagonal_bias.assign(m, 0.0);
  std::vector<double> vacuum_sq(n_z0, 0.0);
  for (std::size_t s = 0; s < n_z0; ++s) {
    const Slice& sl = slices[s];
    diag.inner_attempts += sl.attempts;
    diag.inner_accepted += sl.accepted;
    if (sl.status == Slice::infeasible) ++diag.infeasible_slices;
    if (sl.status == Slice::breached) ++diag.breached_slices;
    if (sl.status != Slice::ok) continue;
    const std::size_t b = block_of(s, n_z0, nb);
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index k = 0; k < dim; ++k)
        raw_b[b](j, k) += conj_mul(sl.f[static_cast<std::size_t>(j)], sl.f[static_cast<std::size_t>(k)]);
    const double fe = sl.f[m].real();
    zraw_b[b] += fe * fe;
    vacuum_sq[s] = fe * fe;
    for (std::size_t k = 0; k < m; ++k) diag.diagonal_bias[k] += sl.variance[k];
  }
  Eigen::MatrixXcd raw = Eigen::MatrixXcd::Zero(dim, dim);
  double zraw = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    raw += raw_b[b];
    zraw += zraw_b[b];
  }
  if (!(zraw > 0.0)) throw FeasibilityError("no feasible z_0 slice produced a conditional sample");

  RPReport rep;
  rep.estimator = GramEstimator::factorized;
  rep.n_samples = n_z0;
  for (const auto& f : fs) rep.functions.push_back(f.describe());
  rep.gram.resize(dim, dim);
  rep.entry_stderr.resize(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      rep.gram(j, k) = divide(raw(j, k), zraw);
      std::vector<Complex> loo;
      for (std::size_t b = 0; b < nb; ++b)
        if (zraw - zraw_b[b] > 0.0) loo.push_back((raw(j, k) - raw_b[b](j, k)) / (zraw - zraw_b[b]));
      rep.entry_stderr(j, k) = std::sqrt(jackknife_variance(loo));
    }
  }
  for (auto& bias : diag.diagonal_bias) bias /= zraw;

  // Absolute Z = box_0 · mean over slices of F̂_e², undoing the shift.
  const double scale_z = box_zero * std::exp(-2.0 * shift);
  double mean = zraw / static_cast<double>(n_z0), var = 0.0;
  for (double x : vacuum_sq) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n_z0 - 1);
  diag.partition.value = scale_z * mean;
  diag.partition.std_error = scale_z * std::sqrt(var / static_cast<double>(n_z0));
  diag.partition.n_samples = n_z0;

  finish_spectrum(rep);
  rep.tolerance = 1e-12 * rep.spectral_norm;
  rep.verdict = rep.min_eigenvalue >= -rep.tolerance ? Verdict::psd_within_tolerance : Verdict::violation;
  rep.factorized = std::move(diag);
  return rep;
}

MCEstimate time_zero_inner(const TestFunction& f0, const Ensemble& ens) {
  if (f0.support() != Support::z_zero)
    throw EstimatorError(f0.describe() + " is not declared as a function of the K_0 coordinates");
  require_plus(f0, ens.geometry().ordering());
  return ens.average([&](const HalfPoint& own, const HalfPoint&) { return Complex(std::norm(f0(own)), 0.0); });
}

IsometryReport check_theta_isometry(const TestFunction& f1, const TestFunction& f2, const Ensemble& ens) {
  require_plus(f1, ens.geometry().ordering());
  require_plus(f2, ens.geometry().ordering());
  const auto lhs = reflected_inner(theta_map(f1), theta_map(f2), ens);
  const auto rhs = reflected_inner(f2, f1, ens);
  IsometryReport rep;
  rep.lhs = lhs.value;
  rep.rhs = rhs.value;
  rep.residual = std::abs(lhs.value - rhs.value);
  rep.combined_error = std::hypot(lhs.std_error, rhs.std_error);
  rep.exact = lhs.value == rhs.value;
  rep.pass = rep.exact || rep.residual <= 3.0 * rep.combined_error;
  return rep;
}

std::string to_string(FieldObservable f) {
  switch (f) {
    case FieldObservable::curvature_plus: return "R_plus";
    case FieldObservable::volume_plus: return "V_plus";
    case FieldObservable::curvature: return "R";
    case FieldObservable::volume: return "V";
  }
  return "unknown";
}

MCEstimate field_quadratic_form(const TestFunction& g, const TestFunction& f, const Ensemble& ens) {
  require_plus(g, ens.geometry().ordering());
  require_plus(f, ens.geometry().ordering());
  return ens.average([&](const HalfPoint& own, const HalfPoint& mir) {
    return conj_mul(g(mir), mul(f(own), g(own)));
  });
}

namespace {

/// ⟨g, A_± g⟩ with A read from the own half (plus) or the mirror half (minus).
MCEstimate half_form(const TestFunction& g, const Ensemble& ens, bool volume, bool minus) {
  return ens.average([&](const HalfPoint& own, const HalfPoint& mir) {
    const HalfPoint& at = minus ? mir : own;
    return scale(conj_mul(g(mir), g(own)), volume ? at.volume : at.curvature);
  });
}

}  // namespace

MCEstimate field_quadratic_form(const TestFunction& g, FieldObservable f, const Ensemble& ens) {
  require_plus(g, ens.geometry().ordering());
  const bool volume = f == FieldObservable::volume_plus || f == FieldObservable::volume;
  if (f == FieldObservable::curvature_plus || f == FieldObservable::volume_plus)
    return half_form(g, ens, volume, false);
  const auto plus = half_form(g, ens, volume, false);
  const auto minus = half_form(g, ens, volume, true);
  // Error bar from the combined integrand.
  auto combined = ens.average([&](const HalfPoint& own, const HalfPoint& mir) {
    const double a = volume ? own.volume + mir.volume : own.curvature + mir.curvature;
    return scale(conj_mul(g(mir), g(own)), a);
  });
  combined.value = plus.value + minus.value;
  return combined;
}

CurvatureFormReport check_curvature_form(const TestFunction& g, const Ensemble& ens) {
  require_plus(g, ens.geometry().ordering());
  const auto plus = half_form(g, ens, false, false);
  const auto full = field_quadratic_form(g, FieldObservable::curvature, ens);
  const auto direct = ens.average([&](const HalfPoint& own, const HalfPoint& mir) {
    return scale(conj_mul(g(mir), g(own)), own.curvature + mir.curvature);
  });
  CurvatureFormReport rep;
  rep.full = full.value;
  rep.twice_real = Complex(plus.value.real() + plus.value.real(), 0.0);
  rep.residual = std::abs(rep.full - rep.twice_real);
  rep.direct = direct.value;
  rep.direct_residual = std::abs(rep.direct - rep.full);
  rep.std_error = full.std_error;
  return rep;
}

HalfPoint half_point(const ReflectedGeometry& geom, std::span<const double> z_plus) {
  const auto v = geom.half_values(z_plus);
  return {z_plus, v.curvature, v.volume};
}

CommutatorReport check_gradient_commutator(const TestFunction& f, const TestFunction& g,
                                           std::span<const double> z_plus, double fd_step) {
  if (!f.differentiable() || !g.differentiable())
    throw EstimatorError("commutator check needs functions with closed-form gradients");
  const HalfPoint hp{z_plus, 0.0, 0.0};
  const TestFunction fg = multiply(f, g);
  const Complex fv = f(hp), gv = g(hp);
  const auto df = f.gradient(hp), dg = g.gradient(hp), dfg = fg.gradient(hp);

  std::vector<double> z(z_plus.begin(), z_plus.end());
  auto central = [&](const TestFunction& h, std::size_t e) {
    const double step = fd_step * std::max(1.0, std::abs(z_plus[e]));
    z[e] = z_plus[e] + step;
    const Complex up = h(HalfPoint{z, 0.0, 0.0});
    z[e] = z_plus[e] - step;
    const Complex down = h(HalfPoint{z, 0.0, 0.0});
    z[e] = z_plus[e];
    return (up - down) / (2.0 * step);
  };

  double scale_fg = 0.0, scale_f = 0.0;
  for (std::size_t e = 0; e < z.size(); ++e) {
    scale_fg = std::max(scale_fg, std::abs(dfg[e]));
    scale_f = std::max(scale_f, std::abs(df[e]));
  }
  CommutatorReport rep;
  for (std::size_t e = 0; e < z.size(); ++e) {
    const Complex f_dg = mul(fv, dg[e]), df_g = mul(df[e], gv);
    rep.leibniz_residual = std::max(rep.leibniz_residual, std::abs(dfg[e] - f_dg - df_g) / (1.0 + scale_fg));
    rep.commutator_fd_residual =
        std::max(rep.commutator_fd_residual, std::abs(central(fg, e) - f_dg - df_g) / (1.0 + scale_fg));
    rep.finite_difference_gap = std::max(rep.finite_difference_gap, std::abs(central(f, e) - df[e]) / (1.0 + scale_f));
  }
  if (f.kind() == FunctionKind::linear_form && f.power() == 1) {
    bool exact = true;
    const auto& a = f.weights();
    for (std::size_t e = 0; e < z.size(); ++e) {
      const Complex expected = e < a.size() ? scale(f.coefficient(), a[e]) : Complex(0.0, 0.0);
      if (df[e] != expected) exact = false;
    }
    rep.linear_form_exact = exact;
  }
  return rep;
}

}  // namespace regge
