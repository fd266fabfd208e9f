#include <doctest.h>

#include <cstdlib>
#include <random>

#include "fixtures.hpp"
#include "regge/error.hpp"
#include "regge/estimators.hpp"
#include "regge/sampling.hpp"

using namespace regge;

namespace {

const CutoffSpec kCut{10.0, CutoffNorm::supremum};

/// Sets REGGE_THREADS for the lifetime of the object.
class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) {
    if (const char* old = std::getenv("REGGE_THREADS")) old_ = old;
    ::setenv("REGGE_THREADS", value, 1);
  }
  ~ThreadsEnv() {
    if (old_.empty())
      ::unsetenv("REGGE_THREADS");
    else
      ::setenv("REGGE_THREADS", old_.c_str(), 1);
  }

 private:
  std::string old_;
};

}  // namespace

TEST_CASE("random streams are reproducible and distinct") {
  RandomStream a(1, 2, 3), b(1, 2, 3), c(1, 3, 3), d(2, 2, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.bits();
    CHECK(x == b.bits());
    differs_c = differs_c || x != c.bits();
    differs_d = differs_d || x != d.bits();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("worker count honours REGGE_THREADS") {
  {
    ThreadsEnv env("3");
    CHECK(worker_count() == 3);
  }
  {
    ThreadsEnv env("1");
    CHECK(worker_count() == 1);
  }
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw EstimatorError("boom");
                  }),
                  EstimatorError);
}

TEST_CASE("sample_cutoff: determinism, bounds and cutoff membership") {
  const auto geom = fixture::two_tetrahedra();
  const auto s1 = sample_cutoff(geom, kCut, 1000, 42);
  const auto s2 = sample_cutoff(geom, kCut, 1000, 42);
  const auto s3 = sample_cutoff(geom, kCut, 1000, 43);
  CHECK(s1.size() == 1000);
  CHECK(digest(s1) == digest(s2));
  CHECK(digest(s1) != digest(s3));
  CHECK(s1.attempt_count >= 1000);
  CHECK(s1.box_volume == doctest::Approx(std::pow(10.0 - 0.1, 9)));
  for (std::size_t i = 0; i < s1.size(); ++i) {
    const auto z = s1.point(i);
    CHECK(in_cutoff(geom.full(), z, kCut));
    for (double x : z) {
      CHECK(x >= 0.1);
      CHECK(x <= 10.0);
    }
  }
  // A prefix of a longer run is the shorter run.
  const auto s4 = sample_cutoff(geom, kCut, 1500, 42);
  CHECK(std::equal(s1.data.begin(), s1.data.end(), s4.data.begin()));
}

TEST_CASE("sample_cutoff does not depend on the thread count") {
  const auto geom = fixture::doubled_strip_geometry();
  std::uint64_t d1, d3;
  std::uint64_t a1, a3;
  {
    ThreadsEnv env("1");
    const auto s = sample_cutoff(geom, kCut, 2000, 7);
    d1 = digest(s);
    a1 = s.attempt_count;
  }
  {
    ThreadsEnv env("3");
    const auto s = sample_cutoff(geom, kCut, 2000, 7);
    d3 = digest(s);
    a3 = s.attempt_count;
  }
  CHECK(d1 == d3);
  CHECK(a1 == a3);
}

TEST_CASE("euclidean cutoff norm") {
  const auto geom = fixture::two_tetrahedra();
  const CutoffSpec cut{10.0, CutoffNorm::euclidean};
  const auto s = sample_cutoff(geom, cut, 500, 3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(half_norm(s.point(i), geom.ordering(), true, CutoffNorm::euclidean) <= 10.0);
    CHECK(half_norm(s.point(i), geom.ordering(), false, CutoffNorm::euclidean) <= 10.0);
  }
}

TEST_CASE("infeasible cutoffs are reported") {
  const auto geom = fixture::two_tetrahedra();
  // Tetrahedra need c³/2 ≥ 1/κ on the ray c·1, i.e. c ≥ 1.22 > κ = 1.1.
  CHECK_THROWS_AS(sample_cutoff(geom, {1.1, CutoffNorm::supremum}, 10, 1), FeasibilityError);
  CHECK_THROWS_AS(feasible_point(geom, {0.5, CutoffNorm::supremum}), FeasibilityError);
  const auto p = feasible_point(geom, kCut);
  CHECK(in_cutoff(geom.full(), p, kCut));
  // Feasible but with an acceptance rate far below a strict floor.
  SamplerOptions strict;
  strict.acceptance_floor = 0.9;
  CHECK_THROWS_AS(sample_cutoff(geom, kCut, 100000, 1, strict), FeasibilityError);
}

TEST_CASE("sample file round trip and corruption") {
  const auto geom = fixture::two_tetrahedra();
  const auto s = sample_cutoff(geom, kCut, 50, 11);
  const auto bytes = serialize(s);
  CHECK(std::string(bytes.begin(), bytes.begin() + 7) == "RPSAMP1");
  const auto back = deserialize(bytes);
  CHECK(back.seed == s.seed);
  CHECK(back.cut.kappa == s.cut.kappa);
  CHECK(back.cut.norm == s.cut.norm);
  CHECK(back.data == s.data);
  CHECK(back.attempt_count == s.attempt_count);
  CHECK(back.box_volume == s.box_volume);
  CHECK(digest(back) == digest(s));

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(deserialize(truncated), IoError);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize(bad), IoError);

  const auto path = std::filesystem::temp_directory_path() / "regge_test_samples.rpsamp";
  write_samples(path, s);
  CHECK(digest(read_samples(path)) == digest(s));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_samples(path), IoError);
}

TEST_CASE("partition function") {
  const auto geom = fixture::two_tetrahedra();
  const auto s = sample_cutoff(geom, kCut, 100000, 42);

  // Unit integrand: Z is the Lebesgue volume of the cutoff region.
  const Ensemble flat(geom, s, {0.0, 0.0});
  const auto z0 = estimate_partition(flat);
  const double volume = s.box_volume * static_cast<double>(s.size()) / static_cast<double>(s.attempt_count);
  CHECK(z0.value.real() == doctest::Approx(volume).epsilon(1e-12));

  const Ensemble ens(geom, s, {1.0, 1.0});
  const auto z = estimate_partition(ens);
  CHECK(z.value.real() > 0.0);
  CHECK(z.value.imag() == 0.0);
  CHECK(z.std_error / z.value.real() < 0.02);

  // Decreasing in λ on common samples, since V > 0 everywhere.
  double last = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double zl = estimate_partition(Ensemble(geom, s, {1.0, lambda})).value.real();
    CHECK(zl < last);
    last = zl;
  }

  // Independent seed agrees within combined errors.
  const auto s2 = sample_cutoff(geom, kCut, 100000, 4242);
  const auto zb = estimate_partition(Ensemble(geom, s2, {1.0, 1.0}));
  CHECK(std::abs(zb.value.real() - z.value.real()) <= 4.0 * std::hypot(z.std_error, zb.std_error));

  const auto [lz, lz_err] = log_partition(ens);
  CHECK(lz == doctest::Approx(std::log(z.value.real())).epsilon(1e-12));
  CHECK(lz_err > 0.0);
}

TEST_CASE("self-normalized expectations") {
  const auto geom = fixture::two_tetrahedra();
  const auto s = sample_cutoff(geom, kCut, 20000, 5);
  const Ensemble ens(geom, s, {1.0, 1.0});
  const auto one = estimate_expectation(ens, Observable::one);
  CHECK(one.value == Complex(1.0, 0.0));
  CHECK(one.std_error == 0.0);
  const auto v = estimate_expectation(ens, Observable::volume);
  CHECK(v.value.real() > 5 * v.std_error);
  const auto r = estimate_expectation(ens, Observable::curvature);
  CHECK(std::isfinite(r.value.real()));

  // ⟨R∘θ⟩ equals ⟨R⟩ bit for bit under pairing.
  const auto r_theta = ens.average([&](const HalfPoint& own, const HalfPoint& mir) {
    return Complex(mir.curvature + own.curvature, 0.0);
  });
  CHECK(r_theta.value == r.value);

  // Plain weighted mean against a direct computation.
  double sw = 0, swv = 0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    sw += ens.weight(i);
    swv += ens.weight(i) * ens.volume(i);
  }
  CHECK(v.value.real() == doctest::Approx(swv / sw).epsilon(1e-12));
}

TEST_CASE("thermodynamic identity") {
  const auto geom = fixture::two_tetrahedra();
  const auto s = sample_cutoff(geom, kCut, 100000, 42);
  const Ensemble ens(geom, s, {1.0, 1.0});
  const auto t = check_thermo_identity(ens, 0.01);
  CHECK(t.pass());
  CHECK(t.effective_sample_size > 1000);
  // Common samples beat independent halves.
  CHECK(t.curvature.variance_common < t.curvature.variance_independent);
  CHECK(t.volume.variance_common < t.volume.variance_independent);
}

TEST_CASE("thermodynamic identity on synthetic linear actions") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> r(5000), v(5000);
  for (auto& x : r) x = u(rng);
  for (auto& x : v) x = u(rng);
  // The central-difference error is O(δ²) and vanishes as δ → 0.
  const auto coarse = thermo_identity_from_terms(r, v, {0.5, 0.5}, 0.2);
  const auto fine = thermo_identity_from_terms(r, v, {0.5, 0.5}, 0.1);
  const auto tiny = thermo_identity_from_terms(r, v, {0.5, 0.5}, 1e-4);
  CHECK(std::abs(coarse.curvature.difference / fine.curvature.difference) == doctest::Approx(4.0).epsilon(0.02));
  CHECK(std::abs(tiny.curvature.difference) < 1e-8);
  CHECK(std::abs(tiny.volume.difference) < 1e-8);

  // A constant observable has zero variance: the identity is exact.
  std::vector<double> c(100, 1.5);
  const auto flat = thermo_identity_from_terms(c, c, {1.0, 1.0}, 0.01);
  CHECK(std::abs(flat.curvature.difference) < 1e-12);

  // Weights concentrated on one point fail the effective-size guard.
  std::vector<double> spike(100, 1000.0);
  spike[0] = 0.0;
  CHECK_THROWS_AS(thermo_identity_from_terms(spike, std::vector<double>(100, 0.0), {1.0, 0.0}, 0.01),
                  EstimatorError);
}

TEST_CASE("Metropolis sampler agrees with rejection sampling") {
  const auto geom = fixture::two_tetrahedra();
  const auto m = sample_metropolis(geom, kCut, 20000, 13);
  CHECK(m.size() == 20000);
  CHECK_FALSE(m.from_rejection());
  for (std::size_t i = 0; i < m.size(); i += 97) CHECK(in_cutoff(geom.full(), m.point(i), kCut));
  const auto r = sample_cutoff(geom, kCut, 20000, 13);

  // Compare uniform-measure means of every coordinate; the chain is
  // correlated, so allow a generous multiple of the i.i.d. error.
  for (std::size_t e = 0; e < geom.edge_count(); ++e) {
    double mm = 0, mr = 0, vr = 0;
    for (std::size_t i = 0; i < m.size(); ++i) mm += m.point(i)[e];
    for (std::size_t i = 0; i < r.size(); ++i) mr += r.point(i)[e];
    mm /= m.size();
    mr /= r.size();
    for (std::size_t i = 0; i < r.size(); ++i) vr += std::pow(r.point(i)[e] - mr, 2);
    const double se = std::sqrt(vr / r.size() / r.size());
    CAPTURE(e);
    CHECK(std::abs(mm - mr) < 10 * se);
  }
  CHECK_THROWS_AS(estimate_partition(Ensemble(geom, m, {1, 1})), EstimatorError);
  // Expectations do not need the attempt count.
  const auto vm = estimate_expectation(Ensemble(geom, m, {1, 1}), Observable::volume);
  const auto vr = estimate_expectation(Ensemble(geom, r, {1, 1}), Observable::volume);
  CHECK(std::abs(vm.value.real() - vr.value.real()) < 10 * std::hypot(vm.std_error, vr.std_error));
}
