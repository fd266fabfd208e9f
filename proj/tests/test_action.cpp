#include <doctest.h>

#include <bit>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "regge/action.hpp"
#include "regge/error.hpp"
#include "regge/sampling.hpp"

using namespace regge;

namespace {

const double kRegularDihedral = std::acos(1.0 / 3.0) / (2 * std::numbers::pi);

double tol(const ActionBreakdown& b) { return 1e-10 * (1 + std::abs(b.R) + std::abs(b.V)); }

}  // namespace

TEST_CASE("volumes and curvature of the boundary of the 4-simplex") {
  const auto s4 = fixture::boundary_4_simplex();
  const std::vector<double> ones(10, 1.0);
  CHECK(total_volume(s4, ones) == doctest::Approx(5.0 / (6 * std::sqrt(2.0))).epsilon(1e-14));
  for (const auto& e : s4.complex().simplices(1))
    CHECK(std::abs(deficit(s4, e, ones) - (1 - 3 * kRegularDihedral)) <= 1e-12);
  const double r = regge_curvature(s4, ones);
  CHECK(std::abs(r - 10 * (1 - 3 * kRegularDihedral)) <= 1e-10);
  CHECK(r == doctest::Approx(4.1226018).epsilon(1e-7));
  CHECK(hilbert_action(s4, ones, {1, 1}) == doctest::Approx(4.7118575).epsilon(1e-7));
  CHECK(hilbert_action(s4, ones, {0, 1}) == doctest::Approx(total_volume(s4, ones)).epsilon(1e-15));
  CHECK(hilbert_action(s4, ones, {1, 0}) == doctest::Approx(r).epsilon(1e-15));
}

TEST_CASE("two-tetrahedron complex, all ones") {
  const auto geom = fixture::two_tetrahedra();
  const auto& layout = geom.full();
  const std::vector<double> ones(9, 1.0);
  CHECK(total_volume(layout, ones) == doctest::Approx(2.0 / (6 * std::sqrt(2.0))).epsilon(1e-14));
  CHECK(std::abs(deficit(layout, Simplex{1, 2}, ones) - (0.5 - 2 * kRegularDihedral)) <= 1e-12);
  CHECK(std::abs(deficit(layout, Simplex{0, 1}, ones) - (0.5 - kRegularDihedral)) <= 1e-12);
  CHECK(deficit(layout, Simplex{1, 2}, ones) == doctest::Approx(0.1081735).epsilon(1e-7));
  CHECK(deficit(layout, Simplex{0, 1}, ones) == doctest::Approx(0.3040867).epsilon(1e-7));
  // 3 shared edges with two cofaces and 6 outer edges with one.
  const double expected = 3 * (0.5 - 2 * kRegularDihedral) + 6 * (0.5 - kRegularDihedral);
  const double r = regge_curvature(layout, ones);
  CHECK(std::abs(r - expected) <= 1e-12);
  CHECK(r == doctest::Approx(2.14904069).epsilon(1e-9));
  CHECK(std::abs(r - oracle::curvature(layout, ones)) <= 1e-10);

  const auto b = split_action(geom, ones, {1, 1});
  CHECK(b.R_plus == doctest::Approx(b.R / 2).epsilon(1e-14));
  CHECK(b.R_minus == doctest::Approx(b.R / 2).epsilon(1e-14));
  CHECK(b.V_plus == doctest::Approx(b.V / 2).epsilon(1e-14));
  CHECK(b.V_minus == doctest::Approx(b.V / 2).epsilon(1e-14));
}

TEST_CASE("deficit rejects simplexes of the wrong dimension") {
  const auto geom = fixture::two_tetrahedra();
  CHECK_THROWS(deficit(geom.full(), Simplex{1, 2, 3}, std::vector<double>(9, 1.0)));
}

TEST_CASE("non-metric input is refused") {
  const auto geom = fixture::two_tetrahedra();
  std::vector<double> z(9, 1.0);
  z[*geom.ordering().position(1, 2)] = 4.01;
  CHECK_THROWS_AS(regge_curvature(geom.full(), z), NotRealizableError);
  CHECK_THROWS_AS(total_volume(geom.full(), z), NotRealizableError);
  CHECK_THROWS_AS(split_action(geom, z, {}), NotRealizableError);
}

TEST_CASE("flat interior: curvature is the boundary sum") {
  // Four right triangles around the centre of a unit square.
  const auto k = build_complex({{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {0, 3, 4}});
  const MetricLayout layout(k);
  std::map<Vertex, oracle::Point> pts;
  const double xy[5][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  for (int i = 0; i < 5; ++i) pts[i] = oracle::Point{{xy[i][0], xy[i][1]}};
  const auto z = oracle::metric_from_points(layout, pts);
  CHECK(std::abs(deficit(layout, Simplex{4}, z)) <= 1e-14);
  double boundary = 0;
  for (Vertex v = 0; v < 4; ++v) boundary += deficit(layout, Simplex{v}, z);
  CHECK(std::abs(regge_curvature(layout, z) - boundary) <= 1e-14);
  CHECK(std::abs(boundary - 4 * (0.5 - 0.25)) <= 1e-14);
}

TEST_CASE("curvature matches the brute-force oracle at random points") {
  std::mt19937_64 rng(17);
  const auto s4 = fixture::boundary_4_simplex();
  const auto strip = fixture::doubled_strip_geometry();
  for (int trial = 0; trial < 30; ++trial) {
    const auto z = oracle::jittered_ones(s4.edge_count(), 0.3, rng);
    CHECK(std::abs(regge_curvature(s4, z) - oracle::curvature(s4, z)) <= 1e-10);
    const auto w = oracle::jittered_ones(strip.edge_count(), 0.3, rng);
    CHECK(std::abs(regge_curvature(strip.full(), w) - oracle::curvature(strip.full(), w)) <= 1e-10);
  }
}

TEST_CASE("homogeneity of R and V") {
  std::mt19937_64 rng(19);
  const auto s4 = fixture::boundary_4_simplex();
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = oracle::jittered_ones(s4.edge_count(), 0.3, rng);
    const double c = 0.5 + trial * 0.2;
    std::vector<double> cz(z);
    for (auto& x : cz) x *= c;
    CHECK(total_volume(s4, cz) == doctest::Approx(std::pow(c, 1.5) * total_volume(s4, z)).epsilon(1e-12));
    CHECK(regge_curvature(s4, cz) == doctest::Approx(std::pow(c, 0.5) * regge_curvature(s4, z)).epsilon(1e-12));
  }
}

TEST_CASE("property: exact splits, θ-invariance and locality on cutoff samples") {
  for (int which = 0; which < 2; ++which) {
    const auto geom = which == 0 ? fixture::two_tetrahedra() : fixture::doubled_strip_geometry();
    const auto s = sample_cutoff(geom, {10.0, CutoffNorm::supremum}, 300, 99 + which);
    const auto& order = geom.ordering();
    std::mt19937_64 rng(23);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto z = s.point(i);
      const auto b = split_action(geom, z, {1.3, 0.7});
      CHECK(std::abs(b.R_plus + b.R_minus - b.R) <= tol(b));
      CHECK(std::abs(b.V_plus + b.V_minus - b.V) <= tol(b));
      CHECK(std::abs(b.H_plus + b.H_minus - b.H) <= tol(b));
      CHECK(std::abs(std::exp(-b.H) - std::exp(-b.H_plus) * std::exp(-b.H_minus)) <= 1e-12 * std::exp(-b.H));

      const auto tz = theta_pullback(z, order);
      CHECK(theta_pullback(tz, order) == std::vector<double>(z.begin(), z.end()));
      const auto bt = split_action(geom, tz, {1.3, 0.7});
      CHECK(std::abs(bt.R - b.R) <= tol(b));
      CHECK(std::abs(bt.V - b.V) <= tol(b));
      CHECK(std::abs(bt.H - b.H) <= tol(b));
      CHECK(std::abs(bt.R_plus - b.R_minus) <= tol(b));
      CHECK(std::abs(bt.V_minus - b.V_plus) <= tol(b));

      // Changing z̃_- leaves H_+ bit-identical; changing z̃_+ leaves H_-.
      std::vector<double> w(z.begin(), z.end());
      for (std::size_t e = order.minus_begin(); e < order.size(); ++e) w[e] *= 1.0 + 0.01 * ((rng() % 7) - 3.0);
      if (is_metric(geom.full(), w)) {
        const auto bw = split_action(geom, w, {1.3, 0.7});
        CHECK(std::bit_cast<std::uint64_t>(bw.H_plus) == std::bit_cast<std::uint64_t>(b.H_plus));
      }
      std::vector<double> u(z.begin(), z.end());
      for (std::size_t e = 0; e < order.zero_begin(); ++e) u[e] *= 1.0 + 0.01 * ((rng() % 7) - 3.0);
      if (is_metric(geom.full(), u)) {
        const auto bu = split_action(geom, u, {1.3, 0.7});
        CHECK(std::bit_cast<std::uint64_t>(bu.H_minus) == std::bit_cast<std::uint64_t>(b.H_minus));
      }
    }
  }
}

TEST_CASE("theta pullback fixes θ-symmetric metrics") {
  const auto geom = fixture::doubled_strip_geometry();
  std::mt19937_64 rng(29);
  auto z = oracle::jittered_ones(geom.edge_count(), 0.2, rng);
  const auto& order = geom.ordering();
  for (std::size_t e = order.minus_begin(); e < order.size(); ++e) z[e] = z[order.theta(e)];
  CHECK(theta_pullback(z, order) == z);
}

TEST_CASE("gradient: Euler relation, θ-pairing and convergence order") {
  std::mt19937_64 rng(31);
  const auto geom = fixture::doubled_strip_geometry();
  const auto& layout = geom.full();
  const auto& order = geom.ordering();
  for (int trial = 0; trial < 10; ++trial) {
    auto z = oracle::jittered_ones(layout.edge_count(), 0.2, rng);
    const auto g = grad_R(layout, z);
    double dot = 0;
    for (std::size_t e = 0; e < z.size(); ++e) dot += z[e] * g.gradient[e];
    const double r = regge_curvature(layout, z);
    CHECK(std::abs(dot - 0.5 * r) <= 1e-6 * std::abs(r));
    for (bool f : g.flagged) CHECK_FALSE(f);

    for (std::size_t e = order.minus_begin(); e < order.size(); ++e) z[e] = z[order.theta(e)];
    const auto gs = grad_R(layout, z);
    for (std::size_t e = 0; e < z.size(); ++e)
      CHECK(std::abs(gs.gradient[e] - gs.gradient[order.theta(e)]) <= 1e-8 * (1 + std::abs(gs.gradient[e])));
  }

  // D(h) - D(h/2) over D(h/2) - D(h/4) tends to 4 for central differences.
  auto z = oracle::jittered_ones(layout.edge_count(), 0.2, rng);
  const double h = 0.05;
  for (std::size_t e : {std::size_t{0}, std::size_t{5}}) {
    const double d1 = central_difference_R(layout, z, e, h);
    const double d2 = central_difference_R(layout, z, e, h / 2);
    const double d4 = central_difference_R(layout, z, e, h / 4);
    CHECK((d1 - d2) / (d2 - d4) == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("gradient agrees with the oracle by finite differences") {
  std::mt19937_64 rng(37);
  const auto s4 = fixture::boundary_4_simplex();
  const auto z = oracle::jittered_ones(s4.edge_count(), 0.2, rng);
  const auto g = grad_R(s4, z);
  for (std::size_t e = 0; e < z.size(); ++e) {
    auto zp = z, zm = z;
    const double h = 1e-4;
    zp[e] += h;
    zm[e] -= h;
    const double fd = (oracle::curvature(s4, zp) - oracle::curvature(s4, zm)) / (2 * h);
    CHECK(g.gradient[e] == doctest::Approx(fd).epsilon(1e-6));
  }
}
