#include "regge/action.hpp"

#include <algorithm>
#include <cmath>

#include "regge/error.hpp"

namespace regge {

CurvatureTerms CurvatureTerms::build(const MetricLayout& layout, const std::vector<std::size_t>& tops,
                                     const std::vector<std::pair<std::size_t, double>>& hinges) {
  CurvatureTerms t;
  t.n_ = layout.dimension();
  t.tops_ = tops;
  if (t.n_ < 2) return t;
  const SimplicialComplex& k = layout.complex();
  const auto hinge_level = k.simplices(t.n_ - 2);
  const auto top_level = k.simplices(t.n_);

  // Slot of each hinge in `hinges`, by hinge index.
  std::vector<std::int64_t> slot(hinge_level.size(), -1);
  for (std::size_t h = 0; h < hinges.size(); ++h) slot[hinges[h].first] = static_cast<std::int64_t>(h);

  std::vector<std::vector<Wedge>> per_hinge(hinges.size());
  for (std::size_t p = 0; p < tops.size(); ++p) {
    const Simplex& top = top_level[tops[p]];
    for (std::uint8_t a = 0; a < top.size(); ++a) {
      for (std::uint8_t b = a + 1; b < top.size(); ++b) {
        Simplex hinge = top.without(b).without(a);
        auto idx = k.index_of(hinge);
        if (!idx || slot[*idx] < 0) continue;
        per_hinge[static_cast<std::size_t>(slot[*idx])].push_back({static_cast<std::uint32_t>(p), a, b});
      }
    }
  }
  for (std::size_t h = 0; h < hinges.size(); ++h) {
    Hinge entry{hinges[h].first, hinges[h].second, static_cast<std::uint32_t>(t.wedges_.size()), 0};
    t.wedges_.insert(t.wedges_.end(), per_hinge[h].begin(), per_hinge[h].end());
    entry.wedge_end = static_cast<std::uint32_t>(t.wedges_.size());
    t.hinges_.push_back(entry);
  }
  return t;
}

CurvatureTerms CurvatureTerms::whole(const MetricLayout& layout) {
  const SimplicialComplex& k = layout.complex();
  const int n = k.dimension();
  std::vector<std::size_t> tops(k.count(n));
  for (std::size_t i = 0; i < tops.size(); ++i) tops[i] = i;
  std::vector<std::pair<std::size_t, double>> hinges;
  if (n >= 2) {
    const SimplicialComplex boundary = boundary_complex(k);
    const auto level = k.simplices(n - 2);
    for (std::size_t i = 0; i < level.size(); ++i)
      hinges.emplace_back(i, boundary.contains(level[i]) ? 0.5 : 1.0);
  }
  return build(layout, tops, hinges);
}

CurvatureTerms CurvatureTerms::half(const MetricLayout& layout, const SimplicialComplex& region,
                                    const SimplicialComplex& k_zero,
                                    const SimplicialComplex& boundary_of_k) {
  const SimplicialComplex& k = layout.complex();
  const int n = k.dimension();
  std::vector<std::size_t> tops;
  for (const Simplex& s : region.simplices(n)) {
    auto idx = k.index_of(s);
    if (!idx) throw ComplexError("region simplex " + s.to_string() + " is not in the layout complex");
    tops.push_back(*idx);
  }
  std::sort(tops.begin(), tops.end());
  std::vector<std::pair<std::size_t, double>> hinges;
  if (n >= 2) {
    for (const Simplex& s : region.simplices(n - 2)) {
      auto idx = k.index_of(s);
      if (!idx) throw ComplexError("region simplex " + s.to_string() + " is not in the layout complex");
      double c = boundary_of_k.contains(s) ? 0.5 : 1.0;
      if (k_zero.contains(s)) c *= 0.5;
      hinges.emplace_back(*idx, c);
    }
    std::sort(hinges.begin(), hinges.end());
  }
  return build(layout, tops, hinges);
}

CurvatureTerms::Values CurvatureTerms::evaluate(const MetricLayout& layout, std::span<const double> z) const {
  Values out;
  const std::size_t size = static_cast<std::size_t>(n_) + 1;
  std::vector<TopSimplexGeometry> geo;
  geo.reserve(tops_.size());
  for (std::size_t t : tops_) {
    geo.push_back(top_simplex_geometry(layout.pair_positions(n_, t), size, z));
    out.volume += geo.back().volume;
  }
  for (const Hinge& h : hinges_) {
    double angles = 0.0;
    for (std::uint32_t w = h.wedge_begin; w < h.wedge_end; ++w) {
      const Wedge& wedge = wedges_[w];
      angles += geo[wedge.top].angle(wedge.a, wedge.b);
    }
    out.curvature += (h.constant - angles) * volume_at(layout, n_ - 2, h.index, z);
  }
  return out;
}

namespace {

void require_metric(const MetricLayout& layout, std::span<const double> z) {
  if (z.size() != layout.edge_count())
    throw ReggeError("metric has " + std::to_string(z.size()) + " entries, complex has " +
                     std::to_string(layout.edge_count()) + " edges");
  if (!is_metric(layout, z)) {
    auto bad = metric_violations(layout, z);
    throw NotRealizableError("metric is outside the cone; first violation at " +
                             (bad.empty() ? std::string("?") : bad.front().to_string()));
  }
}

}  // namespace

double total_volume(const MetricLayout& layout, std::span<const double> z) {
  require_metric(layout, z);
  const int n = layout.dimension();
  double v = 0.0;
  for (std::size_t i = 0; i < layout.complex().count(n); ++i) v += volume_at(layout, n, i, z);
  return v;
}

double deficit(const MetricLayout& layout, const Simplex& sigma_n2, std::span<const double> z) {
  const SimplicialComplex& k = layout.complex();
  const int n = k.dimension();
  if (n < 2 || sigma_n2.dimension() != n - 2)
    throw ComplexError("deficit needs an (n-2)-simplex, got " + sigma_n2.to_string());
  if (!k.contains(sigma_n2)) throw ComplexError(sigma_n2.to_string() + " is not in the complex");
  double d = boundary_complex(k).contains(sigma_n2) ? 0.5 : 1.0;
  for (std::size_t t : k.cofaces(sigma_n2, n)) d -= dihedral_angle(layout, sigma_n2, k.simplices(n)[t], z);
  return d;
}

double regge_curvature(const MetricLayout& layout, std::span<const double> z) {
  require_metric(layout, z);
  return CurvatureTerms::whole(layout).evaluate(layout, z).curvature;
}

double hilbert_action(const MetricLayout& layout, std::span<const double> z, const HilbertParams& p) {
  require_metric(layout, z);
  auto v = CurvatureTerms::whole(layout).evaluate(layout, z);
  return p.gamma * v.curvature + p.lambda * v.volume;
}

ReflectedGeometry::ReflectedGeometry(SimplicialComplex k, const Reflection& refl) : refl_(refl) {
  EdgeOrdering order = canonical_edge_order(k, refl);
  std::vector<Simplex> half_edges(order.edges().begin(),
                                  order.edges().begin() + static_cast<std::ptrdiff_t>(order.half_size()));
  const SimplicialComplex boundary = boundary_complex(k);
  full_ = MetricLayout(std::move(k), std::move(order));
  half_ = MetricLayout(refl_.k_plus(), EdgeOrdering::from_edges(std::move(half_edges)));
  whole_ = CurvatureTerms::whole(full_);
  plus_ = CurvatureTerms::half(full_, refl_.k_plus(), refl_.k_zero(), boundary);
  minus_ = CurvatureTerms::half(full_, refl_.k_minus(), refl_.k_zero(), boundary);
  half_terms_ = CurvatureTerms::half(half_, refl_.k_plus(), refl_.k_zero(), boundary);
}

CurvatureTerms::Values ReflectedGeometry::half_values(std::span<const double> z_plus) const {
  return half_terms_.evaluate(half_, z_plus.first(half_size()));
}

void ReflectedGeometry::mirror_half(std::span<const double> z, std::span<double> out) const {
  const auto& order = ordering();
  for (std::size_t i = 0; i < order.half_size(); ++i) out[i] = z[order.theta(i)];
}

std::vector<double> ReflectedGeometry::pullback(std::span<const double> z) const {
  return theta_pullback(z, ordering());
}

ActionBreakdown split_action(const ReflectedGeometry& geom, std::span<const double> z,
                             const HilbertParams& p) {
  require_metric(geom.full(), z);
  ActionBreakdown b;
  auto all = geom.whole_terms().evaluate(geom.full(), z);
  auto plus = geom.plus_terms().evaluate(geom.full(), z);
  auto minus = geom.minus_terms().evaluate(geom.full(), z);
  b.R = all.curvature;
  b.V = all.volume;
  b.R_plus = plus.curvature;
  b.V_plus = plus.volume;
  b.R_minus = minus.curvature;
  b.V_minus = minus.volume;
  b.H = p.gamma * b.R + p.lambda * b.V;
  b.H_plus = p.gamma * b.R_plus + p.lambda * b.V_plus;
  b.H_minus = p.gamma * b.R_minus + p.lambda * b.V_minus;
  return b;
}

std::vector<double> theta_pullback(std::span<const double> z, const EdgeOrdering& order) {
  if (z.size() != order.size()) throw ReggeError("metric size does not match the edge ordering");
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[order.theta(i)];
  return out;
}

namespace {

double curvature_at(const CurvatureTerms& terms, const MetricLayout& layout, std::span<const double> z) {
  return terms.evaluate(layout, z).curvature;
}

}  // namespace

double central_difference_R(const MetricLayout& layout, std::span<const double> z, std::size_t e,
                            double h) {
  auto terms = CurvatureTerms::whole(layout);
  std::vector<double> w(z.begin(), z.end());
  w[e] = z[e] + h;
  const double up = curvature_at(terms, layout, w);
  w[e] = z[e] - h;
  const double down = curvature_at(terms, layout, w);
  return (up - down) / (2.0 * h);
}

GradientResult grad_R(const MetricLayout& layout, std::span<const double> z, double step) {
  require_metric(layout, z);
  if (!(step > 0.0)) throw ReggeError("gradient step must be positive");
  const auto terms = CurvatureTerms::whole(layout);
  const std::size_t m = z.size();
  GradientResult out;
  out.gradient.assign(m, 0.0);
  out.step_used.assign(m, 0.0);
  out.flagged.assign(m, false);
  std::vector<double> w(z.begin(), z.end());
  constexpr int kMaxHalvings = 30;

  auto stencil_ok = [&](std::size_t e, double h) {
    for (double s : {h, -h}) {
      w[e] = z[e] + s;
      if (!is_metric_fast(layout, w)) {
        w[e] = z[e];
        return false;
      }
    }
    w[e] = z[e];
    return true;
  };
  auto difference = [&](std::size_t e, double h) {
    w[e] = z[e] + h;
    const double up = curvature_at(terms, layout, w);
    w[e] = z[e] - h;
    const double down = curvature_at(terms, layout, w);
    w[e] = z[e];
    return (up - down) / (2.0 * h);
  };

  for (std::size_t e = 0; e < m; ++e) {
    double h = step * z[e];
    int halvings = 0;
    while (!stencil_ok(e, h) && halvings < kMaxHalvings) {
      h *= 0.5;
      ++halvings;
    }
    if (halvings == kMaxHalvings) {
      out.flagged[e] = true;
      out.gradient[e] = std::nan("");
      continue;
    }
    const double coarse = difference(e, h);
    const double fine = difference(e, 0.5 * h);
    out.gradient[e] = (4.0 * fine - coarse) / 3.0;
    out.step_used[e] = h;
  }
  return out;
}

}  // namespace regge
