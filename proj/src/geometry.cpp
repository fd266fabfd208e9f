#include "regge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "regge/error.hpp"

namespace regge {

std::string to_string(CutoffNorm norm) {
  return norm == CutoffNorm::supremum ? "sup" : "l2";
}

CutoffNorm parse_cutoff_norm(const std::string& text) {
  if (text == "sup" || text == "supremum") return CutoffNorm::supremum;
  if (text == "l2" || text == "euclidean") return CutoffNorm::euclidean;
  throw ReggeError("unknown norm '" + text + "' (expected sup or l2)");
}

MetricLayout::MetricLayout(SimplicialComplex k)
    : MetricLayout(k, EdgeOrdering::lexicographic(k)) {}

MetricLayout::MetricLayout(SimplicialComplex k, EdgeOrdering order)
    : complex_(std::move(k)), order_(std::move(order)) {
  const int n = complex_.dimension();
  if (n > kMaxSimplexDim)
    throw ComplexError("complex dimension " + std::to_string(n) + " exceeds supported maximum " +
                       std::to_string(kMaxSimplexDim));
  if (order_.size() != complex_.count(1))
    throw ComplexError("edge ordering does not match the complex");
  pairs_.resize(static_cast<std::size_t>(std::max(n + 1, 0)));
  pairs_per_simplex_.resize(pairs_.size());
  for (int d = 0; d <= n; ++d) {
    const std::size_t m = static_cast<std::size_t>(d) + 1;
    const std::size_t per = m * (m - 1) / 2;
    pairs_per_simplex_[d] = per;
    auto& flat = pairs_[d];
    flat.reserve(per * complex_.count(d));
    for (const Simplex& s : complex_.simplices(d)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          auto pos = order_.position(s[i], s[j]);
          if (!pos) throw ComplexError("edge {" + std::to_string(s[i]) + "," + std::to_string(s[j]) +
                                       "} missing from ordering");
          flat.push_back(static_cast<std::uint32_t>(*pos));
        }
      }
    }
  }
  for (const Simplex& s : complex_.maximal_simplices())
    if (s.dimension() >= 1) maximal_.push_back({s.dimension(), *complex_.index_of(s)});
}

std::span<const std::uint32_t> MetricLayout::pair_positions(int k, std::size_t index) const {
  const std::size_t per = pairs_per_simplex_[static_cast<std::size_t>(k)];
  return std::span<const std::uint32_t>(pairs_[static_cast<std::size_t>(k)]).subspan(index * per, per);
}

double local_squared_length(std::span<const std::uint32_t> pairs, std::size_t size, std::size_t i,
                            std::size_t j, std::span<const double> z) {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  const std::size_t idx = i * size - i * (i + 1) / 2 + (j - i - 1);
  return z[pairs[idx]];
}

GramMatrix gram_from_pairs(std::span<const std::uint32_t> pairs, std::size_t size,
                           std::span<const double> z, std::size_t base) {
  const int k = static_cast<int>(size) - 1;
  GramMatrix a(k, k);
  std::size_t others[kMaxSimplexDim + 1];
  for (std::size_t i = 0, r = 0; i < size; ++i)
    if (i != base) others[r++] = i;
  for (int r = 0; r < k; ++r) {
    const double zr = local_squared_length(pairs, size, base, others[r], z);
    a(r, r) = zr;
    for (int s = r + 1; s < k; ++s) {
      const double zs = local_squared_length(pairs, size, base, others[s], z);
      const double zrs = local_squared_length(pairs, size, others[r], others[s], z);
      a(r, s) = a(s, r) = 0.5 * (zr + zs - zrs);
    }
  }
  return a;
}

namespace {

struct SimplexRef {
  int k;
  std::size_t index;
};

SimplexRef locate(const MetricLayout& layout, const Simplex& sigma) {
  auto idx = layout.complex().index_of(sigma);
  if (!idx) throw ComplexError("simplex " + sigma.to_string() + " is not in the complex (missing edges)");
  return {sigma.dimension(), *idx};
}

double determinant(const GramMatrix& a) {
  switch (a.rows()) {
    case 0: return 1.0;
    case 1: return a(0, 0);
    case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    default: return a.partialPivLu().determinant();
  }
}

double max_entry(std::span<const std::uint32_t> pairs, std::span<const double> z) {
  double m = 0.0;
  for (auto p : pairs) m = std::max(m, z[p]);
  return m;
}

double floor_for(int k, double scale) { return kRealizabilityEps * std::pow(scale, k); }

}  // namespace

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

GramMatrix gram_matrix(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z,
                       Vertex base_vertex) {
  if (sigma.dimension() < 1) throw ComplexError("Gram matrix needs a simplex of dimension >= 1");
  auto base = sigma.local_index(base_vertex);
  if (!base) throw ComplexError("base vertex not in simplex " + sigma.to_string());
  auto ref = locate(layout, sigma);
  return gram_from_pairs(layout.pair_positions(ref.k, ref.index), sigma.size(), z, *base);
}

double gram_det(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z) {
  return gram_det(layout, sigma, z, sigma[0]);
}

double gram_det(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z,
                Vertex base_vertex) {
  if (sigma.dimension() == 0) return 1.0;
  return determinant(gram_matrix(layout, sigma, z, base_vertex));
}

double gram_det_at(const MetricLayout& layout, int k, std::size_t index, std::span<const double> z) {
  if (k == 0) return 1.0;
  return determinant(gram_from_pairs(layout.pair_positions(k, index), static_cast<std::size_t>(k) + 1, z));
}

double volume_at(const MetricLayout& layout, int k, std::size_t index, std::span<const double> z) {
  if (k == 0) return 1.0;
  auto pairs = layout.pair_positions(k, index);
  const double det = gram_det_at(layout, k, index, z);
  if (!(det > floor_for(k, max_entry(pairs, z))))
    throw NotRealizableError("simplex " + layout.complex().simplices(k)[index].to_string() +
                             " is not realizable (det A = " + std::to_string(det) + ")");
  return std::sqrt(det) / factorial(k);
}

double simplex_volume(const MetricLayout& layout, const Simplex& sigma, std::span<const double> z) {
  auto ref = locate(layout, sigma);
  return volume_at(layout, ref.k, ref.index, z);
}

std::vector<Simplex> metric_violations(const MetricLayout& layout, std::span<const double> z) {
  std::vector<Simplex> bad;
  for (int k = 1; k <= layout.dimension(); ++k) {
    auto level = layout.complex().simplices(k);
    for (std::size_t i = 0; i < level.size(); ++i) {
      const double det = gram_det_at(layout, k, i, z);
      if (!(det > floor_for(k, max_entry(layout.pair_positions(k, i), z)))) bad.push_back(level[i]);
    }
  }
  return bad;
}

bool is_metric(const MetricLayout& layout, std::span<const double> z) {
  if (z.size() != layout.edge_count()) return false;
  for (int k = 1; k <= layout.dimension(); ++k) {
    const std::size_t count = layout.complex().count(k);
    for (std::size_t i = 0; i < count; ++i) {
      const double det = gram_det_at(layout, k, i, z);
      if (!(det > floor_for(k, max_entry(layout.pair_positions(k, i), z)))) return false;
    }
  }
  return true;
}

bool is_metric_fast(const MetricLayout& layout, std::span<const double> z) {
  if (z.size() != layout.edge_count()) return false;
  // Only maximal simplexes need a chain; their faces are implied.
  for (auto [d, i] : layout.maximal()) {
    const std::size_t size = static_cast<std::size_t>(d) + 1;
    {
      auto pairs = layout.pair_positions(d, i);
      GramMatrix a = gram_from_pairs(pairs, size, z, 0);
      // Leading minor m = det A(τ^m) for the chain τ^m = {v_0, ..., v_m}.
      double minor = 1.0;
      double scale = 0.0;
      for (int m = 0; m < d; ++m) {
        for (int r = 0; r <= m; ++r)
          scale = std::max(scale, local_squared_length(pairs, size, r, m + 1, z));
        const double pivot = a(m, m);
        minor *= pivot;
        if (!(pivot > 0.0) || !(minor > floor_for(m + 1, scale))) return false;
        for (int r = m + 1; r < d; ++r) {
          const double f = a(r, m) / pivot;
          for (int c = m + 1; c < d; ++c) a(r, c) -= f * a(m, c);
        }
      }
    }
  }
  return true;
}

double half_norm(std::span<const double> z, const EdgeOrdering& order, bool plus, CutoffNorm norm) {
  const std::size_t begin = plus ? 0 : order.zero_begin();
  const std::size_t end = plus ? order.half_size() : order.size();
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    if (norm == CutoffNorm::supremum)
      acc = std::max(acc, std::abs(z[i]));
    else
      acc += z[i] * z[i];
  }
  return norm == CutoffNorm::supremum ? acc : std::sqrt(acc);
}

bool meets_cutoff_determinants(const MetricLayout& layout, std::span<const double> z, double kappa) {
  const double floor = 1.0 / kappa;
  for (double v : z)
    if (!(v >= floor)) return false;
  for (int k = 2; k <= layout.dimension(); ++k) {
    const std::size_t count = layout.complex().count(k);
    for (std::size_t i = 0; i < count; ++i)
      if (!(gram_det_at(layout, k, i, z) >= floor)) return false;
  }
  return true;
}

bool in_cutoff(const MetricLayout& layout, std::span<const double> z, const CutoffSpec& cut) {
  const auto& order = layout.edges();
  if (!order.has_reflection())
    throw ComplexError("in_cutoff needs an edge ordering built from a reflection");
  if (z.size() != layout.edge_count()) return false;
  if (half_norm(z, order, true, cut.norm) > cut.kappa) return false;
  if (half_norm(z, order, false, cut.norm) > cut.kappa) return false;
  return meets_cutoff_determinants(layout, z, cut.kappa);
}

TopSimplexGeometry top_simplex_geometry(std::span<const std::uint32_t> pairs, std::size_t size,
                                        std::span<const double> z) {
  const int n = static_cast<int>(size) - 1;
  TopSimplexGeometry out;
  GramMatrix a = gram_from_pairs(pairs, size, z, 0);
  Eigen::LLT<GramMatrix> llt(a);
  const double floor = floor_for(n, max_entry(pairs, z));
  if (llt.info() != Eigen::Success)
    throw NotRealizableError("simplex Gram matrix is not positive definite");
  GramMatrix l = llt.matrixL();
  double root_det = 1.0;
  for (int i = 0; i < n; ++i) root_det *= l(i, i);
  if (!(root_det * root_det > floor))
    throw NotRealizableError("simplex is degenerate (det A below realizability floor)");
  out.volume = root_det / factorial(n);

  // Rows of L are the vertex coordinates; the barycentric gradients of
  // vertices 1..n are the columns of L^{-1}, and that of vertex 0 is minus
  // their sum. Outward facet normals are the negated gradients.
  GramMatrix identity = GramMatrix::Identity(n, n);
  GramMatrix linv = l.triangularView<Eigen::Lower>().solve(identity);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxSimplexDim, kMaxSimplexDim + 1> g(n, n + 1);
  g.col(0) = -linv.rowwise().sum();
  g.rightCols(n) = linv;
  auto gram = (g.transpose() * g).eval();

  out.angle.setZero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      double c = gram(i, j) / std::sqrt(gram(i, i) * gram(j, j));
      if (std::abs(c) > 1.0 + 1e-9)
        throw NotRealizableError("normal inner product " + std::to_string(c) + " outside [-1, 1]");
      c = std::clamp(c, -1.0, 1.0);
      out.angle(i, j) = out.angle(j, i) = 0.5 - std::acos(c) / (2.0 * std::numbers::pi);
    }
  }
  return out;
}

double dihedral_angle(const MetricLayout& layout, const Simplex& sigma_n2, const Simplex& sigma_n,
                      std::span<const double> z) {
  if (sigma_n.dimension() < 2 || sigma_n2.dimension() != sigma_n.dimension() - 2 ||
      !sigma_n2.is_face_of(sigma_n))
    throw ComplexError("dihedral angle needs a codimension-2 face: " + sigma_n2.to_string() + " in " +
                       sigma_n.to_string());
  auto ref = locate(layout, sigma_n);
  std::size_t opposite[2];
  std::size_t found = 0;
  for (std::size_t i = 0; i < sigma_n.size(); ++i)
    if (!sigma_n2.contains(sigma_n[i])) opposite[found++] = i;
  auto geo = top_simplex_geometry(layout.pair_positions(ref.k, ref.index), sigma_n.size(), z);
  return geo.angle(static_cast<Eigen::Index>(opposite[0]), static_cast<Eigen::Index>(opposite[1]));
}

}  // namespace regge
