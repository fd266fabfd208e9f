#include "regge/complex.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "regge/error.hpp"

namespace regge {

Simplex::Simplex(std::vector<Vertex> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw ComplexError("simplex must have at least one vertex");
  std::sort(vertices_.begin(), vertices_.end());
  if (vertices_.front() < 0) throw ComplexError("negative vertex id in simplex " + to_string());
  if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
    throw ComplexError("repeated vertex id in simplex " + to_string());
}

bool Simplex::contains(Vertex v) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

bool Simplex::is_face_of(const Simplex& other) const {
  return std::includes(other.vertices_.begin(), other.vertices_.end(), vertices_.begin(),
                       vertices_.end());
}

Simplex Simplex::without(std::size_t i) const {
  if (vertices_.size() < 2) throw ComplexError("a vertex has no facets");
  Simplex out;
  out.vertices_.reserve(vertices_.size() - 1);
  for (std::size_t j = 0; j < vertices_.size(); ++j)
    if (j != i) out.vertices_.push_back(vertices_[j]);
  return out;
}

std::optional<std::size_t> Simplex::local_index(Vertex v) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
  if (it == vertices_.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - vertices_.begin());
}

std::string Simplex::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < vertices_.size(); ++i) os << (i ? "," : "") << vertices_[i];
  os << '}';
  return os.str();
}

std::size_t SimplexHash::operator()(const Simplex& s) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (Vertex v : s.vertices()) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

SimplicialComplex SimplicialComplex::closure(const std::vector<Simplex>& generators) {
  std::unordered_set<Simplex, SimplexHash> all;
  std::vector<Vertex> buf;
  for (const Simplex& g : generators) {
    if (all.contains(g)) continue;
    const std::size_t m = g.size();
    if (m > 20) throw ComplexError("simplex dimension too large: " + g.to_string());
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      buf.clear();
      for (std::size_t j = 0; j < m; ++j)
        if (mask & (1u << j)) buf.push_back(g[j]);
      all.emplace(buf);
    }
  }

  SimplicialComplex k;
  int top = -1;
  for (const Simplex& s : all) top = std::max(top, s.dimension());
  k.by_dim_.resize(static_cast<std::size_t>(top + 1));
  for (const Simplex& s : all) k.by_dim_[static_cast<std::size_t>(s.dimension())].push_back(s);
  for (auto& level : k.by_dim_) {
    std::sort(level.begin(), level.end());
    for (std::size_t i = 0; i < level.size(); ++i) k.index_.emplace(level[i], i);
  }
  return k;
}

std::span<const Simplex> SimplicialComplex::simplices(int k) const {
  if (k < 0 || k > dimension()) return {};
  return by_dim_[static_cast<std::size_t>(k)];
}

std::optional<std::size_t> SimplicialComplex::index_of(const Simplex& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Vertex> SimplicialComplex::vertex_ids() const {
  std::vector<Vertex> out;
  for (const Simplex& s : simplices(0)) out.push_back(s[0]);
  return out;
}

std::vector<Simplex> SimplicialComplex::maximal_simplices() const {
  std::vector<Simplex> out;
  for (int k = 0; k <= dimension(); ++k) {
    for (const Simplex& s : simplices(k)) {
      bool maximal = true;
      for (const Simplex& t : simplices(k + 1)) {
        if (s.is_face_of(t)) {
          maximal = false;
          break;
        }
      }
      if (maximal) out.push_back(s);
    }
  }
  return out;
}

std::vector<std::size_t> SimplicialComplex::cofaces(const Simplex& s, int k) const {
  std::vector<std::size_t> out;
  auto level = simplices(k);
  for (std::size_t i = 0; i < level.size(); ++i)
    if (s.is_face_of(level[i])) out.push_back(i);
  return out;
}

bool SimplicialComplex::is_subcomplex_of(const SimplicialComplex& other) const {
  for (const auto& level : by_dim_)
    for (const Simplex& s : level)
      if (!other.contains(s)) return false;
  return true;
}

SimplicialComplex build_complex(const std::vector<std::vector<Vertex>>& maximal_simplexes) {
  if (maximal_simplexes.empty()) throw ComplexError("complex needs at least one simplex");
  std::vector<Simplex> gens;
  gens.reserve(maximal_simplexes.size());
  for (const auto& list : maximal_simplexes) gens.emplace_back(list);
  return SimplicialComplex::closure(gens);
}

SimplicialComplex intersection(const SimplicialComplex& a, const SimplicialComplex& b) {
  std::vector<Simplex> common;
  for (int k = 0; k <= a.dimension(); ++k)
    for (const Simplex& s : a.simplices(k))
      if (b.contains(s)) common.push_back(s);
  return SimplicialComplex::closure(common);
}

SimplicialComplex union_of(const SimplicialComplex& a, const SimplicialComplex& b) {
  std::vector<Simplex> gens = a.maximal_simplices();
  auto more = b.maximal_simplices();
  gens.insert(gens.end(), more.begin(), more.end());
  return SimplicialComplex::closure(gens);
}

namespace {

// Number of n-cofaces per (n-1)-simplex, keyed by index among (n-1)-simplexes.
std::vector<std::vector<std::size_t>> facet_cofaces(const SimplicialComplex& k) {
  const int n = k.dimension();
  std::vector<std::vector<std::size_t>> out(k.count(n - 1));
  auto tops = k.simplices(n);
  for (std::size_t t = 0; t < tops.size(); ++t) {
    for (std::size_t j = 0; j < tops[t].size(); ++j) {
      auto idx = k.index_of(tops[t].without(j));
      out[*idx].push_back(t);
    }
  }
  return out;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

SimplicialComplex boundary_complex(const SimplicialComplex& k) {
  const int n = k.dimension();
  if (n < 1) return {};
  std::vector<Simplex> free_facets;
  auto cof = facet_cofaces(k);
  auto facets = k.simplices(n - 1);
  for (std::size_t i = 0; i < facets.size(); ++i)
    if (cof[i].size() == 1) free_facets.push_back(facets[i]);
  return SimplicialComplex::closure(free_facets);
}

PseudomanifoldReport is_pseudomanifold(const SimplicialComplex& k) {
  PseudomanifoldReport report;
  if (k.empty()) {
    report.violations.push_back({0, "empty complex"});
    return report;
  }
  const int n = k.dimension();

  for (const Simplex& s : k.maximal_simplices()) {
    if (s.dimension() != n)
      report.violations.push_back(
          {1, "simplex " + s.to_string() + " is not a face of any " + std::to_string(n) + "-simplex"});
  }

  if (n >= 1) {
    auto cof = facet_cofaces(k);
    auto facets = k.simplices(n - 1);
    for (std::size_t i = 0; i < facets.size(); ++i) {
      if (cof[i].size() > 2)
        report.violations.push_back({2, "(n-1)-simplex " + facets[i].to_string() + " lies in " +
                                            std::to_string(cof[i].size()) + " n-simplexes"});
    }
    UnionFind uf(k.count(n));
    for (const auto& c : cof)
      for (std::size_t j = 1; j < c.size(); ++j) uf.unite(c[0], c[j]);
    std::size_t components = 0;
    for (std::size_t t = 0; t < k.count(n); ++t)
      if (uf.find(t) == t) ++components;
    if (components > 1)
      report.violations.push_back(
          {3, "facet-adjacency graph of n-simplexes has " + std::to_string(components) + " components"});
  } else if (k.count(0) > 1) {
    report.violations.push_back({3, "0-dimensional complex with more than one vertex"});
  }
  return report;
}

}  // namespace regge
