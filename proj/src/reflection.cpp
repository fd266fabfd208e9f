#include "regge/reflection.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "regge/error.hpp"

namespace regge {

Automorphism::Automorphism(std::map<Vertex, Vertex> mapping) {
  for (auto [from, to] : mapping) {
    if (from < 0 || to < 0) throw ComplexError("negative vertex id in permutation");
    if (from != to) mapping_.emplace(from, to);
  }
}

Vertex Automorphism::operator()(Vertex v) const {
  auto it = mapping_.find(v);
  return it == mapping_.end() ? v : it->second;
}

Simplex Automorphism::operator()(const Simplex& s) const {
  std::vector<Vertex> image;
  image.reserve(s.size());
  for (Vertex v : s.vertices()) image.push_back((*this)(v));
  return Simplex(std::move(image));
}

SimplicialComplex Automorphism::apply(const SimplicialComplex& k) const {
  std::vector<Simplex> gens;
  for (const Simplex& s : k.maximal_simplices()) gens.push_back((*this)(s));
  return SimplicialComplex::closure(gens);
}

std::string to_string(ReflectionCheck check) {
  switch (check) {
    case ReflectionCheck::not_pseudomanifold: return "complex is not a pseudomanifold";
    case ReflectionCheck::not_automorphism: return "theta is not an automorphism of K";
    case ReflectionCheck::not_involution: return "theta is not an involution";
    case ReflectionCheck::identity: return "theta is the identity";
    case ReflectionCheck::k_plus_not_subcomplex: return "K_+ is not a subcomplex of K";
    case ReflectionCheck::halves_not_pseudomanifolds: return "K_+ and K_- must be n-pseudomanifolds";
    case ReflectionCheck::halves_not_exchanged: return "theta must exchange K_+ and K_-";
    case ReflectionCheck::k_zero_invalid: return "K_0 must be a nonempty (n-1)-pseudomanifold";
    case ReflectionCheck::not_fixed_on_k_zero: return "theta must be the identity on K_0";
    case ReflectionCheck::gluing_mismatch: return "K must be the gluing of K_+ and K_- along K_0";
  }
  return "unknown";
}

bool ReflectionReport::failed(ReflectionCheck check) const {
  return std::any_of(failures.begin(), failures.end(),
                     [&](const ReflectionFailure& f) { return f.check == check; });
}

const Reflection& ReflectionReport::value() const {
  if (!ok()) {
    std::ostringstream os;
    os << "invalid reflection:";
    for (const auto& f : failures) {
      os << "\n  ";
      if (f.bullet) os << "[bullet " << f.bullet << "] ";
      os << to_string(f.check) << ": " << f.detail;
    }
    throw ComplexError(os.str());
  }
  return *reflection;
}

namespace {

std::string describe_pm(const PseudomanifoldReport& pm) {
  std::string out;
  for (const auto& v : pm.violations) {
    if (!out.empty()) out += "; ";
    out += "condition " + std::to_string(v.condition) + ": " + v.detail;
  }
  return out;
}

}  // namespace

ReflectionReport verify_reflection(const SimplicialComplex& k, const Automorphism& theta,
                                   const SimplicialComplex& k_plus) {
  ReflectionReport report;
  auto fail = [&](ReflectionCheck c, int bullet, std::string detail) {
    report.failures.push_back({c, bullet, std::move(detail)});
  };
  const int n = k.dimension();

  if (auto pm = is_pseudomanifold(k); !pm.ok())
    fail(ReflectionCheck::not_pseudomanifold, 0, describe_pm(pm));

  // theta must permute the vertex set and map simplexes to simplexes.
  const auto verts = k.vertex_ids();
  const std::set<Vertex> vset(verts.begin(), verts.end());
  std::set<Vertex> images;
  for (auto [from, to] : theta.mapping()) {
    if (!vset.contains(from) || !vset.contains(to)) {
      fail(ReflectionCheck::not_automorphism, 0,
           "permutation moves " + std::to_string(from) + " -> " + std::to_string(to) +
               " outside the vertex set");
    }
  }
  for (Vertex v : verts) images.insert(theta(v));
  if (images != vset) fail(ReflectionCheck::not_automorphism, 0, "vertex map is not a bijection");
  if (!report.failures.empty() && report.failed(ReflectionCheck::not_automorphism)) return report;
  for (int d = 0; d <= n; ++d) {
    for (const Simplex& s : k.simplices(d)) {
      if (!k.contains(theta(s))) {
        fail(ReflectionCheck::not_automorphism, 0,
             "image of " + s.to_string() + " is " + theta(s).to_string() + ", not a simplex of K");
        return report;
      }
    }
  }

  for (Vertex v : verts) {
    if (theta(theta(v)) != v) {
      fail(ReflectionCheck::not_involution, 0,
           "theta(theta(" + std::to_string(v) + ")) = " + std::to_string(theta(theta(v))));
      break;
    }
  }
  if (std::all_of(verts.begin(), verts.end(), [&](Vertex v) { return theta(v) == v; }))
    fail(ReflectionCheck::identity, 0, "theta fixes every vertex");

  if (k_plus.empty() || !k_plus.is_subcomplex_of(k)) {
    fail(ReflectionCheck::k_plus_not_subcomplex, 0,
         k_plus.empty() ? "K_+ is empty" : "K_+ contains simplexes not in K");
    return report;
  }

  SimplicialComplex k_minus = theta.apply(k_plus);
  SimplicialComplex k_zero = intersection(k_plus, k_minus);

  // Bullet 1.
  const std::pair<const char*, const SimplicialComplex*> halves[] = {{"K_+", &k_plus}, {"K_-", &k_minus}};
  for (auto [name, half] : halves) {
    auto pm = is_pseudomanifold(*half);
    if (half->dimension() != n)
      fail(ReflectionCheck::halves_not_pseudomanifolds, 1,
           std::string(name) + " has dimension " + std::to_string(half->dimension()));
    else if (!pm.ok())
      fail(ReflectionCheck::halves_not_pseudomanifolds, 1, std::string(name) + ": " + describe_pm(pm));
  }

  // Bullet 2: K_- = θ K_+ by construction, so check θ K_- = K_+.
  if (!(theta.apply(k_minus) == k_plus))
    fail(ReflectionCheck::halves_not_exchanged, 2, "theta(K_-) differs from K_+");

  // Bullet 3.
  if (k_zero.empty()) {
    fail(ReflectionCheck::k_zero_invalid, 3, "K_0 is empty");
  } else if (k_zero.dimension() != n - 1) {
    fail(ReflectionCheck::k_zero_invalid, 3,
         "K_0 has dimension " + std::to_string(k_zero.dimension()) + ", expected " +
             std::to_string(n - 1));
  } else if (auto pm = is_pseudomanifold(k_zero); !pm.ok()) {
    fail(ReflectionCheck::k_zero_invalid, 3, describe_pm(pm));
  }

  // Bullet 4.
  for (Vertex v : k_zero.vertex_ids()) {
    if (theta(v) != v) {
      fail(ReflectionCheck::not_fixed_on_k_zero, 4,
           "vertex " + std::to_string(v) + " of K_0 is moved to " + std::to_string(theta(v)));
      break;
    }
  }

  // Bullet 5: as subcomplexes of K the gluing is the union; the shared part
  // is exactly K_0 by construction.
  if (!(union_of(k_plus, k_minus) == k))
    fail(ReflectionCheck::gluing_mismatch, 5, "K_+ ∪ K_- does not cover K");

  if (!report.failures.empty()) return report;

  auto touching = intersection(k_zero, boundary_complex(k));
  if (!touching.empty())
    report.notes.push_back("K_0 meets the boundary of K in " + std::to_string(touching.total_count()) +
                           " simplexes");

  Reflection refl;
  refl.theta_ = theta;
  refl.k_plus_ = k_plus;
  refl.k_minus_ = std::move(k_minus);
  refl.k_zero_ = std::move(k_zero);
  report.reflection = std::move(refl);
  return report;
}

DoubledComplex double_complex(const SimplicialComplex& k_prime,
                              const SimplicialComplex& k_prime_zero) {
  if (auto pm = is_pseudomanifold(k_prime); !pm.ok())
    throw ComplexError("K' is not a pseudomanifold: " + describe_pm(pm));
  const SimplicialComplex boundary = boundary_complex(k_prime);
  if (boundary.empty()) throw ComplexError("K' has empty boundary");
  if (k_prime_zero.empty()) throw ComplexError("K'_0 is empty");
  if (!k_prime_zero.is_subcomplex_of(boundary))
    throw ComplexError("K'_0 is not contained in the boundary of K'");

  const auto zero_verts = k_prime_zero.vertex_ids();
  const std::set<Vertex> zset(zero_verts.begin(), zero_verts.end());
  // Identifying vertices must not identify anything beyond K'_0.
  for (int d = 1; d <= k_prime.dimension(); ++d) {
    for (const Simplex& s : k_prime.simplices(d)) {
      bool inside = std::all_of(s.vertices().begin(), s.vertices().end(),
                                [&](Vertex v) { return zset.contains(v); });
      if (inside && !k_prime_zero.contains(s))
        throw ComplexError("K'_0 is not an induced subcomplex: " + s.to_string() +
                           " spans K'_0 vertices but is not in K'_0");
    }
  }

  DoubledComplex out;
  const auto verts = k_prime.vertex_ids();
  out.offset = verts.back() + 1;
  std::map<Vertex, Vertex> swap;
  for (Vertex v : verts) {
    Vertex c = zset.contains(v) ? v : v + out.offset;
    out.copy_of.emplace(v, c);
    if (c != v) {
      swap.emplace(v, c);
      swap.emplace(c, v);
    }
  }
  out.theta = Automorphism(std::move(swap));
  out.k_plus = k_prime;
  out.complex = union_of(k_prime, out.theta.apply(k_prime));
  out.verification = verify_reflection(out.complex, out.theta, out.k_plus);
  return out;
}

EdgeOrdering EdgeOrdering::lexicographic(const SimplicialComplex& k) {
  EdgeOrdering o;
  auto edges = k.simplices(1);
  o.edges_.assign(edges.begin(), edges.end());
  for (std::size_t i = 0; i < o.edges_.size(); ++i) {
    o.index_.emplace(o.edges_[i], i);
    o.theta_.push_back(i);
  }
  o.plus_ = o.edges_.size();
  return o;
}

EdgeOrdering EdgeOrdering::from_edges(std::vector<Simplex> edges) {
  EdgeOrdering o;
  o.edges_ = std::move(edges);
  for (std::size_t i = 0; i < o.edges_.size(); ++i) {
    if (o.edges_[i].dimension() != 1) throw ComplexError(o.edges_[i].to_string() + " is not an edge");
    if (!o.index_.emplace(o.edges_[i], i).second)
      throw ComplexError("duplicate edge " + o.edges_[i].to_string());
    o.theta_.push_back(i);
  }
  o.plus_ = o.edges_.size();
  return o;
}

std::optional<std::size_t> EdgeOrdering::position(const Simplex& edge) const {
  auto it = index_.find(edge);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> EdgeOrdering::position(Vertex a, Vertex b) const {
  if (a == b || a < 0 || b < 0) return std::nullopt;
  return position(Simplex{a, b});
}

EdgeOrdering canonical_edge_order(const SimplicialComplex& k, const Reflection& refl) {
  EdgeOrdering o;
  std::vector<Simplex> plus, zero;
  for (const Simplex& e : refl.k_plus().simplices(1)) {
    (refl.k_zero().contains(e) ? zero : plus).push_back(e);
  }
  o.edges_ = plus;
  o.edges_.insert(o.edges_.end(), zero.begin(), zero.end());
  for (const Simplex& e : plus) o.edges_.push_back(refl.theta()(e));
  if (o.edges_.size() != k.count(1))
    throw ComplexError("reflection halves do not account for every edge of K");

  o.plus_ = plus.size();
  o.zero_ = zero.size();
  o.minus_ = plus.size();
  o.reflected_ = true;
  o.theta_.resize(o.edges_.size());
  for (std::size_t i = 0; i < o.plus_; ++i) {
    o.theta_[i] = o.minus_begin() + i;
    o.theta_[o.minus_begin() + i] = i;
  }
  for (std::size_t i = o.zero_begin(); i < o.minus_begin(); ++i) o.theta_[i] = i;
  for (std::size_t i = 0; i < o.edges_.size(); ++i) {
    if (!o.index_.emplace(o.edges_[i], i).second)
      throw ComplexError("duplicate edge in canonical ordering: " + o.edges_[i].to_string());
  }
  return o;
}

}  // namespace regge
