#include "regge/io.hpp"

#include <fstream>
#include <sstream>

#include "regge/error.hpp"

namespace regge {

namespace {

[[noreturn]] void field_error(const std::string& origin, const std::string& path, const std::string& what) {
  throw IoError(origin + ": field '" + path + "': " + what);
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw IoError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": invalid JSON (" +
                  e.what() + ")");
  }
}

Vertex vertex_at(const Json& j, const std::string& origin, const std::string& path) {
  if (!j.is_number_integer()) field_error(origin, path, "expected an integer vertex id");
  const auto v = j.get<std::int64_t>();
  if (v < 0) field_error(origin, path, "vertex ids must be non-negative");
  return v;
}

std::vector<std::vector<Vertex>> simplex_list(const Json& j, const std::string& origin, const std::string& path) {
  if (!j.is_array()) field_error(origin, path, "expected an array of vertex lists");
  if (j.empty()) field_error(origin, path, "no simplexes given");
  std::vector<std::vector<Vertex>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].empty()) field_error(origin, p, "expected a nonempty vertex list");
    std::vector<Vertex> s;
    for (std::size_t k = 0; k < j[i].size(); ++k) s.push_back(vertex_at(j[i][k], origin, p + "[" + std::to_string(k) + "]"));
    out.push_back(std::move(s));
  }
  return out;
}

SimplicialComplex complex_at(const Json& j, const std::string& origin, const std::string& path) {
  auto lists = simplex_list(j, origin, path);
  try {
    return build_complex(lists);
  } catch (const ComplexError& e) {
    field_error(origin, path, e.what());
  }
}

Vertex parse_vertex_key(const std::string& key, const std::string& origin, const std::string& path) {
  std::size_t used = 0;
  long long v = -1;
  try {
    v = std::stoll(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || v < 0) field_error(origin, path, "key '" + key + "' is not a vertex id");
  return v;
}

}  // namespace

ComplexFile parse_complex_json(const std::string& text, const std::string& origin) {
  const Json j = parse_json(text, origin);
  if (!j.is_object()) throw IoError(origin + ": expected a JSON object at top level");
  ComplexFile out;
  if (!j.contains("maximal_simplexes")) field_error(origin, "maximal_simplexes", "missing");
  out.complex = complex_at(j["maximal_simplexes"], origin, "maximal_simplexes");
  if (j.contains("n")) {
    if (!j["n"].is_number_integer()) field_error(origin, "n", "expected an integer");
    out.declared_dimension = j["n"].get<int>();
    if (out.declared_dimension != out.complex.dimension())
      field_error(origin, "n",
                  "declared dimension " + std::to_string(out.declared_dimension) + " but the simplexes have dimension " +
                      std::to_string(out.complex.dimension()));
  } else {
    out.declared_dimension = out.complex.dimension();
  }
  if (j.contains("reflection")) {
    const Json& r = j["reflection"];
    if (!r.is_object()) field_error(origin, "reflection", "expected an object");
    if (!r.contains("permutation")) field_error(origin, "reflection.permutation", "missing");
    if (!r.contains("k_plus_maximal")) field_error(origin, "reflection.k_plus_maximal", "missing");
    const Json& perm = r["permutation"];
    if (!perm.is_object()) field_error(origin, "reflection.permutation", "expected an object {vertex: vertex}");
    std::map<Vertex, Vertex> mapping;
    for (const auto& [key, value] : perm.items()) {
      const std::string p = "reflection.permutation." + key;
      mapping[parse_vertex_key(key, origin, p)] = vertex_at(value, origin, p);
    }
    out.theta = Automorphism(std::move(mapping));
    out.k_plus = complex_at(r["k_plus_maximal"], origin, "reflection.k_plus_maximal");
  }
  return out;
}

ComplexFile load_complex_file(const std::filesystem::path& path) {
  return parse_complex_json(read_text(path), path.string());
}

std::vector<double> parse_metric_json(const std::string& text, const EdgeOrdering& order,
                                      const std::string& origin) {
  const Json j = parse_json(text, origin);
  if (!j.is_object() || !j.contains("z")) field_error(origin, "z", "missing");
  const Json& z = j["z"];
  std::vector<double> out(order.size(), 0.0);
  if (z.is_array()) {
    if (z.size() != order.size())
      field_error(origin, "z", "has " + std::to_string(z.size()) + " entries, the complex has " +
                                   std::to_string(order.size()) + " edges");
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!z[i].is_number()) field_error(origin, "z[" + std::to_string(i) + "]", "expected a number");
      out[i] = z[i].get<double>();
    }
    return out;
  }
  if (!z.is_object()) field_error(origin, "z", "expected an object {\"a-b\": value} or an array");
  std::vector<bool> seen(order.size(), false);
  for (const auto& [key, value] : z.items()) {
    const std::string p = "z." + key;
    const auto dash = key.find('-');
    if (dash == std::string::npos) field_error(origin, p, "edge keys look like \"a-b\"");
    const Vertex a = parse_vertex_key(key.substr(0, dash), origin, p);
    const Vertex b = parse_vertex_key(key.substr(dash + 1), origin, p);
    const auto pos = order.position(a, b);
    if (!pos) field_error(origin, p, "not an edge of the complex");
    if (seen[*pos]) field_error(origin, p, "edge given twice");
    if (!value.is_number()) field_error(origin, p, "expected a number");
    seen[*pos] = true;
    out[*pos] = value.get<double>();
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) field_error(origin, "z", "edge " + edge_label(order.edge(i)) + " has no value");
  return out;
}

std::vector<double> load_metric_file(const std::filesystem::path& path, const EdgeOrdering& order) {
  return parse_metric_json(read_text(path), order, path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string edge_label(const Simplex& edge) { return std::to_string(edge[0]) + "-" + std::to_string(edge[1]); }

Json ordering_json(const EdgeOrdering& order) {
  Json j;
  Json edges = Json::array();
  for (const auto& e : order.edges()) edges.push_back(edge_label(e));
  j["edges"] = edges;
  if (order.has_reflection()) {
    j["blocks"] = {{"plus_minus_zero", order.plus_count()},
                   {"zero", order.zero_count()},
                   {"minus_minus_zero", order.minus_count()}};
  }
  return j;
}

Json to_json(const Complex& c) { return Json::array({c.real(), c.imag()}); }

Json to_json(const MCEstimate& e) {
  Json j;
  if (e.value.imag() == 0.0)
    j["value"] = e.value.real();
  else
    j["value"] = to_json(e.value);
  j["stderr"] = e.std_error;
  j["n_samples"] = e.n_samples;
  return j;
}

Json to_json(const ActionBreakdown& b) {
  return Json{{"R", b.R},         {"V", b.V},           {"H", b.H},
              {"R_plus", b.R_plus}, {"R_minus", b.R_minus}, {"V_plus", b.V_plus},
              {"V_minus", b.V_minus}, {"H_plus", b.H_plus}, {"H_minus", b.H_minus}};
}

namespace {

Json thermo_line(const ThermoLine& l) {
  return Json{{"expectation", l.expectation},
              {"expectation_stderr", l.expectation_error},
              {"minus_dlnZ", l.derivative},
              {"difference", l.difference},
              {"difference_stderr", l.difference_error},
              {"difference_sigma", l.difference_error > 0 ? std::abs(l.difference) / l.difference_error : 0.0},
              {"relative_difference", l.expectation != 0 ? std::abs(l.difference / l.expectation) : 0.0},
              {"tolerance", l.tolerance},
              {"pass", l.pass},
              {"variance_common_samples", l.variance_common},
              {"variance_independent_samples", l.variance_independent},
              {"variance_reduction",
               l.variance_common > 0 ? l.variance_independent / l.variance_common : 0.0}};
}

Json matrix_json(const Eigen::MatrixXcd& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ii = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ii.push_back(m(i, k).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return Json{{"re", re}, {"im", im}};
}

}  // namespace

Json to_json(const ThermoReport& t) {
  return Json{{"delta", t.delta},
              {"effective_sample_size", t.effective_sample_size},
              {"curvature", thermo_line(t.curvature)},
              {"volume", thermo_line(t.volume)},
              {"pass", t.pass()}};
}

Json to_json(const RPReport& r) {
  Json j;
  j["estimator"] = to_string(r.estimator);
  j["functions"] = r.functions;
  j["gram"] = matrix_json(r.gram);
  Json se = Json::array();
  for (Eigen::Index i = 0; i < r.entry_stderr.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < r.entry_stderr.cols(); ++k) row.push_back(r.entry_stderr(i, k));
    se.push_back(row);
  }
  j["entry_stderr"] = se;
  j["eigenvalues"] = r.eigenvalues;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["spectral_norm"] = r.spectral_norm;
  j["tolerance"] = r.tolerance;
  j["verdict"] = to_string(r.verdict);
  j["hermitian_exact"] = r.hermitian_exact;
  j["n_samples"] = r.n_samples;
  if (r.factorized) {
    const auto& d = *r.factorized;
    j["factorized"] = Json{{"n_z0", d.n_z0},
                           {"m_inner", d.m_inner},
                           {"infeasible_slices", d.infeasible_slices},
                           {"breached_slices", d.breached_slices},
                           {"inner_attempts", d.inner_attempts},
                           {"inner_accepted", d.inner_accepted},
                           {"partition", to_json(d.partition)},
                           {"diagonal_bias", d.diagonal_bias}};
  }
  return j;
}

Json to_json(const ReflectionReport& r) {
  Json j;
  j["ok"] = r.ok();
  Json failures = Json::array();
  for (const auto& f : r.failures) {
    Json x{{"check", to_string(f.check)}, {"detail", f.detail}};
    if (f.bullet) x["bullet"] = f.bullet;
    failures.push_back(x);
  }
  j["failures"] = failures;
  j["notes"] = r.notes;
  return j;
}

}  // namespace regge
