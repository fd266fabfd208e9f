#pragma once

// JSON complex and metric files, and JSON views of results.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "regge/estimators.hpp"

namespace regge {

using Json = nlohmann::ordered_json;

/// Contents of a complex file:
///   {"n": 3, "maximal_simplexes": [[0,1,2,3], ...],
///    "reflection": {"permutation": {"0": 4, "4": 0}, "k_plus_maximal": [[0,1,2,3]]}}
struct ComplexFile {
  SimplicialComplex complex;
  int declared_dimension = -1;
  std::optional<Automorphism> theta;
  std::optional<SimplicialComplex> k_plus;
  bool has_reflection() const { return theta.has_value(); }
};

/// Throws IoError with line and column for malformed JSON and with the
/// field path for values of the wrong shape.
ComplexFile parse_complex_json(const std::string& text, const std::string& origin = "<input>");
ComplexFile load_complex_file(const std::filesystem::path& path);

/// {"z": {"0-1": 1.0, ...}} keyed by edge, or {"z": [...]} in the given
/// ordering. Every edge must be given exactly once.
std::vector<double> parse_metric_json(const std::string& text, const EdgeOrdering& order,
                                      const std::string& origin = "<input>");
std::vector<double> load_metric_file(const std::filesystem::path& path, const EdgeOrdering& order);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

std::string edge_label(const Simplex& edge);
Json ordering_json(const EdgeOrdering& order);
Json to_json(const Complex& c);
Json to_json(const MCEstimate& e);
Json to_json(const ActionBreakdown& b);
Json to_json(const ThermoReport& t);
Json to_json(const RPReport& r);
Json to_json(const ReflectionReport& r);

}  // namespace regge
