#include "regge/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "regge/error.hpp"

namespace regge {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_digest(const std::filesystem::path& p) {
  const std::string text = read_text(p);
  return hex64(fnv1a64({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}));
}

Json estimate_json(const MCEstimate& e) { return to_json(e); }

/// Loaded complex plus, when the file declares one, its verified reflection.
struct Loaded {
  ComplexFile file;
  std::optional<ReflectionReport> reflection;
};

Loaded load(const RunConfig& c) {
  Loaded l{load_complex_file(c.complex_path), std::nullopt};
  if (l.file.has_reflection()) l.reflection = verify_reflection(l.file.complex, *l.file.theta, *l.file.k_plus);
  return l;
}

ReflectedGeometry reflected(const Loaded& l) {
  if (!l.file.has_reflection()) throw ComplexError(l.file.complex.dimension() >= 0 ?
      "the complex file declares no reflection" : "empty complex");
  return ReflectedGeometry(l.file.complex, l.reflection->value());
}

CutoffSpec cutoff(const RunConfig& c) { return {c.kappa, c.norm}; }
HilbertParams params(const RunConfig& c) { return {c.gamma, c.lambda}; }

Json simplex_list_json(const std::vector<Simplex>& s) {
  Json out = Json::array();
  for (const auto& x : s) out.push_back(x.to_string());
  return out;
}

Json sample_json(const SampleSet& s) {
  Json j{{"n_samples", s.size()},
         {"edge_count", s.edge_count},
         {"attempt_count", s.attempt_count},
         {"acceptance_rate", s.attempt_count ? static_cast<double>(s.size()) / static_cast<double>(s.attempt_count)
                                             : 0.0},
         {"box_volume", s.box_volume},
         {"digest_fnv1a64", hex64(digest(s))}};
  return j;
}

void write_report(const RunConfig& c, const std::string& command, const Json& report) {
  if (c.output_dir.empty()) return;
  std::filesystem::create_directories(c.output_dir);
  write_text(c.output_dir / (command + "_report.json"), report.dump(2) + "\n");
}

}  // namespace

void validate_config(const RunConfig& c) {
  if (c.complex_path.empty()) throw ReggeError("no complex file given");
  if (!(c.kappa > 0.0) || !std::isfinite(c.kappa)) throw ReggeError("kappa must be a positive number");
  if (c.samples == 0) throw ReggeError("samples must be positive");
  if (!std::isfinite(c.gamma) || !std::isfinite(c.lambda)) throw ReggeError("couplings must be finite");
  if (!(c.delta > 0.0)) throw ReggeError("delta must be positive");
  if (c.estimator == GramEstimator::factorized && (c.m_inner < 2 || c.n_z0 < 2))
    throw ReggeError("factorized estimator needs m_inner >= 2 and n_z0 >= 2");
}

Json config_echo(const RunConfig& c, const std::string& command) {
  Json j;
  j["command"] = command;
  j["complex"] = c.complex_path.string();
  j["complex_digest_fnv1a64"] = file_digest(c.complex_path);
  if (c.metric_path) {
    j["metric"] = c.metric_path->string();
    j["metric_digest_fnv1a64"] = file_digest(*c.metric_path);
  } else {
    j["metric"] = nullptr;
  }
  j["kappa"] = c.kappa;
  j["norm"] = to_string(c.norm);
  j["gamma"] = c.gamma;
  j["lambda"] = c.lambda;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["estimator"] = to_string(c.estimator);
  j["m_inner"] = c.m_inner;
  j["n_z0"] = c.n_z0;
  j["delta"] = c.delta;
  j["out"] = c.output_dir.string();
  const SamplerOptions so;
  const FactorizedOptions fo;
  j["fixed"] = {{"sampler_chunk_size", so.chunk_size},
                {"sampler_acceptance_floor", so.acceptance_floor},
                {"factorized_inner_floor", fo.inner_floor},
                {"jackknife_blocks", kDefaultJackknifeBlocks},
                {"theta_paired", true}};
  return j;
}

CommandResult cmd_validate(const RunConfig& c) {
  const Loaded l = load(c);
  Json checks;
  bool ok = true;

  const auto pm = is_pseudomanifold(l.file.complex);
  Json v = Json::array();
  for (const auto& x : pm.violations) v.push_back({{"condition", x.condition}, {"detail", x.detail}});
  checks["pseudomanifold"] = {{"pass", pm.ok()}, {"violations", v}};
  ok = ok && pm.ok();

  if (l.reflection) {
    checks["reflection"] = to_json(*l.reflection);
    checks["reflection"]["pass"] = l.reflection->ok();
    ok = ok && l.reflection->ok();
    if (l.reflection->ok()) {
      const auto& r = l.reflection->value();
      checks["reflection"]["k_zero"] = simplex_list_json(r.k_zero().maximal_simplices());
      checks["reflection"]["edge_order"] = ordering_json(canonical_edge_order(l.file.complex, r));
    }
  } else {
    checks["reflection"] = nullptr;
  }

  if (c.metric_path) {
    const EdgeOrdering order = l.reflection && l.reflection->ok()
                                   ? canonical_edge_order(l.file.complex, l.reflection->value())
                                   : EdgeOrdering::lexicographic(l.file.complex);
    const MetricLayout layout(l.file.complex, order);
    const auto z = load_metric_file(*c.metric_path, order);
    const auto bad = metric_violations(layout, z);
    Json m{{"pass", bad.empty()}, {"violations", Json::array()}};
    for (const auto& s : bad)
      m["violations"].push_back({{"simplex", s.to_string()}, {"gram_det", gram_det(layout, s, z)}});
    if (bad.empty() && order.has_reflection()) m["in_cutoff"] = in_cutoff(layout, z, cutoff(c));
    checks["metric"] = m;
    ok = ok && bad.empty();
  } else {
    checks["metric"] = nullptr;
  }

  Json report;
  report["config"] = config_echo(c, "validate");
  report["dimension"] = l.file.complex.dimension();
  report["simplex_counts"] = Json::array();
  for (int k = 0; k <= l.file.complex.dimension(); ++k) report["simplex_counts"].push_back(l.file.complex.count(k));
  report["checks"] = checks;
  report["pass"] = ok;
  return {ok ? exit_ok : exit_validation, report};
}

CommandResult cmd_action(const RunConfig& c) {
  if (!c.metric_path) throw ReggeError("action needs --metric");
  const Loaded l = load(c);
  const HilbertParams p = params(c);
  Json report;
  report["config"] = config_echo(c, "action");

  const bool split = l.reflection && l.reflection->ok();
  std::optional<ReflectedGeometry> geom;
  if (split) geom.emplace(reflected(l));
  const MetricLayout layout = split ? geom->full() : MetricLayout(l.file.complex);
  const auto z = load_metric_file(*c.metric_path, layout.edges());
  const auto bad = metric_violations(layout, z);
  if (!bad.empty()) {
    std::string msg = "metric outside the cone at";
    for (const auto& s : bad) msg += " " + s.to_string();
    throw NotRealizableError(msg);
  }

  if (split) {
    const auto b = split_action(*geom, z, p);
    report["action"] = to_json(b);
    const double scale = 1.0 + std::abs(b.R) + std::abs(b.V);
    const auto tz = theta_pullback(z, layout.edges());
    const double r_theta = regge_curvature(layout, tz);
    report["split_residuals"] = {{"R", std::abs(b.R_plus + b.R_minus - b.R)},
                                 {"V", std::abs(b.V_plus + b.V_minus - b.V)},
                                 {"H", std::abs(b.H_plus + b.H_minus - b.H)},
                                 {"R_theta_invariance", std::abs(r_theta - b.R)},
                                 {"scale", scale}};
  } else {
    ActionBreakdown b;
    b.R = regge_curvature(layout, z);
    b.V = total_volume(layout, z);
    b.H = p.gamma * b.R + p.lambda * b.V;
    report["action"] = {{"R", b.R}, {"V", b.V}, {"H", b.H}};
    report["split_residuals"] = nullptr;
  }

  const int n = layout.dimension();
  Json hinges = Json::array();
  if (n >= 2) {
    for (const auto& h : layout.complex().simplices(n - 2)) {
      const double vol = h.size() == 1 ? 1.0 : simplex_volume(layout, h, z);
      hinges.push_back({{"hinge", h.to_string()}, {"volume", vol}, {"deficit", deficit(layout, h, z)}});
    }
  }
  report["hinges"] = hinges;
  report["pass"] = true;
  return {exit_ok, report};
}

CommandResult cmd_rp(const RunConfig& c) {
  if (c.output_dir.empty()) throw IoError("rp needs an output directory for the sample file");
  const Loaded l = load(c);
  const ReflectedGeometry geom = reflected(l);
  const CutoffSpec cut = cutoff(c);
  const HilbertParams p = params(c);

  const SampleSet samples = sample_cutoff(geom, cut, c.samples, c.seed);
  std::filesystem::create_directories(c.output_dir);
  write_samples(c.output_dir / "samples.rpsamp", samples);

  const Ensemble ens(geom, samples, p);
  const auto fs = default_corpus(geom);
  const RPReport naive = rp_gram(fs, ens);

  Json report;
  report["config"] = config_echo(c, "rp");
  report["samples"] = sample_json(samples);
  report["samples"]["file"] = "samples.rpsamp";
  report["partition"] = estimate_json(estimate_partition(ens));
  report["naive"] = to_json(naive);
  bool ok = naive.verdict == Verdict::psd_within_tolerance;
  if (c.estimator == GramEstimator::factorized) {
    const RPReport fact = rp_gram_factorized(fs, geom, cut, p, c.n_z0, c.m_inner, c.seed);
    report["factorized"] = to_json(fact);
    ok = ok && fact.verdict == Verdict::psd_within_tolerance;
  } else {
    report["factorized"] = nullptr;
  }
  report["pass"] = ok;
  return {ok ? exit_ok : exit_validation, report};
}

CommandResult cmd_observables(const RunConfig& c) {
  const Loaded l = load(c);
  const ReflectedGeometry geom = reflected(l);
  const CutoffSpec cut = cutoff(c);
  const SampleSet samples = sample_cutoff(geom, cut, c.samples, c.seed);
  const Ensemble ens(geom, samples, params(c));

  Json report;
  report["config"] = config_echo(c, "observables");
  report["samples"] = sample_json(samples);
  report["partition"] = estimate_json(estimate_partition(ens));
  const auto [log_z, log_z_err] = log_partition(ens);
  report["log_partition"] = {{"value", log_z}, {"stderr", log_z_err}};
  report["cutoff_volume_estimate"] =
      samples.box_volume * static_cast<double>(samples.size()) / static_cast<double>(samples.attempt_count);
  report["expectation_R"] = estimate_json(estimate_expectation(ens, Observable::curvature));
  report["expectation_V"] = estimate_json(estimate_expectation(ens, Observable::volume));

  const ThermoReport thermo = check_thermo_identity(ens, c.delta);
  report["thermo"] = to_json(thermo);

  Json vac = Json::object();
  for (const auto f : {FieldObservable::curvature_plus, FieldObservable::volume_plus}) {
    const auto e = field_quadratic_form(TestFunction::vacuum(), f, ens);
    Json j = estimate_json(e);
    j["sigma"] = e.std_error > 0 ? std::abs(e.value) / e.std_error : 0.0;
    j["nonzero_at_5_sigma"] = e.std_error > 0 && std::abs(e.value) > 5.0 * e.std_error;
    vac[to_string(f)] = j;
  }
  report["vacuum_expectations"] = vac;
  report["pass"] = thermo.pass();
  return {thermo.pass() ? exit_ok : exit_validation, report};
}

CommandResult run_command(const std::string& command, const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  CommandResult r;
  auto fail = [&](int code, const char* kind, const std::exception& e) {
    r.exit_code = code;
    r.report = Json{{"command", command}, {"pass", false}, {"error", {{"kind", kind}, {"message", e.what()}}}};
  };
  try {
    validate_config(c);
    if (command == "validate")
      r = cmd_validate(c);
    else if (command == "action")
      r = cmd_action(c);
    else if (command == "rp")
      r = cmd_rp(c);
    else if (command == "observables")
      r = cmd_observables(c);
    else
      throw ReggeError("unknown command '" + command + "'");
  } catch (const IoError& e) {
    fail(exit_io, "io", e);
  } catch (const ComplexError& e) {
    fail(exit_validation, "complex", e);
  } catch (const NotRealizableError& e) {
    fail(exit_validation, "not_realizable", e);
  } catch (const FeasibilityError& e) {
    fail(exit_runtime, "feasibility", e);
  } catch (const std::filesystem::filesystem_error& e) {
    fail(exit_io, "io", e);
  } catch (const std::exception& e) {
    fail(exit_runtime, "runtime", e);
  }
  r.report["version"] = REGGE_VERSION;
  r.report["exit_code"] = r.exit_code;
  r.report["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_report(c, command, r.report);
  } catch (const std::exception& e) {
    if (r.exit_code == exit_ok) r.exit_code = exit_io;
    r.report["exit_code"] = r.exit_code;
    r.report["report_write_error"] = e.what();
  }
  return r;
}

Json strip_timing(Json report) {
  report.erase("wall_time_seconds");
  return report;
}

}  // namespace regge
