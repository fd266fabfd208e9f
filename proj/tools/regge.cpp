// regge: validate complexes, evaluate the action and run the reflection
// positivity and observable estimators.

#include <CLI11.hpp>
#include <iostream>

#include "regge/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Regge calculus geometry and reflection positivity checks"};
  app.set_version_flag("--version", REGGE_VERSION);
  app.require_subcommand(1);

  regge::RunConfig cfg;
  std::string norm = "sup", estimator = "naive", metric, out;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--complex", cfg.complex_path, "complex JSON file")->required();
    cmd->add_option("--metric", metric, "metric JSON file");
    cmd->add_option("--kappa", cfg.kappa, "cutoff parameter")->capture_default_str();
    cmd->add_option("--norm", norm, "cutoff norm")->check(CLI::IsMember({"sup", "l2"}))->capture_default_str();
    cmd->add_option("--gamma", cfg.gamma, "curvature coupling")->capture_default_str();
    cmd->add_option("--lambda", cfg.lambda, "volume coupling")->capture_default_str();
    cmd->add_option("--samples", cfg.samples, "accepted samples")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    cmd->add_option("--estimator", estimator, "Gram estimator")
        ->check(CLI::IsMember({"naive", "factorized"}))
        ->capture_default_str();
    cmd->add_option("--m-inner", cfg.m_inner, "inner samples per slice (factorized)")->capture_default_str();
    cmd->add_option("--n-z0", cfg.n_z0, "number of K_0 slices (factorized)")->capture_default_str();
    cmd->add_option("--delta", cfg.delta, "coupling step of the thermodynamic check")->capture_default_str();
    cmd->add_option("--out", out, "output directory");
  };
  for (const auto& [name, help] :
       {std::pair{"validate", "check the complex, its reflection and an optional metric"},
        std::pair{"action", "curvature, volume and Hilbert action of a metric"},
        std::pair{"rp", "sample the cutoff region and test the Gram matrix of the default corpus"},
        std::pair{"observables", "partition function, expectations and thermodynamic identities"}})
    common(app.add_subcommand(name, help));

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  cfg.norm = regge::parse_cutoff_norm(norm);
  cfg.estimator = estimator == "factorized" ? regge::GramEstimator::factorized : regge::GramEstimator::naive;
  if (!metric.empty()) cfg.metric_path = metric;
  cfg.output_dir = out;

  const auto result = regge::run_command(command, cfg);
  std::cout << result.report.dump(2) << "\n";
  if (result.report.contains("error"))
    std::cerr << "regge " << command << ": " << result.report["error"]["message"].get<std::string>() << "\n";
  return result.exit_code;
}
