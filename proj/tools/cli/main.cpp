#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace fdh::cli;

  CLI::App app{"Homogeneity tests for samples of curves"};
  app.require_subcommand(1);

  RegisterConfig reg;
  auto* reg_cmd = app.add_subcommand("register", "Map raw curves onto a common [0, 1] grid");
  reg_cmd->add_option("--input", reg.input, "Raw CSV: curve_id,group,v,value[,v_reset]")->required();
  reg_cmd->add_option("--out", reg.out, "Output directory");
  reg_cmd->add_option("--grid-points", reg.grid_points, "Number of registration grid points");

  PipelineConfig pipe;
  std::string format = "long";
  std::string route = "manova";
  auto* test_cmd = app.add_subcommand("test", "Smooth curves and test equality of group processes");
  test_cmd->add_option("--input", pipe.input, "Input file")->required();
  test_cmd->add_option("--format", format, "long | wide | raw | coef")->capture_default_str();
  test_cmd->add_option("--basis-dim", pipe.basis_dimension, "B-spline basis dimension")->capture_default_str();
  test_cmd->add_option("--degree", pipe.degree, "B-spline degree")->capture_default_str();
  test_cmd->add_option("--lambda", pipe.lambda, "Fixed P-spline penalty (0 = least squares)");
  test_cmd->add_flag("--loocv", pipe.loocv, "Select the P-spline penalty by leave-one-out CV");
  test_cmd->add_option("--grid-points", pipe.grid_points, "Registration grid for raw input")->capture_default_str();
  test_cmd->add_option("--route", route, "manova | pc-anova | np-mood | np-kw | pairwise-wilcoxon")
      ->capture_default_str();
  test_cmd->add_option("--q", pipe.q, "Number of principal components");
  test_cmd->add_option("--var-threshold", pipe.var_threshold, "Cumulative variance threshold in (0, 1]");
  test_cmd->add_option("--alpha", pipe.alpha, "Significance level")->capture_default_str();
  test_cmd->add_option("--seed", pipe.seed, "Seed for permutation references")->capture_default_str();
  test_cmd->add_option("--permutations", pipe.permutations, "Permutation count for np routes (0 = chi-squared)");
  test_cmd->add_option("--out", pipe.out, "Output directory");

  SimulateConfig simc;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo acceptance-proportion study");
  sim_cmd->add_option("--config", simc.config, "Study configuration file")->required();
  sim_cmd->add_option("--reps", simc.reps, "Replicates per cell (overrides the config)");
  sim_cmd->add_flag("--full", simc.full, "Use 1000 replicates per cell");
  sim_cmd->add_option("--seed", simc.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--workers", simc.workers, "Worker threads")->capture_default_str();
  sim_cmd->add_option("--out", simc.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  return guarded(
      [&] {
        if (*reg_cmd) {
          std::cout << cmd_register(reg, std::cerr) << "\n";
        } else if (*test_cmd) {
          pipe.format = parse_format(format);
          pipe.route = parse_route(route);
          for (const auto& path : cmd_test(pipe, std::cerr)) {
            std::cout << path << "\n";
          }
        } else if (*sim_cmd) {
          for (const auto& path : cmd_simulate(simc, std::cerr)) {
            std::cout << path << "\n";
          }
        }
      },
      std::cerr);
}
