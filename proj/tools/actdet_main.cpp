#include "actdet/harness.hpp"
#include "actdet/lifted.hpp"
#include "actdet/model.hpp"
#include "actdet/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeFault = 2;

struct CliOverrides {
  std::string config_path;
  std::string out_dir = "out";
  std::string solvers;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  int threads = -1;
  bool dump_gamma = false;
};

actdet::RunConfig load_config(const CliOverrides& cli) {
  actdet::RunConfig cfg = actdet::load_run_config(cli.config_path);
  if (cli.seed_set) cfg.scenario.rng_seed = cli.seed;
  if (cli.trials > 0) cfg.trials = cli.trials;
  if (cli.threads >= 0) cfg.threads = cli.threads;
  if (!cli.solvers.empty()) {
    cfg.solvers.clear();
    std::stringstream ss(cli.solvers);
    std::string name;
    while (std::getline(ss, name, ','))
      if (!name.empty()) cfg.solvers.push_back(actdet::estimator_kind_from_string(name));
    if (cfg.solvers.empty()) throw std::invalid_argument("--solvers list is empty");
  }
  return cfg;
}

void print_run_summary(const actdet::RunRecord& record) {
  std::printf("trials=%d flagged=%d\n", record.config.trials, record.flagged_trials);
  for (const auto& agg : record.aggregates) {
    std::printf("%-5s p_d@p_fa=1e-2 %.4f  mean_err_l2 %.6g  mean_sweeps %.1f\n",
                agg.name.c_str(), actdet::p_d_at_p_fa(agg.roc, 1e-2), agg.mean_err_l2,
                agg.mean_sweeps);
  }
}

int cmd_run(const CliOverrides& cli) {
  const actdet::RunConfig cfg = load_config(cli);
  const actdet::RunRecord record = actdet::run_scenario(cfg);
  const auto manifest = actdet::emit_results(record, cli.out_dir);
  print_run_summary(record);
  if (cli.dump_gamma) {
    for (const auto& trial : record.trials) {
      if (!trial.ok) continue;
      for (std::size_t si = 0; si < trial.solvers.size(); ++si) {
        const std::string name =
            "gamma_" + actdet::to_string(cfg.solvers[si]) + ".csv";
        actdet::write_gamma_csv(std::filesystem::path(cli.out_dir) / name,
                                trial.solvers[si].gamma_hat);
      }
      break;  // first valid trial only
    }
  }
  std::printf("emitted %zu files to %s\n", manifest.size(), cli.out_dir.c_str());
  return kExitOk;
}

int cmd_sweep(const CliOverrides& cli, const std::string& param,
              const std::string& values_csv) {
  const actdet::RunConfig base = load_config(cli);
  const auto parameter = actdet::sweep_parameter_from_string(param);

  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) values.push_back(std::stod(item));
  if (values.empty()) throw std::invalid_argument("--values list is empty");

  const actdet::SweepOutcome outcome = actdet::sweep_parameter(base, parameter, values);
  std::size_t ri = 0;
  for (double value : values) {
    const bool skipped = std::any_of(
        outcome.skipped.begin(), outcome.skipped.end(),
        [value](const auto& s) { return s.first == value; });
    if (skipped) continue;
    const auto& record = outcome.records[ri++];
    std::ostringstream dir;
    dir << cli.out_dir << "/" << param << "_" << actdet::format_double(value);
    actdet::emit_results(record, dir.str());
    std::printf("== %s = %s\n", param.c_str(), actdet::format_double(value).c_str());
    print_run_summary(record);
  }
  for (const auto& [value, reason] : outcome.skipped)
    std::fprintf(stderr, "skipped %s = %s: %s\n", param.c_str(),
                 actdet::format_double(value).c_str(), reason.c_str());
  return outcome.records.empty() ? kExitConfigError : kExitOk;
}

int cmd_check_theory(int dc, int kc, int s, double delta, double c_prime, double lambda,
                     bool rank_check, int draws, std::uint64_t seed) {
  actdet::TheoremParams params;
  params.delta = delta;
  params.c_prime = c_prime;
  params.s = s;
  params.lambda_const = lambda;
  std::fputs(actdet::theory_report(dc, kc, s, params).c_str(), stdout);

  if (rank_check) {
    actdet::ScenarioConfig cfg;
    cfg.dc = dc;
    cfg.kc = kc;
    cfg.ac = 0;
    cfg.m = 1;
    cfg.rng_seed = seed;
    const int expected = std::min(kc, dc * (dc - 1) + 1);
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
      auto rng = actdet::RngStream::derive(seed, actdet::StreamKind::Pilots, i);
      const auto pilots = actdet::generate_pilots(cfg, rng);
      if (actdet::lifted_rank(actdet::build_lifted_matrix(pilots)) == expected) ++hits;
    }
    std::printf("rank_check.expected %d\n", expected);
    std::printf("rank_check.ok %d\n", hits);
    std::printf("rank_check.total %d\n", draws);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance-based user-activity detection simulator"};
  app.require_subcommand(1);

  CliOverrides cli;

  auto* run = app.add_subcommand("run", "Run a Monte Carlo scenario");
  run->add_option("--config", cli.config_path, "scenario config file")->required();
  run->add_option("--out", cli.out_dir, "output directory");
  run->add_option("--seed", cli.seed, "master RNG seed (overrides config)")
      ->each([&cli](const std::string&) { cli.seed_set = true; });
  run->add_option("--trials", cli.trials, "Monte Carlo trials (overrides config)");
  run->add_option("--threads", cli.threads, "worker threads (0 = auto)");
  run->add_option("--solvers", cli.solvers, "comma list from ml,mmv,nnls");
  run->add_flag("--dump-gamma", cli.dump_gamma,
                "also write gamma_<solver>.csv for the first valid trial");

  std::string sweep_param, sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter");
  sweep->add_option("--config", cli.config_path, "scenario config file")->required();
  sweep->add_option("--out", cli.out_dir, "output directory");
  sweep->add_option("--seed", cli.seed, "master RNG seed (overrides config)")
      ->each([&cli](const std::string&) { cli.seed_set = true; });
  sweep->add_option("--trials", cli.trials, "Monte Carlo trials (overrides config)");
  sweep->add_option("--threads", cli.threads, "worker threads (0 = auto)");
  sweep->add_option("--solvers", cli.solvers, "comma list from ml,mmv,nnls");
  sweep->add_option("--param", sweep_param, "one of m, kc, ac, snr_db, dc")->required();
  sweep->add_option("--values", sweep_values, "comma list of values")->required();

  int ct_dc = 100, ct_kc = 2000, ct_s = 200, ct_draws = 100;
  double ct_delta = 0.5, ct_cprime = 1.0, ct_lambda = 1.0;
  std::uint64_t ct_seed = 0;
  bool ct_rank = false;
  auto* check = app.add_subcommand("check-theory",
                                   "Evaluate the recovery-bound constants and scaling law");
  check->add_option("--dc", ct_dc, "pilot dimension");
  check->add_option("--kc", ct_kc, "potential users");
  check->add_option("--s", ct_s, "sparsity parameter");
  check->add_option("--delta", ct_delta, "RIP parameter, in (0, 4/sqrt(41))");
  check->add_option("--c-prime", ct_cprime, "absolute constant c'");
  check->add_option("--lambda", ct_lambda, "subexponential normalization");
  check->add_flag("--rank-check", ct_rank,
                  "measure the lifted-matrix rank over random pilot draws (desk scale)");
  check->add_option("--draws", ct_draws, "random draws for --rank-check");
  check->add_option("--seed", ct_seed, "seed for --rank-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(cli);
    if (sweep->parsed()) return cmd_sweep(cli, sweep_param, sweep_values);
    return cmd_check_theory(ct_dc, ct_kc, ct_s, ct_delta, ct_cprime, ct_lambda, ct_rank,
                            ct_draws, ct_seed);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime fault: %s\n", e.what());
    return kExitRuntimeFault;
  }
}
