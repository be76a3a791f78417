#include "actdet/harness.hpp"

#include "actdet/model.hpp"
#include "actdet/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace actdet {

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
  return 0.5 * (values[mid - 1] + upper);
}

TrialResult run_one_trial(const RunConfig& cfg, const PilotMatrix& pilots, int trial) {
  const std::uint64_t master = cfg.scenario.rng_seed;
  TrialResult result;
  result.index = trial;
  result.seed_key = derive_stream_key(master, StreamKind::Activity, trial);

  try {
    auto activity_rng = RngStream::derive(master, StreamKind::Activity, trial);
    auto channel_rng = RngStream::derive(master, StreamKind::Channel, trial);
    auto noise_rng = RngStream::derive(master, StreamKind::Noise, trial);

    result.truth = generate_activity(cfg.scenario, activity_rng);
    const ChannelMatrix channel = generate_channel(cfg.scenario, channel_rng);
    const ObservationBlock obs =
        synthesize_observation(pilots, result.truth, channel, cfg.scenario, noise_rng);
    const SampleCovariance sigma_hat = sample_covariance(obs);

    result.solvers.reserve(cfg.solvers.size());
    for (std::size_t si = 0; si < cfg.solvers.size(); ++si) {
      SolverOptions opts = cfg.solver;
      opts.kind = cfg.solvers[si];
      opts.shuffle_seed = derive_stream_key(master, StreamKind::Shuffle,
                                            static_cast<std::uint64_t>(trial) * 16 + si);

      const auto start = std::chrono::steady_clock::now();
      SolveResult solved =
          run_coordinate_descent(sigma_hat, pilots, cfg.scenario.sigma2, opts);
      const auto stop = std::chrono::steady_clock::now();

      TrialSolverOutcome outcome;
      outcome.gamma_hat = std::move(solved.gamma_hat);
      outcome.final_cost = solved.diagnostics.final_cost;
      outcome.sweeps = solved.diagnostics.sweeps;
      outcome.converged = solved.diagnostics.converged;
      outcome.numerical_faults = solved.diagnostics.numerical_faults;
      outcome.consumed_hash = solved.diagnostics.consumed_hash;
      outcome.wall_ms =
          std::chrono::duration<double, std::milli>(stop - start).count();
      outcome.err_l2 = (outcome.gamma_hat - result.truth.gamma).norm();
      outcome.err_linf =
          (outcome.gamma_hat - result.truth.gamma).cwiseAbs().maxCoeff();
      result.solvers.push_back(std::move(outcome));
    }
  } catch (const std::exception& e) {
    result.ok = false;
    result.fault = e.what();
    result.solvers.clear();
  }
  return result;
}

}  // namespace

RunRecord run_scenario(const RunConfig& config) {
  config.scenario.validate();
  config.solver.validate(config.scenario.sigma2);
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.solvers.empty()) throw std::invalid_argument("no solvers requested");

  RunRecord record;
  record.config = config;
  record.nu_grid =
      default_nu_grid(config.nu_grid_points, config.nu_grid_min, config.nu_grid_max);

  // One codebook per scenario unless per-trial pilots were requested.
  const std::uint64_t master = config.scenario.rng_seed;
  auto pilots_for_trial = [&](int trial) {
    const std::uint64_t index = config.fixed_pilots ? 0 : 1 + trial;
    auto rng = RngStream::derive(master, StreamKind::Pilots, index);
    return generate_pilots(config.scenario, rng);
  };
  const PilotMatrix shared_pilots = pilots_for_trial(0);

  record.trials.resize(config.trials);
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, config.trials));

  auto worker = [&](int first) {
    for (int t = first; t < config.trials; t += threads) {
      if (config.fixed_pilots) {
        record.trials[t] = run_one_trial(config, shared_pilots, t);
      } else {
        const PilotMatrix pilots = pilots_for_trial(t);
        record.trials[t] = run_one_trial(config, pilots, t);
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker, i);
    for (auto& th : pool) th.join();
  }

  for (const auto& trial : record.trials)
    if (!trial.ok) ++record.flagged_trials;

  const int valid = config.trials - record.flagged_trials;
  if (valid == 0) return record;

  // Every solver inside a trial must have consumed the same statistic.
  for (const auto& trial : record.trials) {
    if (!trial.ok) continue;
    for (const auto& outcome : trial.solvers)
      if (outcome.consumed_hash != trial.solvers.front().consumed_hash)
        throw std::logic_error("solvers consumed different covariances in one trial");
  }

  for (std::size_t si = 0; si < config.solvers.size(); ++si) {
    SolverAggregate agg;
    agg.name = to_string(config.solvers[si]);
    std::vector<std::pair<VectorXd, ActivityPattern>> detections;
    std::vector<double> l2, linf;
    double sweep_sum = 0.0;
    detections.reserve(valid);
    for (const auto& trial : record.trials) {
      if (!trial.ok) continue;
      const auto& outcome = trial.solvers[si];
      detections.emplace_back(outcome.gamma_hat, trial.truth);
      l2.push_back(outcome.err_l2);
      linf.push_back(outcome.err_linf);
      sweep_sum += outcome.sweeps;
    }
    agg.roc = roc_sweep(detections, config.scenario.sigma2, record.nu_grid);
    agg.mean_err_l2 = std::accumulate(l2.begin(), l2.end(), 0.0) / valid;
    agg.mean_err_linf = std::accumulate(linf.begin(), linf.end(), 0.0) / valid;
    agg.median_err_l2 = median(l2);
    agg.median_err_linf = median(linf);
    agg.mean_sweeps = sweep_sum / valid;
    record.aggregates.push_back(std::move(agg));
  }
  return record;
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "m") return SweepParameter::M;
  if (s == "kc") return SweepParameter::Kc;
  if (s == "ac") return SweepParameter::Ac;
  if (s == "snr_db") return SweepParameter::SnrDb;
  if (s == "dc") return SweepParameter::Dc;
  throw std::invalid_argument("unknown sweep parameter: " + s +
                              " (expected m, kc, ac, snr_db or dc)");
}

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::M: return "m";
    case SweepParameter::Kc: return "kc";
    case SweepParameter::Ac: return "ac";
    case SweepParameter::SnrDb: return "snr_db";
    case SweepParameter::Dc: return "dc";
  }
  return "?";
}

SweepOutcome sweep_parameter(const RunConfig& base, SweepParameter parameter,
                             const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  SweepOutcome outcome;
  for (double value : values) {
    RunConfig derived = base;
    try {
      auto as_int = [value]() {
        const auto rounded = static_cast<int>(std::llround(value));
        if (static_cast<double>(rounded) != value)
          throw std::invalid_argument("value must be an integer for this parameter");
        return rounded;
      };
      switch (parameter) {
        case SweepParameter::M: derived.scenario.m = as_int(); break;
        case SweepParameter::Kc: derived.scenario.kc = as_int(); break;
        case SweepParameter::Ac: derived.scenario.ac = as_int(); break;
        case SweepParameter::SnrDb: derived.scenario.snr_db_active = value; break;
        case SweepParameter::Dc: derived.scenario.dc = as_int(); break;
      }
      derived.scenario.validate();
      outcome.records.push_back(run_scenario(derived));
    } catch (const std::invalid_argument& e) {
      outcome.skipped.emplace_back(value, e.what());
    }
  }
  return outcome;
}

namespace {

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["scenario"] = {
      {"dc", cfg.scenario.dc},
      {"kc", cfg.scenario.kc},
      {"ac", cfg.scenario.ac},
      {"m", cfg.scenario.m},
      {"sigma2", cfg.scenario.sigma2},
      {"snr_db_active", cfg.scenario.snr_db_active},
      {"pilot_kind", to_string(cfg.scenario.pilot_kind)},
      {"channel_kind", to_string(cfg.scenario.channel_kind)},
      {"m_eff_fraction", cfg.scenario.m_eff_fraction},
      {"rng_seed", cfg.scenario.rng_seed},
  };
  j["solver"] = {
      {"max_sweeps", cfg.solver.max_sweeps},
      {"tol", cfg.solver.effective_tol(cfg.scenario.sigma2)},
      {"coordinate_order", to_string(cfg.solver.order)},
      {"rho", cfg.solver.effective_rho(cfg.scenario.sigma2)},
      {"reinversion_period", cfg.solver.reinversion_period},
  };
  j["trials"] = cfg.trials;
  j["fixed_pilots"] = cfg.fixed_pilots;
  std::vector<std::string> names;
  for (auto kind : cfg.solvers) names.push_back(to_string(kind));
  j["solvers"] = names;
  return j;
}

std::uint64_t hash_file(const std::filesystem::path& path, std::uint64_t* bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot re-open emitted file: " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  *bytes = data.size();
  return fnv1a64(data.data(), data.size());
}

}  // namespace

std::vector<ManifestEntry> emit_results(const RunRecord& record,
                                        const std::filesystem::path& out_dir,
                                        EmitFormats formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory " + out_dir.string() +
                             ": " + ec.message());

  std::vector<ManifestEntry> manifest;
  auto record_file = [&](const std::string& name) {
    ManifestEntry entry;
    entry.name = name;
    entry.fnv64 = hash_file(out_dir / name, &entry.bytes);
    manifest.push_back(entry);
  };

  if (formats.csv) {
    for (const auto& agg : record.aggregates) {
      const std::string name = "roc_" + agg.name + ".csv";
      std::ofstream out(out_dir / name);
      if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
      out << "nu,p_d,p_fa\n";
      for (const auto& pt : agg.roc.points)
        out << format_double(pt.nu) << ',' << format_double(pt.p_d) << ','
            << format_double(pt.p_fa) << '\n';
      out.close();
      record_file(name);
    }
  }

  if (formats.json_summary) {
    nlohmann::json summary;
    summary["config"] = config_to_json(record.config);
    summary["flagged_trials"] = record.flagged_trials;
    summary["valid_trials"] = record.config.trials - record.flagged_trials;

    nlohmann::json solvers = nlohmann::json::array();
    for (const auto& agg : record.aggregates) {
      nlohmann::json s;
      s["name"] = agg.name;
      s["mean_err_l2"] = agg.mean_err_l2;
      s["median_err_l2"] = agg.median_err_l2;
      s["mean_err_linf"] = agg.mean_err_linf;
      s["median_err_linf"] = agg.median_err_linf;
      s["mean_sweeps"] = agg.mean_sweeps;
      s["p_d_at_p_fa_1e-2"] = p_d_at_p_fa(agg.roc, 1e-2);
      solvers.push_back(s);
    }
    summary["solvers"] = solvers;

    nlohmann::json trials = nlohmann::json::array();
    for (const auto& trial : record.trials) {
      nlohmann::json t;
      t["index"] = trial.index;
      t["seed_key"] = trial.seed_key;
      t["ok"] = trial.ok;
      if (!trial.ok) t["fault"] = trial.fault;
      t["active_users"] = trial.truth.support.size();
      nlohmann::json per_solver = nlohmann::json::array();
      for (std::size_t si = 0; si < trial.solvers.size(); ++si) {
        const auto& o = trial.solvers[si];
        per_solver.push_back({
            {"name", to_string(record.config.solvers[si])},
            {"final_cost", o.final_cost},
            {"sweeps", o.sweeps},
            {"converged", o.converged},
            {"numerical_faults", o.numerical_faults},
            {"wall_ms", o.wall_ms},
            {"err_l2", o.err_l2},
            {"err_linf", o.err_linf},
            {"consumed_hash", o.consumed_hash},
        });
      }
      t["solvers"] = per_solver;
      trials.push_back(t);
    }
    summary["per_trial"] = trials;

    std::ofstream out(out_dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "summary.json").string());
    out << summary.dump(2) << '\n';
    out.close();
    record_file("summary.json");
  }

  {
    std::ofstream out(out_dir / "manifest.txt");
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "manifest.txt").string());
    char hex[32];
    for (const auto& entry : manifest) {
      std::snprintf(hex, sizeof(hex), "%016llx",
                    static_cast<unsigned long long>(entry.fnv64));
      out << entry.name << ' ' << entry.bytes << ' ' << hex << '\n';
    }
  }
  return manifest;
}

}  // namespace actdet
