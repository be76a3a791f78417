#include "actdet/io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace actdet {

namespace {

constexpr char kMatrixMagic[8] = {'A', 'C', 'T', 'D', 'C', 'M', '0', '1'};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
  }
  if (pos != value.size())
    throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
  return parsed;
}

int to_int(const std::string& key, const std::string& value) {
  const double parsed = to_double(key, value);
  const auto rounded = static_cast<long long>(std::llround(parsed));
  if (static_cast<double>(rounded) != parsed)
    throw std::invalid_argument("config key '" + key + "' must be an integer");
  return static_cast<int>(rounded);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const auto parsed = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad unsigned '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config key '" + key + "' must be true/false");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key or value");
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

RunConfig run_config_from_text(const std::string& text) {
  RunConfig cfg;
  auto kv = parse_key_values(text);
  auto take = [&kv](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::string();
    std::string value = it->second;
    kv.erase(it);
    return value;
  };

  if (auto v = take("dc"); !v.empty()) cfg.scenario.dc = to_int("dc", v);
  if (auto v = take("kc"); !v.empty()) cfg.scenario.kc = to_int("kc", v);
  if (auto v = take("ac"); !v.empty()) cfg.scenario.ac = to_int("ac", v);
  if (auto v = take("m"); !v.empty()) cfg.scenario.m = to_int("m", v);
  if (auto v = take("sigma2"); !v.empty()) cfg.scenario.sigma2 = to_double("sigma2", v);
  if (auto v = take("snr_db_active"); !v.empty())
    cfg.scenario.snr_db_active = to_double("snr_db_active", v);
  if (auto v = take("pilot_kind"); !v.empty())
    cfg.scenario.pilot_kind = pilot_kind_from_string(v);
  if (auto v = take("channel_kind"); !v.empty())
    cfg.scenario.channel_kind = channel_kind_from_string(v);
  if (auto v = take("m_eff_fraction"); !v.empty())
    cfg.scenario.m_eff_fraction = to_double("m_eff_fraction", v);
  if (auto v = take("rng_seed"); !v.empty()) cfg.scenario.rng_seed = to_u64("rng_seed", v);

  if (auto v = take("max_sweeps"); !v.empty()) cfg.solver.max_sweeps = to_int("max_sweeps", v);
  if (auto v = take("tol"); !v.empty()) cfg.solver.tol = to_double("tol", v);
  if (auto v = take("coordinate_order"); !v.empty())
    cfg.solver.order = coordinate_order_from_string(v);
  if (auto v = take("rho"); !v.empty()) cfg.solver.rho = to_double("rho", v);
  if (auto v = take("reinversion_period"); !v.empty())
    cfg.solver.reinversion_period = to_int("reinversion_period", v);

  if (auto v = take("solvers"); !v.empty()) {
    cfg.solvers.clear();
    for (const auto& name : split_list(v))
      cfg.solvers.push_back(estimator_kind_from_string(name));
    if (cfg.solvers.empty()) throw std::invalid_argument("solvers list is empty");
  }
  if (auto v = take("trials"); !v.empty()) cfg.trials = to_int("trials", v);
  if (auto v = take("fixed_pilots"); !v.empty()) cfg.fixed_pilots = to_bool("fixed_pilots", v);
  if (auto v = take("threads"); !v.empty()) cfg.threads = to_int("threads", v);
  if (auto v = take("nu_grid_points"); !v.empty())
    cfg.nu_grid_points = to_int("nu_grid_points", v);
  if (auto v = take("nu_grid_min"); !v.empty()) cfg.nu_grid_min = to_double("nu_grid_min", v);
  if (auto v = take("nu_grid_max"); !v.empty()) cfg.nu_grid_max = to_double("nu_grid_max", v);

  if (!kv.empty())
    throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");

  cfg.scenario.validate();
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return run_config_from_text(buffer.str());
}

std::string run_config_to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "# scenario\n";
  out << "dc = " << cfg.scenario.dc << "\n";
  out << "kc = " << cfg.scenario.kc << "\n";
  out << "ac = " << cfg.scenario.ac << "\n";
  out << "m = " << cfg.scenario.m << "\n";
  out << "sigma2 = " << format_double(cfg.scenario.sigma2) << "\n";
  out << "snr_db_active = " << format_double(cfg.scenario.snr_db_active) << "\n";
  out << "pilot_kind = " << to_string(cfg.scenario.pilot_kind) << "\n";
  out << "channel_kind = " << to_string(cfg.scenario.channel_kind) << "\n";
  out << "m_eff_fraction = " << format_double(cfg.scenario.m_eff_fraction) << "\n";
  out << "rng_seed = " << cfg.scenario.rng_seed << "\n";
  out << "# solver\n";
  out << "max_sweeps = " << cfg.solver.max_sweeps << "\n";
  if (cfg.solver.tol >= 0.0) out << "tol = " << format_double(cfg.solver.tol) << "\n";
  out << "coordinate_order = " << to_string(cfg.solver.order) << "\n";
  if (cfg.solver.rho > 0.0) out << "rho = " << format_double(cfg.solver.rho) << "\n";
  out << "reinversion_period = " << cfg.solver.reinversion_period << "\n";
  out << "# harness\n";
  out << "solvers = ";
  for (std::size_t i = 0; i < cfg.solvers.size(); ++i)
    out << (i ? "," : "") << to_string(cfg.solvers[i]);
  out << "\n";
  out << "trials = " << cfg.trials << "\n";
  out << "fixed_pilots = " << (cfg.fixed_pilots ? "true" : "false") << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "nu_grid_points = " << cfg.nu_grid_points << "\n";
  out << "nu_grid_min = " << format_double(cfg.nu_grid_min) << "\n";
  out << "nu_grid_max = " << format_double(cfg.nu_grid_max) << "\n";
  return out.str();
}

void write_matrix_binary(const std::filesystem::path& path, const MatrixXcd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(kMatrixMagic, sizeof(kMatrixMagic));
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  // Column-major interleaved (re, im); std::complex<double> has exactly
  // that layout.
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(cplx) * m.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MatrixXcd read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMatrixMagic, sizeof(magic)) != 0)
    throw std::runtime_error("bad matrix magic in " + path.string());
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in) throw std::runtime_error("truncated matrix header in " + path.string());
  MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(cplx) * m.size()));
  if (!in) throw std::runtime_error("truncated matrix data in " + path.string());
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const MatrixXcd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const cplx v = m(i, j);
      if (j) out << ',';
      out << format_double(v.real()) << (v.imag() < 0 ? "" : "+")
          << format_double(v.imag()) << 'j';
    }
    out << '\n';
  }
}

void write_gamma_csv(const std::filesystem::path& path, const VectorXd& gamma) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "index,value\n";
  for (Eigen::Index k = 0; k < gamma.size(); ++k)
    out << k << ',' << format_double(gamma[k]) << '\n';
}

std::string diagnostics_to_json(const SolveDiagnostics& diagnostics,
                                const VectorXd& gamma_hat) {
  nlohmann::json j;
  j["sweep_costs"] = diagnostics.sweep_costs;
  j["final_cost"] = diagnostics.final_cost;
  j["sweeps"] = diagnostics.sweeps;
  j["converged"] = diagnostics.converged;
  j["last_max_step"] = diagnostics.last_max_step;
  j["numerical_faults"] = diagnostics.numerical_faults;
  j["consumed_hash"] = diagnostics.consumed_hash;
  j["gamma_hat"] = std::vector<double>(gamma_hat.data(),
                                       gamma_hat.data() + gamma_hat.size());
  return j.dump(2);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace actdet
