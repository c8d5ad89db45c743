#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tweedie/config.hpp"
#include "tweedie/decompose.hpp"
#include "tweedie/dist_fit.hpp"
#include "tweedie/distribution.hpp"
#include "tweedie/error.hpp"
#include "tweedie/experiment.hpp"
#include "tweedie/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tweedie;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

class Manifest {
 public:
  explicit Manifest(std::string command)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  void set_config(ordered_json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_output(const fs::path& path) { outputs_.push_back(path.string()); }

  ordered_json to_json() const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    ordered_json j;
    j["command"] = command_;
    j["config_echo"] = config_;
    j["master_seed"] = seed_;
    j["versions"] = {
        {"tweedie_lab", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    j["outputs"] = outputs_;
    j["wall_seconds"] = seconds;
    return j;
  }

  void print() const { std::cout << to_json().dump(2) << '\n'; }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  ordered_json config_ = ordered_json::object();
  std::uint64_t seed_ = 0;
  std::vector<std::string> outputs_;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kValidation, "bad number '" + item + "' in " + what);
    }
  }
  if (values.empty()) throw Error(ErrorCode::kValidation, what + " is empty");
  return values;
}

GridRange parse_range(const std::string& text, const GridRange& fallback,
                      const std::string& what) {
  if (text.empty()) return fallback;
  std::string copy = text;
  for (char& c : copy) if (c == ':') c = ',';
  const auto v = parse_numbers(copy, what);
  if (v.size() != 3) {
    throw Error(ErrorCode::kValidation, what + " must be lo:hi:step");
  }
  return GridRange{v[0], v[1], v[2]};
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<int> runs;
  std::string kinds;
  std::optional<double> p;
  bool no_events = false;
};

int cmd_simulate(const SimulateArgs& args, const Globals& g) {
  Manifest manifest("simulate");
  ProtocolConfig config = load_protocol_config(args.config);
  if (g.seed_set) config.world.master_seed = g.seed;
  if (args.runs) config.n_runs = *args.runs;
  if (!args.kinds.empty()) {
    config.kinds = parse_kind_list(args.kinds, args.p.value_or(1.5));
  } else if (args.p) {
    for (LossKind& k : config.kinds) {
      if (std::holds_alternative<loss::TweediePow>(k)) k = loss::TweediePow{*args.p};
    }
  }
  config.validate();
  manifest.set_config(to_json(config));
  manifest.set_seed(config.world.master_seed);

  const fs::path dir = args.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());

  const ExperimentReport report =
      run_many(config, RunManyOptions{g.threads, !args.no_events});
  const ReportPaths paths{dir / "report.json", dir / "plot_data.csv"};
  emit_report(report, paths);
  manifest.add_output(paths.report);
  manifest.add_output(paths.plot_data);

  for (std::size_t k = 0; k < report.run0_events.size(); ++k) {
    const fs::path path = dir / "events" / (report.labels[k] + "_run0.csv");
    std::ofstream out = open_output(path);
    write_event_log(out, report.run0_events[k], config.world.master_seed);
    close_output(out, path);
    manifest.add_output(path);
  }

  for (const Comparison& c : report.comparisons) {
    std::cout << report.reference << " vs " << c.baseline << ": lift "
              << std::setprecision(4) << c.lift_percent << "%, p = " << c.p_value
              << '\n';
  }
  const fs::path manifest_path = dir / "manifest.json";
  manifest.add_output(manifest_path);
  std::ofstream mout = open_output(manifest_path);
  mout << manifest.to_json().dump(2) << '\n';
  close_output(mout, manifest_path);
  manifest.print();
  return 0;
}

// sample ---------------------------------------------------------------------

struct SampleArgs {
  TweedieParams params{0.2, 1.5, 1.5};
  std::size_t n = 100000;
  std::string out;
};

int cmd_sample(const SampleArgs& args, const Globals& g) {
  Manifest manifest("sample");
  args.params.validate();
  manifest.set_config({{"mu", args.params.mu}, {"phi", args.params.phi},
                       {"p", args.params.p}, {"n", args.n}});
  manifest.set_seed(g.seed);
  const std::vector<double> draws = sample(args.params, args.n, g.seed);
  const fs::path path = args.out;
  std::ofstream out = open_output(path);
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "# master_seed=" << g.seed << '\n';
  for (double x : draws) out << x << '\n';
  close_output(out, path);
  manifest.add_output(path);
  manifest.print();
  return 0;
}

// fit ------------------------------------------------------------------------

struct FitArgs {
  std::string sample;
  std::string out;
  std::string mu_grid, p_grid, phi_grid;
  std::string normalization = "none";
  double cap = 10.0;
};

int cmd_fit(const FitArgs& args, const Globals& g) {
  Manifest manifest("fit");
  GridSpec grid;
  grid.mu = parse_range(args.mu_grid, grid.mu, "--mu-grid");
  grid.p = parse_range(args.p_grid, grid.p, "--p-grid");
  grid.phi = parse_range(args.phi_grid, grid.phi, "--phi-grid");
  grid.validate();

  std::ifstream in(args.sample);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + args.sample);
  std::vector<double> data = read_sample(in);
  if (data.empty()) {
    throw Error(ErrorCode::kEmptySample, args.sample + " contains no values");
  }
  if (args.normalization != "none") {
    data = normalize(data, NormalizationSpec{parse_normalization(args.normalization),
                                             args.cap});
  }
  manifest.set_config({{"sample", args.sample},
                       {"n", data.size()},
                       {"normalization", args.normalization},
                       {"cap", args.cap},
                       {"mu_grid", {grid.mu.lo, grid.mu.hi, grid.mu.step}},
                       {"p_grid", {grid.p.lo, grid.p.hi, grid.p.step}},
                       {"phi_grid", {grid.phi.lo, grid.phi.hi, grid.phi.step}}});
  manifest.set_seed(g.seed);

  const FitResult fit = grid_search(data, grid, g.threads);
  const fs::path path = args.out;
  std::ofstream out = open_output(path);
  write_fit(out, fit, g.seed, args.normalization);
  close_output(out, path);
  manifest.add_output(path);
  std::cout << std::setprecision(6) << "best mu=" << fit.best.mu << " p=" << fit.best.p
            << " phi=" << fit.best.phi << " ks=" << fit.best_ks << '\n';
  manifest.print();
  return 0;
}

// decompose ------------------------------------------------------------------

struct DecomposeArgs {
  std::string observations;
  std::vector<std::string> plant;
  int rows = 0;
  double noise = 0.0;
  std::string out;
};

ordered_json coeffs_json(const BasisCoeffs& b) {
  return {{"kind", kind_spec(b.kind)}, {"coeffs", to_std(b.coeffs)}, {"residual", b.residual}};
}

int cmd_decompose(const DecomposeArgs& args, const Globals& g) {
  Manifest manifest("decompose");
  if (args.observations.empty() == args.plant.empty()) {
    throw Error(ErrorCode::kValidation,
                "give exactly one of --observations or --plant");
  }
  MetricObservations obs;
  ordered_json config;
  std::optional<Eigen::VectorXd> planted_t, planted_v;
  if (!args.observations.empty()) {
    std::ifstream in(args.observations);
    if (!in) throw Error(ErrorCode::kIoError, "cannot read " + args.observations);
    obs = read_observations(in);
    config["observations"] = args.observations;
  } else {
    for (const std::string& spec : args.plant) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::kValidation, "--plant expects t=... or v=..., got " + spec);
      }
      const std::string name = spec.substr(0, eq);
      const Eigen::VectorXd values = to_vector(parse_numbers(spec.substr(eq + 1), "--plant"));
      if (name == "t") planted_t = values;
      else if (name == "v") planted_v = values;
      else throw Error(ErrorCode::kValidation, "unknown planted vector '" + name + "'");
    }
    if (!planted_t) throw Error(ErrorCode::kValidation, "--plant needs t=...");
    if (!planted_v) planted_v = Eigen::VectorXd::Ones(planted_t->size());
    if (planted_v->size() != planted_t->size()) {
      throw Error(ErrorCode::kValidation, "planted t and v differ in length");
    }
    const int rows = args.rows > 0 ? args.rows : static_cast<int>(planted_t->size());
    if (args.noise < 0.0) throw Error(ErrorCode::kValidation, "--noise must be >= 0");
    obs = plant_observations(*planted_t, *planted_v, rows, args.noise, g.seed);
    config["plant_t"] = to_std(*planted_t);
    config["plant_v"] = to_std(*planted_v);
    config["rows"] = rows;
    config["noise_sd"] = args.noise;
  }
  manifest.set_config(config);
  manifest.set_seed(g.seed);

  const ProjectionSolution sol = solve_projection(obs);

  ordered_json result;
  result["header"] = "master_seed=" + std::to_string(g.seed);
  result["t"] = to_std(sol.t);
  result["v"] = to_std(sol.v);
  result["t_stderr"] = to_std(sol.t_stderr);
  result["v_stderr"] = to_std(sol.v_stderr);
  result["watch_residual"] = sol.watch_residual;
  result["conversion_residual"] = sol.conversion_residual;

  // The loss library lives in the order-3 coefficient space; composition is
  // only meaningful when the observations use that basis.
  if (sol.t.size() == TaylorOptions{}.order) {
    std::vector<BasisCoeffs> library;
    for (const LossKind& k : {LossKind{loss::TweediePow{1.5}}, LossKind{loss::LogLoss{}},
                              LossKind{loss::WeightedLogLoss{}}, LossKind{loss::MeanSquared{}}}) {
      library.push_back(taylor_coeffs(k, 1.0));
    }
    ordered_json lib = ordered_json::array();
    for (const auto& b : library) lib.push_back(coeffs_json(b));
    result["library"] = lib;
    for (const auto& [name, target] : {std::pair{"compose_watch", &sol.t},
                                        std::pair{"compose_conversion", &sol.v}}) {
      try {
        const Composition c = compose_loss(*target, library);
        result[name] = {{"weights", to_std(c.weights)},
                        {"combination", to_std(c.combination)},
                        {"cosine", c.cosine}};
      } catch (const Error& e) {
        result[name] = {{"error", e.what()}};
      }
    }
  }

  const fs::path path = args.out;
  std::ofstream out = open_output(path);
  out << result.dump(2) << '\n';
  close_output(out, path);
  manifest.add_output(path);
  manifest.print();
  return 0;
}

// gradcheck ------------------------------------------------------------------

struct GradcheckArgs {
  int configurations = 100;
  double corrupt = 0.0;
};

int cmd_gradcheck(const GradcheckArgs& args, const Globals& g) {
  Manifest manifest("gradcheck");
  if (args.configurations < 1) {
    throw Error(ErrorCode::kValidation, "--configs must be >= 1");
  }
  manifest.set_config({{"configs", args.configurations}, {"tolerance", kGradientTolerance}});
  manifest.set_seed(g.seed);
  const auto rows = run_gradient_suite({args.configurations, g.seed, args.corrupt});
  bool all = true;
  std::cout << std::left << std::setw(18) << "check" << std::setw(10) << "configs"
            << std::setw(16) << "max_rel_error" << "result\n";
  for (const GradientRow& r : rows) {
    std::cout << std::left << std::setw(18) << r.name << std::setw(10) << r.configurations
              << std::setw(16) << std::setprecision(3) << std::scientific
              << r.max_relative_error << std::defaultfloat << (r.pass ? "PASS" : "FAIL")
              << '\n';
    all = all && r.pass;
  }
  manifest.print();
  return all ? 0 : 2;
}

int exit_code_for(const Error& e) { return is_validation_error(e.code()) ? 1 : 2; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tweedie loss ranking lab"};
  app.require_subcommand(1);
  Globals g;
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { g.seed = s; g.seed_set = true; },
         "Master seed")
      ->trigger_on_parse();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the multi-day ranking experiment");
  simulate->add_option("--config", sim.config, "Protocol config JSON")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--runs", sim.runs, "Runs per kind");
  simulate->add_option("--kinds", sim.kinds, "Comma list: tweedie,logloss,weighted,mse");
  simulate->add_option("--p", sim.p, "Tweedie power");
  simulate->add_flag("--no-events", sim.no_events, "Skip run-0 event logs");

  SampleArgs smp;
  auto* sample_cmd = app.add_subcommand("sample", "Draw Tweedie samples");
  sample_cmd->add_option("--mu", smp.params.mu, "Mean");
  sample_cmd->add_option("--phi", smp.params.phi, "Dispersion");
  sample_cmd->add_option("--p", smp.params.p, "Tweedie power");
  sample_cmd->add_option("--n", smp.n, "Number of draws");
  sample_cmd->add_option("--out", smp.out, "Output file")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Grid-search Tweedie parameters by KS distance");
  fit_cmd->add_option("--sample", fit.sample, "One value per line")->required();
  fit_cmd->add_option("--out", fit.out, "Grid table output")->required();
  fit_cmd->add_option("--mu-grid", fit.mu_grid, "lo:hi:step");
  fit_cmd->add_option("--p-grid", fit.p_grid, "lo:hi:step");
  fit_cmd->add_option("--phi-grid", fit.phi_grid, "lo:hi:step");
  fit_cmd->add_option("--normalize", fit.normalization, "none, zscore-shifted or scale-only");
  fit_cmd->add_option("--cap", fit.cap, "Upper bound after normalization");

  DecomposeArgs dec;
  auto* dec_cmd = app.add_subcommand("decompose", "Solve metric projections and compose losses");
  dec_cmd->add_option("--observations", dec.observations, "Observation rows file");
  dec_cmd->add_option("--plant", dec.plant, "t=1,2,3 and optionally v=...");
  dec_cmd->add_option("--rows", dec.rows, "Planted rows");
  dec_cmd->add_option("--noise", dec.noise, "Planted noise sd");
  dec_cmd->add_option("--out", dec.out, "Output JSON")->required();

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gc_cmd->add_option("--configs", gc.configurations, "Random configurations per row");
  gc_cmd->add_option("--corrupt", gc.corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return cmd_simulate(sim, g);
    if (*sample_cmd) return cmd_sample(smp, g);
    if (*fit_cmd) return cmd_fit(fit, g);
    if (*dec_cmd) return cmd_decompose(dec, g);
    if (*gc_cmd) return cmd_gradcheck(gc, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
