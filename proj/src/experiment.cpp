#include "tweedie/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "tweedie/config.hpp"
#include "tweedie/error.hpp"

namespace tweedie {

void ProtocolConfig::validate() const {
  world.validate();
  train.validate();
  if (editorial_days < 1) {
    throw Error(ErrorCode::kInvalidConfig, "editorial_days must be >= 1");
  }
  if (total_days < editorial_days) {
    throw Error(ErrorCode::kInvalidConfig,
                "total_days must be >= editorial_days");
  }
  if (n_runs < 1) throw Error(ErrorCode::kInvalidConfig, "n_runs must be >= 1");
  if (kinds.empty()) throw Error(ErrorCode::kInvalidConfig, "kinds is empty");
  for (const LossKind& k : kinds) validate_kind(k);
}

Sample to_sample(const SessionEvent& event, double watch_scale) {
  Sample s;
  s.title_id = event.title_id;
  s.click_label = event.clicked ? 1 : 0;
  s.watch = event.clicked ? event.watch_seconds / watch_scale : 0.0;
  s.weight = event.clicked ? s.watch : 1.0;
  return s;
}

double RunResult::model_days_total(int editorial_days) const {
  double total = 0.0;
  for (std::size_t d = static_cast<std::size_t>(editorial_days);
       d < daily_watch_seconds.size(); ++d) {
    total += daily_watch_seconds[d];
  }
  return total;
}

std::uint64_t run_seed(const ProtocolConfig& config, int run_index) {
  return derive_seed(config.world.master_seed, "protocol.run",
                     {static_cast<std::uint64_t>(run_index)});
}

RunResult run_protocol(const ProtocolConfig& config, const LossKind& kind,
                       std::uint64_t seed, const World& world,
                       bool keep_events) {
  config.validate();
  validate_kind(kind);
  const std::uint64_t editorial_seed = derive_seed(seed, "protocol.editorial");
  const std::uint64_t session_seed = derive_seed(seed, "protocol.sessions");

  RunResult result;
  std::vector<Sample> samples;
  std::optional<RankerModel> model;

  for (int day = 1; day <= config.total_days; ++day) {
    const auto day_id = static_cast<std::uint32_t>(day);
    std::vector<std::uint32_t> ranking;
    if (day <= config.editorial_days) {
      ranking = editorial_ranking(world, day_id, editorial_seed);
    } else {
      if (!config.warm_start || !model) {
        model = RankerModel::initialized(
            world.n_titles(), kind,
            derive_seed(seed, "protocol.model", {day_id}));
      }
      TrainConfig train_config = config.train;
      train_config.shuffle_seed = derive_seed(
          config.train.shuffle_seed, "protocol.shuffle", {seed, day_id});
      train(*model, samples, train_config);
      ranking = rank_all(*model);
    }

    std::vector<SessionEvent> events =
        simulate_day(ranking, world, day_id, session_seed);
    double watch = 0.0;
    std::uint64_t clicks = 0;
    for (const SessionEvent& e : events) {
      watch += e.watch_seconds;
      clicks += e.clicked ? 1 : 0;
      samples.push_back(to_sample(e, world.config.watch_scale));
    }
    result.daily_watch_seconds.push_back(watch);
    result.daily_clicks.push_back(clicks);
    result.daily_events.push_back(events.size());
    result.final_ranking = std::move(ranking);
    if (keep_events) {
      result.events.insert(result.events.end(), events.begin(), events.end());
    }
  }
  return result;
}

RunResult run_protocol(const ProtocolConfig& config, const LossKind& kind,
                       std::uint64_t seed) {
  const World world = generate_world(config.world);
  return run_protocol(config, kind, seed, world);
}

std::vector<std::string> unique_labels(const std::vector<LossKind>& kinds) {
  std::vector<std::string> labels;
  std::map<std::string, int> seen;
  for (const LossKind& k : kinds) {
    const std::string base = kind_name(k);
    const int count = ++seen[base];
    labels.push_back(count == 1 ? base : base + "#" + std::to_string(count));
  }
  return labels;
}

ExperimentReport run_many(const ProtocolConfig& config,
                          const RunManyOptions& options) {
  config.validate();
  const World world = generate_world(config.world);
  const std::size_t n_kinds = config.kinds.size();
  const auto n_runs = static_cast<std::size_t>(config.n_runs);

  std::vector<RunResult> results(n_kinds * n_runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < results.size(); task = next++) {
      const std::size_t k = task / n_runs;
      const std::size_t r = task % n_runs;
      try {
        results[task] = run_protocol(config, config.kinds[k],
                                     run_seed(config, static_cast<int>(r)),
                                     world, options.keep_run0_events && r == 0);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads =
      std::max(1U, std::min<unsigned>(options.threads,
                                      static_cast<unsigned>(results.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  report.config = config;
  report.labels = unique_labels(config.kinds);
  const auto days = static_cast<std::size_t>(config.total_days);
  const double users = static_cast<double>(config.world.n_users);
  report.daily_totals.resize(n_kinds);
  report.per_run_totals.resize(n_kinds);
  report.daily_means.assign(n_kinds, std::vector<double>(days, 0.0));
  for (std::size_t k = 0; k < n_kinds; ++k) {
    for (std::size_t r = 0; r < n_runs; ++r) {
      RunResult& run = results[k * n_runs + r];
      report.daily_totals[k].push_back(run.daily_watch_seconds);
      report.per_run_totals[k].push_back(
          run.model_days_total(config.editorial_days));
      for (std::size_t d = 0; d < days; ++d) {
        report.daily_means[k][d] += run.daily_watch_seconds[d] / users;
      }
      if (options.keep_run0_events && r == 0) {
        report.run0_events.push_back(std::move(run.events));
      }
    }
    for (double& m : report.daily_means[k]) m /= static_cast<double>(n_runs);
  }

  std::size_t ref = 0;
  for (std::size_t k = 0; k < n_kinds; ++k) {
    if (std::holds_alternative<loss::TweediePow>(config.kinds[k])) {
      ref = k;
      break;
    }
  }
  report.reference = report.labels[ref];
  const double ref_mean = mean(report.per_run_totals[ref]);
  for (std::size_t k = 0; k < n_kinds; ++k) {
    if (k == ref) continue;
    Comparison c;
    c.baseline = report.labels[k];
    const double base_mean = mean(report.per_run_totals[k]);
    c.lift_percent = base_mean != 0.0 ? (ref_mean - base_mean) / base_mean * 100.0
                                      : 0.0;
    if (n_runs >= 2) {
      try {
        c.welch = welch_t_test(report.per_run_totals[ref], report.per_run_totals[k]);
        c.p_value = c.welch->p;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateVariance) throw;
      }
    }
    report.comparisons.push_back(c);
  }
  return report;
}

std::string report_json(const ExperimentReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["header"] = "master_seed=" + std::to_string(report.config.world.master_seed);
  j["config_echo"] = to_json(report.config);
  j["reference"] = report.reference;
  j["per_run_totals"] = ordered_json::object();
  j["per_run_daily_totals"] = ordered_json::object();
  j["daily_means"] = ordered_json::object();
  for (std::size_t k = 0; k < report.labels.size(); ++k) {
    j["per_run_totals"][report.labels[k]] = report.per_run_totals[k];
    j["per_run_daily_totals"][report.labels[k]] = report.daily_totals[k];
    j["daily_means"][report.labels[k]] = report.daily_means[k];
  }
  j["lifts"] = ordered_json::object();
  j["p_values"] = ordered_json::object();
  j["welch"] = ordered_json::object();
  for (const Comparison& c : report.comparisons) {
    j["lifts"][c.baseline] = c.lift_percent;
    j["p_values"][c.baseline] = c.p_value;
    if (c.welch) {
      j["welch"][c.baseline] = {
          {"t", c.welch->t}, {"dof", c.welch->dof}, {"p", c.welch->p}};
    } else {
      j["welch"][c.baseline] = nullptr;
    }
  }
  return j.dump(2) + "\n";
}

std::string plot_data_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "# master_seed=" << report.config.world.master_seed << '\n';
  out << "kind,day,mean_watch_seconds\n";
  for (std::size_t k = 0; k < report.labels.size(); ++k) {
    for (std::size_t d = 0; d < report.daily_means[k].size(); ++d) {
      out << report.labels[k] << ',' << d + 1 << ',' << report.daily_means[k][d]
          << '\n';
    }
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
}

}  // namespace

void emit_report(const ExperimentReport& report, const ReportPaths& paths) {
  if (report.labels.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "report has no kinds");
  }
  const std::string json = report_json(report);
  const std::string plot = plot_data_csv(report);
  write_file(paths.report, json);
  write_file(paths.plot_data, plot);
}

}  // namespace tweedie
