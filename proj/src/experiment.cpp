#include "bessrl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <utility>

#include "bessrl/checkpoint.hpp"

namespace bessrl {

namespace {

// rng stream tags: every consumer derives its own engine from (seed, tag), so
// the draw sequences are case-independent and collection order cannot leak
// between updates
constexpr std::uint64_t kStreamInit = 101;
constexpr std::uint64_t kStreamRolloutBase = 100000;  // + update index

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void bad_line(const std::string& origin, int line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& text, const std::string& origin, int line,
                    const std::string& key) {
  try {
    size_t idx = 0;
    double v = std::stod(text, &idx);
    if (idx != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    bad_line(origin, line, "bad numeric value '" + text + "' for " + key);
  }
}

long long parse_int(const std::string& text, const std::string& origin, int line,
                    const std::string& key) {
  try {
    size_t idx = 0;
    long long v = std::stoll(text, &idx);
    if (idx != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    bad_line(origin, line, "bad integer value '" + text + "' for " + key);
  }
}

std::uint64_t parse_u64(const std::string& text, const std::string& origin, int line,
                        const std::string& key) {
  try {
    size_t idx = 0;
    unsigned long long v = std::stoull(text, &idx);
    if (idx != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    bad_line(origin, line, "bad unsigned value '" + text + "' for " + key);
  }
}

CaseId parse_case(const std::string& text, const std::string& origin, int line) {
  std::string t = trim(text);
  if (t == "1" || t == "case1") return CaseId::case1;
  if (t == "2" || t == "case2") return CaseId::case2;
  if (t == "3" || t == "case3") return CaseId::case3;
  bad_line(origin, line, "bad case '" + t + "' (expected 1, 2, or 3)");
}

}  // namespace

void ExperimentConfig::validate() const {
  battery.validate();
  ppo.validate();
  if (!(sigma > 0.0)) throw ConfigError("config: sigma must be > 0");
  if (hidden_size < 1) throw ConfigError("config: hidden_size must be >= 1");
  if (cases.empty()) throw ConfigError("config: at least one case required");
  if (seeds.empty()) throw ConfigError("config: at least one seed required");
  if (max_updates < 0) throw ConfigError("config: max_updates must be >= 0");
  if (patience < 1) throw ConfigError("config: patience must be >= 1");
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw ConfigError("config: n_train, n_val, n_test must all be >= 1");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (price_max < 0.0) throw ConfigError("config: price_max must be >= 0 (0 = series maximum)");
  if (data_csv.empty() && synth_length < n_train + n_val + n_test)
    throw ConfigError("config: synth_length shorter than n_train + n_val + n_test");
  if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  bool penalty_set = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos) bad_line(origin, line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) bad_line(origin, line, "empty key");

    if (key == "data_csv") cfg.data_csv = value;
    else if (key == "synth_length") cfg.synth_length = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "synth_seed") cfg.synth_seed = parse_u64(value, origin, line, key);
    else if (key == "synth_base_usd") cfg.synth.base_usd = parse_double(value, origin, line, key);
    else if (key == "synth_daily_amplitude_usd") cfg.synth.daily_amplitude_usd = parse_double(value, origin, line, key);
    else if (key == "synth_weekly_amplitude_usd") cfg.synth.weekly_amplitude_usd = parse_double(value, origin, line, key);
    else if (key == "synth_noise_sigma_usd") cfg.synth.noise_sigma_usd = parse_double(value, origin, line, key);
    else if (key == "synth_spike_prob") cfg.synth.spike_prob = parse_double(value, origin, line, key);
    else if (key == "synth_spike_magnitude_usd") cfg.synth.spike_magnitude_usd = parse_double(value, origin, line, key);
    else if (key == "synth_floor_usd") cfg.synth.floor_usd = parse_double(value, origin, line, key);
    else if (key == "synth_start_epoch") cfg.synth.start_epoch_seconds = parse_int(value, origin, line, key);
    else if (key == "n_train") cfg.n_train = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "n_val") cfg.n_val = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "n_test") cfg.n_test = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "price_max") cfg.price_max = parse_double(value, origin, line, key);
    else if (key == "capacity_mwh") cfg.battery.capacity_mwh = parse_double(value, origin, line, key);
    else if (key == "e_step_mwh") cfg.battery.e_step_mwh = parse_double(value, origin, line, key);
    else if (key == "eta_c") cfg.battery.eta_c = parse_double(value, origin, line, key);
    else if (key == "eta_d") cfg.battery.eta_d = parse_double(value, origin, line, key);
    else if (key == "soc_min") cfg.battery.soc_min = parse_double(value, origin, line, key);
    else if (key == "soc_max") cfg.battery.soc_max = parse_double(value, origin, line, key);
    else if (key == "deg_cost_per_mwh") cfg.battery.deg_cost_per_mwh = parse_double(value, origin, line, key);
    else if (key == "soc_init") cfg.battery.soc_init = parse_double(value, origin, line, key);
    else if (key == "gamma") cfg.ppo.gamma = parse_double(value, origin, line, key);
    else if (key == "gae_lambda") cfg.ppo.gae_lambda = parse_double(value, origin, line, key);
    else if (key == "clip_eps") cfg.ppo.clip_eps = parse_double(value, origin, line, key);
    else if (key == "c1") cfg.ppo.c1 = parse_double(value, origin, line, key);
    else if (key == "c2") cfg.ppo.c2 = parse_double(value, origin, line, key);
    else if (key == "epochs_per_update") cfg.ppo.epochs_per_update = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "lr") cfg.ppo.lr = parse_double(value, origin, line, key);
    else if (key == "bptt_window") cfg.ppo.bptt_window = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "penalty_coeff") { cfg.ppo.penalty_coeff = parse_double(value, origin, line, key); penalty_set = true; }
    else if (key == "sigma") cfg.sigma = parse_double(value, origin, line, key);
    else if (key == "hidden_size") cfg.hidden_size = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "cases") {
      cfg.cases.clear();
      for (const std::string& part : split(value, ','))
        cfg.cases.push_back(parse_case(part, origin, line));
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const std::string& part : split(value, ','))
        cfg.seeds.push_back(parse_u64(trim(part), origin, line, key));
    }
    else if (key == "max_updates") cfg.max_updates = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "patience") cfg.patience = static_cast<int>(parse_int(value, origin, line, key));
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "workers") cfg.workers = static_cast<int>(parse_int(value, origin, line, key));
    else bad_line(origin, line, "unknown key '" + key + "'");
  }
  if (!penalty_set) cfg.ppo.penalty_coeff = cfg.ppo.c2;
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config " + path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

Dataset build_dataset(const ExperimentConfig& cfg) {
  Dataset data;
  if (!cfg.data_csv.empty()) data.series = load_csv(cfg.data_csv);
  else data.series = synth_prices(cfg.synth_length, cfg.synth_seed, cfg.synth);
  if (cfg.price_max > 0.0) data.series.price_max = cfg.price_max;
  if (!(data.series.price_max > 0.0))
    throw DataError("dataset: maximum price is not positive; set price_max explicitly");
  data.segments = chrono_split(data.series, cfg.n_train, cfg.n_val, cfg.n_test);
  return data;
}

EvalResult evaluate_policy(const NetworkParams& params, const PriceSeries& series, Segment segment,
                           const BatteryParams& battery) {
  battery.validate();
  if (segment.length <= 0) throw ContractError("evaluate_policy: empty segment");
  if (segment.start < 0 || segment.start + segment.length > series.size())
    throw ContractError("evaluate_policy: segment outside the series");
  if (!(series.price_max > 0.0))
    throw ContractError("evaluate_policy: series.price_max must be > 0");

  EvalResult result;
  result.steps = segment.length;
  result.trajectory.reserve(static_cast<size_t>(segment.length));
  HiddenState hidden = HiddenState::zeros(params.hidden_size());
  EnvState env = env_reset(battery, segment.start);
  for (int i = 0; i < segment.length; ++i) {
    double price = series.prices_usd[static_cast<size_t>(segment.start + i)];
    Observation obs{env.soc, price / series.price_max};
    PolicyOut out = policy_forward(obs, hidden, params);
    auto [next, reward, info] = env_step(env, out.mu, price, battery);
    (void)reward;
    result.trajectory.push_back(
        {env.t, price, env.soc, out.mu, info.a_eff, info.clamped, info.step_profit_usd()});
    env = next;
  }
  result.charging_cost_usd = env.charging_cost_usd;
  result.discharging_revenue_usd = env.discharging_revenue_usd;
  result.degradation_cost_usd = env.degradation_cost_usd;
  result.total_profit_usd = env.total_profit_usd();
  return result;
}

RunResult run_case(const ExperimentConfig& cfg, const Dataset& data, CaseId case_id,
                   std::uint64_t seed) {
  PpoConfig ppo = cfg.ppo;
  ppo.case_id = case_id;
  ppo.validate();

  RunResult run;
  run.case_id = case_id;
  run.seed = seed;

  Rng init_rng(mix_seed(seed, kStreamInit));
  NetworkParams params =
      NetworkParams::init(kObservationSize, cfg.hidden_size, cfg.sigma, init_rng);
  AdamState adam = AdamState::init(std::as_const(params).tensors(), ppo.lr);

  EvalResult val0 = evaluate_policy(params, data.series, data.segments.val, cfg.battery);
  NetworkParams best = params;
  double best_val = val0.total_profit_usd;
  run.best_update = 0;
  int stale = 0;

  run.curve.reserve(static_cast<size_t>(cfg.max_updates));
  try {
    for (int update = 1; update <= cfg.max_updates; ++update) {
      Rng rollout_rng(mix_seed(seed, kStreamRolloutBase + static_cast<std::uint64_t>(update)));
      RolloutBuffer buffer =
          collect_rollout(data.series, data.segments.train, cfg.battery, params, ppo, rollout_rng);
      UpdateStats stats = ppo_update(params, buffer, ppo, adam);
      EvalResult val = evaluate_policy(params, data.series, data.segments.val, cfg.battery);
      run.curve.push_back({update, stats.actor_mean, stats.critic_mean, stats.sup_mean,
                           stats.total_mean, val.total_profit_usd});
      run.updates_run = update;
      if (val.total_profit_usd > best_val) {
        best_val = val.total_profit_usd;
        best = params;
        run.best_update = update;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
    }
  } catch (const TrainingError& e) {
    run.failed = true;
    run.fail_reason = e.what();
  }
  run.best_val_profit_usd = best_val;
  run.params = std::move(best);
  if (!run.failed)
    run.test_eval = evaluate_policy(run.params, data.series, data.segments.test, cfg.battery);
  return run;
}

RunFiles run_file_names(CaseId case_id, std::uint64_t seed) {
  std::string tag = std::string(case_name(case_id)) + "_" + std::to_string(seed);
  return {"checkpoint_" + tag + ".bin", "trajectory_" + tag + ".csv", "curve_" + tag + ".csv"};
}

void write_run_files(const std::string& out_dir, const RunResult& run) {
  RunFiles names = run_file_names(run.case_id, run.seed);
  save_checkpoint(out_dir + "/" + names.checkpoint, run.params);

  std::ofstream curve(out_dir + "/" + names.curve, std::ios::trunc);
  if (!curve) throw DataError("cannot write " + out_dir + "/" + names.curve);
  curve << "update,actor,critic,sup,total,val_profit_usd\n";
  for (const CurveRow& row : run.curve)
    curve << row.update << ',' << g17(row.actor) << ',' << g17(row.critic) << ','
          << g17(row.sup) << ',' << g17(row.total) << ',' << g17(row.val_profit_usd) << '\n';
  curve.flush();
  if (!curve) throw DataError("write failed: " + out_dir + "/" + names.curve);

  if (run.failed) return;  // no test rollout to report
  std::ofstream traj(out_dir + "/" + names.trajectory, std::ios::trunc);
  if (!traj) throw DataError("cannot write " + out_dir + "/" + names.trajectory);
  traj << "t,price_usd,soc,mu,a_eff,clamped,step_profit_usd\n";
  for (const TrajectoryRow& row : run.test_eval.trajectory)
    traj << row.t << ',' << g17(row.price_usd) << ',' << g17(row.soc) << ',' << g17(row.mu)
         << ',' << g17(row.a_eff) << ',' << (row.clamped ? 1 : 0) << ','
         << g17(row.step_profit_usd) << '\n';
  traj.flush();
  if (!traj) throw DataError("write failed: " + out_dir + "/" + names.trajectory);
}

namespace {

const char* kMetricsHeader =
    "case,seed,status,steps,charging_cost_avg_usd,discharging_revenue_avg_usd,"
    "degradation_cost_avg_usd,total_profit_avg_usd,charging_cost_usd,discharging_revenue_usd,"
    "degradation_cost_usd,total_profit_usd,updates_run,best_update,best_val_profit_usd,"
    "checkpoint,trajectory,curve";

}  // namespace

void emit_report(const std::string& out_dir, const std::vector<RunResult>& runs) {
  std::string metrics_path = out_dir + "/metrics.csv";
  std::ofstream out(metrics_path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + metrics_path);
  out << kMetricsHeader << '\n';
  double nan = std::numeric_limits<double>::quiet_NaN();
  for (const RunResult& run : runs) {
    RunFiles names = run_file_names(run.case_id, run.seed);
    const EvalResult& ev = run.test_eval;
    bool ok = !run.failed;
    out << case_name(run.case_id) << ',' << run.seed << ',' << (ok ? "ok" : "failed") << ','
        << (ok ? ev.steps : 0) << ',' << g17(ok ? ev.charging_cost_avg_usd() : nan) << ','
        << g17(ok ? ev.discharging_revenue_avg_usd() : nan) << ','
        << g17(ok ? ev.degradation_cost_avg_usd() : nan) << ','
        << g17(ok ? ev.total_profit_avg_usd() : nan) << ','
        << g17(ok ? ev.charging_cost_usd : nan) << ','
        << g17(ok ? ev.discharging_revenue_usd : nan) << ','
        << g17(ok ? ev.degradation_cost_usd : nan) << ','
        << g17(ok ? ev.total_profit_usd : nan) << ',' << run.updates_run << ','
        << run.best_update << ',' << g17(run.best_val_profit_usd) << ',' << names.checkpoint
        << ',' << (ok ? names.trajectory : std::string()) << ',' << names.curve << '\n';
  }
  out.flush();
  if (!out) throw DataError("write failed: " + metrics_path);

  std::string report_path = out_dir + "/report.txt";
  std::ofstream rep(report_path, std::ios::trunc);
  if (!rep) throw DataError("cannot write " + report_path);
  rep << format_report_table(runs);
  rep.flush();
  if (!rep) throw DataError("write failed: " + report_path);
}

std::string format_report_table(const std::vector<RunResult>& runs) {
  std::ostringstream out;
  out << "Test-segment results, 30-minute-averaged USD per step\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-7s %-6s %-7s %14s %14s %14s %14s\n", "case", "seed", "status",
                "chg_cost", "dis_revenue", "deg_cost", "total_profit");
  out << buf;
  for (const RunResult& run : runs) {
    if (run.failed) {
      std::snprintf(buf, sizeof buf, "%-7s %-6llu %-7s %14s %14s %14s %14s\n",
                    case_name(run.case_id), static_cast<unsigned long long>(run.seed), "failed",
                    "-", "-", "-", "-");
    } else {
      const EvalResult& ev = run.test_eval;
      std::snprintf(buf, sizeof buf, "%-7s %-6llu %-7s %14.3f %14.3f %14.3f %14.3f\n",
                    case_name(run.case_id), static_cast<unsigned long long>(run.seed), "ok",
                    ev.charging_cost_avg_usd(), ev.discharging_revenue_avg_usd(),
                    ev.degradation_cost_avg_usd(), ev.total_profit_avg_usd());
    }
    out << buf;
  }
  return out.str();
}

std::vector<MetricsRow> load_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("metrics " + path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw DataError("metrics " + path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw DataError("metrics " + path + ": unexpected header");
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != 18)
      throw DataError("metrics " + path + ":" + std::to_string(lineno) + ": expected 18 fields, got " +
                      std::to_string(f.size()));
    try {
      MetricsRow row;
      row.case_label = f[0];
      row.seed = std::stoull(f[1]);
      row.failed = f[2] == "failed";
      row.steps = std::stoi(f[3]);
      row.charging_cost_avg_usd = std::stod(f[4]);
      row.discharging_revenue_avg_usd = std::stod(f[5]);
      row.degradation_cost_avg_usd = std::stod(f[6]);
      row.total_profit_avg_usd = std::stod(f[7]);
      row.charging_cost_usd = std::stod(f[8]);
      row.discharging_revenue_usd = std::stod(f[9]);
      row.degradation_cost_usd = std::stod(f[10]);
      row.total_profit_usd = std::stod(f[11]);
      row.updates_run = std::stoi(f[12]);
      row.best_update = std::stoi(f[13]);
      row.best_val_profit_usd = std::stod(f[14]);
      row.checkpoint = f[15];
      row.trajectory = f[16];
      row.curve = f[17];
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw DataError("metrics " + path + ":" + std::to_string(lineno) + ": malformed row (" +
                      e.what() + ")");
    }
  }
  return rows;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Dataset data = build_dataset(cfg);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + cfg.out_dir + ": " + ec.message());

  struct Job {
    CaseId case_id;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (CaseId c : cfg.cases)
    for (std::uint64_t s : cfg.seeds) jobs.push_back({c, s});

  std::vector<RunResult> results(jobs.size());
  auto one = [&](size_t i) {
    results[i] = run_case(cfg, data, jobs[i].case_id, jobs[i].seed);
    write_run_files(cfg.out_dir, results[i]);
  };

  if (cfg.workers <= 1 || jobs.size() <= 1) {
    for (size_t i = 0; i < jobs.size(); ++i) one(i);
  } else {
    std::vector<std::future<void>> inflight;
    size_t next = 0;
    while (next < jobs.size() || !inflight.empty()) {
      while (next < jobs.size() && inflight.size() < static_cast<size_t>(cfg.workers))
        inflight.push_back(std::async(std::launch::async, one, next++));
      inflight.front().get();
      inflight.erase(inflight.begin());
    }
  }

  emit_report(cfg.out_dir, results);
  return results;
}

}  // namespace bessrl
