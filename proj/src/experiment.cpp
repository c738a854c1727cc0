#include "eswm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "eswm/oracle.hpp"
#include "eswm/stats.hpp"

namespace eswm {

using nlohmann::json;

namespace {

enum : std::uint64_t { kStreamRun = 10, kStreamRunPopulation = 1, kStreamRunSubmission = 3 };

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::single_auction, "single_auction"},
    {ExperimentKind::reselection, "reselection"},
    {ExperimentKind::beta_sweep, "beta_sweep"},
    {ExperimentKind::oracle_compare, "oracle_compare"},
};

constexpr std::pair<PunctualityLearning::Mode, const char*> kModeNames[] = {
    {PunctualityLearning::Mode::running_mean, "running_mean"},
    {PunctualityLearning::Mode::window, "window"},
    {PunctualityLearning::Mode::exponential, "exponential"},
};

std::vector<std::size_t> size_steps(std::size_t from, std::size_t to, std::size_t step) {
  std::vector<std::size_t> out;
  for (std::size_t k = from; k <= to; k += step) out.push_back(k);
  return out;
}

// 0.1, 0.2, ..., 2.0 computed from integers so every value is the nearest double.
std::vector<double> tenths(int from, int to) {
  std::vector<double> out;
  for (int k = from; k <= to; ++k) out.push_back(k / 10.0);
  return out;
}

// ---- JSON field readers; every failure names the full key path ----

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field, what);
}

std::uint64_t read_u64(const json& v, const std::string& field) {
  // non-negative literals parse as unsigned; anything else is rejected
  if (!v.is_number_unsigned()) fail(field, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t read_size(const json& v, const std::string& field) {
  return static_cast<std::size_t>(read_u64(v, field));
}

double read_double(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

bool read_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) fail(field, "expected true or false");
  return v.get<bool>();
}

std::string read_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

template <typename T, typename Read>
std::vector<T> read_list(const json& v, const std::string& field, Read read) {
  if (!v.is_array()) fail(field, "expected a list");
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(read(v[k], field + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Range read_range(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) fail(field, "expected [low, high]");
  return Range{read_double(v[0], field + "[0]"), read_double(v[1], field + "[1]")};
}

void read_distributions(const json& v, PopulationDistributions& d) {
  if (!v.is_object()) fail("distributions", "expected an object");
  for (const auto& [key, value] : v.items()) {
    const std::string field = "distributions." + key;
    if (key == "max_valuation") d.max_valuation = read_range(value, field);
    else if (key == "task_size") d.task_size = read_range(value, field);
    else if (key == "deadline") d.deadline = read_range(value, field);
    else if (key == "expiry_factor") d.expiry_factor = read_range(value, field);
    else if (key == "alpha") d.alpha = read_range(value, field);
    else if (key == "cost") d.cost = read_range(value, field);
    else if (key == "mu") d.mu = read_range(value, field);
    else if (key == "sigma_factor") d.sigma_factor = read_double(value, field);
    else fail(field, "unknown key");
  }
}

void read_learning(const json& v, PunctualityLearning& l) {
  if (!v.is_object()) fail("learning", "expected an object");
  for (const auto& [key, value] : v.items()) {
    const std::string field = "learning." + key;
    if (key == "mode") {
      const std::string name = read_string(value, field);
      const auto it = std::find_if(std::begin(kModeNames), std::end(kModeNames),
                                   [&](const auto& p) { return name == p.second; });
      if (it == std::end(kModeNames)) fail(field, "unknown mode '" + name + "'");
      l.mode = it->first;
    } else if (key == "window") {
      l.window = read_size(value, field);
    } else if (key == "smoothing") {
      l.smoothing = read_double(value, field);
    } else {
      fail(field, "unknown key");
    }
  }
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

void check(bool ok, const char* field, const std::string& what) {
  if (!ok) fail(field, what);
}

void check_range(const Range& r, const char* field, double min_lo) {
  check(r.lo >= min_lo, field, "lower bound below " + format_number(min_lo));
  check(r.lo <= r.hi, field, "lower bound above upper bound");
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  throw ConfigError("experiment", "unknown experiment '" + name +
                                      "' (single_auction, reselection, beta_sweep, oracle_compare)");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.capacity_grid = size_steps(100, 1000, 100);
  switch (kind) {
    case ExperimentKind::single_auction:
      break;
    case ExperimentKind::reselection:
      c.n_requesters = 2000;
      c.n_workers = 4000;
      break;
    case ExperimentKind::beta_sweep:
      c.capacity_grid = {500};
      c.beta_alpha_grid = tenths(1, 20);
      c.beta_lambda_grid = tenths(1, 20);
      break;
    case ExperimentKind::oracle_compare:
      c.capacity_grid = {100};
      c.requester_grid = size_steps(100, 500, 100);
      break;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides) {
  json doc = json::object();
  if (json_text.find_first_not_of(" \t\r\n") != std::string::npos) {
    try {
      doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw ConfigError("<document>", e.what());
    }
  }
  if (!doc.is_object()) fail("<document>", "expected a JSON object");
  if (overrides.experiment) doc["experiment"] = *overrides.experiment;
  if (overrides.master_seed) doc["master_seed"] = *overrides.master_seed;
  if (overrides.output_dir) doc["output_dir"] = *overrides.output_dir;
  if (overrides.n_runs) doc["n_runs"] = *overrides.n_runs;

  ExperimentKind kind = ExperimentKind::single_auction;
  if (doc.contains("experiment")) {
    kind = experiment_from_string(read_string(doc["experiment"], "experiment"));
  }
  ExperimentConfig c = default_config(kind);

  for (const auto& [key, v] : doc.items()) {
    if (key == "experiment") continue;
    if (key == "n_requesters") c.n_requesters = read_size(v, key);
    else if (key == "n_workers") c.n_workers = read_size(v, key);
    else if (key == "capacity_grid") c.capacity_grid = read_list<std::size_t>(v, key, read_size);
    else if (key == "beta_alpha_grid") c.beta_alpha_grid = read_list<double>(v, key, read_double);
    else if (key == "beta_lambda_grid") c.beta_lambda_grid = read_list<double>(v, key, read_double);
    else if (key == "n_runs") c.n_runs = read_size(v, key);
    else if (key == "master_seed") c.master_seed = read_u64(v, key);
    else if (key == "output_dir") c.output_dir = read_string(v, key);
    else if (key == "rounds") c.rounds = read_size(v, key);
    else if (key == "requester_grid") c.requester_grid = read_list<std::size_t>(v, key, read_size);
    else if (key == "benchmark_effective_pricing") c.benchmark_effective_pricing = read_bool(v, key);
    else if (key == "distributions") read_distributions(v, c.distributions);
    else if (key == "learning") read_learning(v, c.learning);
    else fail(key, "unknown key");
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<document>", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string serialize_config(const ExperimentConfig& c) {
  const auto& d = c.distributions;
  std::string mode;
  for (const auto& [m, name] : kModeNames)
    if (m == c.learning.mode) mode = name;
  json j = {
      {"experiment", to_string(c.experiment)},
      {"n_requesters", c.n_requesters},
      {"n_workers", c.n_workers},
      {"capacity_grid", c.capacity_grid},
      {"beta_alpha_grid", c.beta_alpha_grid},
      {"beta_lambda_grid", c.beta_lambda_grid},
      {"n_runs", c.n_runs},
      {"master_seed", c.master_seed},
      {"output_dir", c.output_dir},
      {"rounds", c.rounds},
      {"requester_grid", c.requester_grid},
      {"benchmark_effective_pricing", c.benchmark_effective_pricing},
      {"distributions",
       {{"max_valuation", range_json(d.max_valuation)},
        {"task_size", range_json(d.task_size)},
        {"deadline", range_json(d.deadline)},
        {"expiry_factor", range_json(d.expiry_factor)},
        {"alpha", range_json(d.alpha)},
        {"cost", range_json(d.cost)},
        {"mu", range_json(d.mu)},
        {"sigma_factor", d.sigma_factor}}},
      {"learning",
       {{"mode", mode}, {"window", c.learning.window}, {"smoothing", c.learning.smoothing}}},
  };
  return j.dump(2) + "\n";
}

void validate(const ExperimentConfig& c) {
  check(c.n_requesters >= 1, "n_requesters", "must be at least 1");
  check(c.n_workers >= 1, "n_workers", "must be at least 1");
  check(c.n_runs >= 1, "n_runs", "must be at least 1");
  check(!c.capacity_grid.empty(), "capacity_grid", "must not be empty");
  for (std::size_t k : c.capacity_grid) check(k >= 1, "capacity_grid", "capacities must be >= 1");
  check(!c.beta_alpha_grid.empty(), "beta_alpha_grid", "must not be empty");
  check(!c.beta_lambda_grid.empty(), "beta_lambda_grid", "must not be empty");
  for (double b : c.beta_alpha_grid)
    check(std::isfinite(b) && b >= 0.0, "beta_alpha_grid", "exponents must be finite and >= 0");
  for (double b : c.beta_lambda_grid)
    check(std::isfinite(b) && b >= 0.0, "beta_lambda_grid", "exponents must be finite and >= 0");
  check(!c.output_dir.empty(), "output_dir", "must not be empty");
  if (c.experiment == ExperimentKind::reselection) {
    check(c.rounds >= 1, "rounds", "must be at least 1");
  }
  if (c.experiment == ExperimentKind::oracle_compare) {
    check(!c.requester_grid.empty(), "requester_grid", "must not be empty");
    for (std::size_t n : c.requester_grid)
      check(n >= 1, "requester_grid", "roster sizes must be >= 1");
  }
  const auto& d = c.distributions;
  check_range(d.max_valuation, "distributions.max_valuation", 0.0);
  check(d.max_valuation.lo > 0.0, "distributions.max_valuation", "lower bound must be positive");
  check_range(d.task_size, "distributions.task_size", 1.0);
  check_range(d.deadline, "distributions.deadline", 0.0);
  check_range(d.expiry_factor, "distributions.expiry_factor", 1.0);
  check_range(d.alpha, "distributions.alpha", 0.0);
  check_range(d.cost, "distributions.cost", 0.0);
  check_range(d.mu, "distributions.mu", 0.0);
  check(d.mu.lo > 0.0, "distributions.mu", "lower bound must be positive");
  check(d.sigma_factor > 0.0 && std::isfinite(d.sigma_factor), "distributions.sigma_factor",
        "must be positive");
  check(c.learning.window >= 1, "learning.window", "must be at least 1");
  check(c.learning.smoothing > 0.0 && c.learning.smoothing <= 1.0, "learning.smoothing",
        "must lie in (0, 1]");
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run) {
  return derive_seed(master_seed, kStreamRun, run);
}

namespace {

MechanismParams eswm_params(std::size_t k, double ba, double bl) {
  MechanismParams p;
  p.capacity = k;
  p.beta_alpha = ba;
  p.beta_lambda = bl;
  return p;
}

MechanismParams benchmark_for(const ExperimentConfig& c, std::size_t k) {
  MechanismParams p = benchmark_params(eswm_params(k, 0.0, 0.0));
  p.effective_pricing = c.benchmark_effective_pricing;
  return p;
}

void label(MetricsRecord& rec, MechanismKind kind, const MechanismParams& p, std::size_t run,
           std::uint64_t seed) {
  rec.mechanism = to_string(kind);
  rec.capacity = p.capacity;
  rec.beta_alpha = p.beta_alpha;
  rec.beta_lambda = p.beta_lambda;
  rec.run = run;
  rec.seed = seed;
}

// One submission quantile per worker and run, shared by every auction of the
// run so mechanisms and capacities are compared on common random numbers.
SubmissionSampler common_sampler(const std::vector<double>& u) {
  return [&u](const RequesterProfile& r, const WorkerProfile& w) {
    return submission_time_from_uniform(w, r.deadline, r.expiry, u.at(w.id.value));
  };
}

void run_auctions(const ExperimentConfig& c, std::size_t run, bool with_benchmark,
                  std::vector<MetricsRecord>& out) {
  const std::uint64_t seed = run_seed(c.master_seed, run);
  Rng pop_rng = make_rng(seed, kStreamRunPopulation);
  const Population pop = draw_population(c.distributions, c.n_requesters, c.n_workers, pop_rng);
  Rng sub_rng = make_rng(seed, kStreamRunSubmission);
  std::vector<double> u(pop.workers.size());
  for (auto& x : u) x = uniform01(sub_rng);
  const SubmissionSampler sampler = common_sampler(u);

  auto one = [&](MechanismKind kind, const MechanismParams& p) {
    const AuctionOutcome o = run_mechanism(kind, pop.requesters, pop.workers, p, sampler);
    MetricsRecord rec = compute_metrics(o, pop.requesters, pop.workers);
    label(rec, kind, p, run, seed);
    out.push_back(std::move(rec));
  };
  for (std::size_t k : c.capacity_grid) {
    for (double ba : c.beta_alpha_grid)
      for (double bl : c.beta_lambda_grid) one(MechanismKind::eswm, eswm_params(k, ba, bl));
    if (with_benchmark) one(MechanismKind::benchmark, benchmark_for(c, k));
  }
}

void run_reselection(const ExperimentConfig& c, std::size_t run, std::vector<MetricsRecord>& out) {
  const std::uint64_t seed = run_seed(c.master_seed, run);
  for (std::size_t k : c.capacity_grid) {
    for (double ba : c.beta_alpha_grid) {
      for (double bl : c.beta_lambda_grid) {
        CompetitionConfig cc;
        cc.n_requesters = c.n_requesters;
        cc.n_workers = c.n_workers;
        cc.rounds = c.rounds;
        cc.platforms = {PlatformSpec{MechanismKind::eswm, eswm_params(k, ba, bl)},
                        PlatformSpec{MechanismKind::benchmark, benchmark_for(c, k)}};
        cc.distributions = c.distributions;
        cc.learning = c.learning;
        cc.seed = seed;
        for (auto& round : run_competition(cc).rounds) {
          for (std::size_t p = 0; p < 2; ++p) {
            round.metrics[p].run = run;
            out.push_back(std::move(round.metrics[p]));
          }
        }
      }
    }
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void run_oracle(const ExperimentConfig& c, std::size_t run, std::vector<OracleRecord>& out) {
  const std::uint64_t seed = run_seed(c.master_seed, run);
  const double ratio = static_cast<double>(c.n_workers) / static_cast<double>(c.n_requesters);
  for (std::size_t n_r : c.requester_grid) {
    const auto n_w = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_r)));
    Rng pop_rng = make_rng(seed, kStreamRunPopulation, n_r);
    const Population pop = draw_population(c.distributions, n_r, std::max<std::size_t>(n_w, 1),
                                           pop_rng);
    const MatrixX<double> scores = score_matrix(pop.requesters, pop.workers);
    for (std::size_t k : c.capacity_grid) {
      const MechanismParams p = eswm_params(k, c.beta_alpha_grid.front(), c.beta_lambda_grid.front());
      OracleRecord rec;
      rec.n_requesters = n_r;
      rec.n_workers = pop.workers.size();
      rec.capacity = k;
      rec.run = run;
      rec.seed = seed;

      auto t0 = std::chrono::steady_clock::now();
      const AuctionOutcome greedy = allocate(pop.requesters, pop.workers, p);
      rec.greedy_seconds = seconds_since(t0);
      for (const auto& m : greedy.matches) {
        rec.esw_greedy += scores(static_cast<Eigen::Index>(m.requester.value),
                                 static_cast<Eigen::Index>(m.worker.value));
      }
      rec.matches_greedy = greedy.matches.size();
      rec.greedy_comparisons = greedy.comparisons;

      t0 = std::chrono::steady_clock::now();
      const Selection best = hungarian_optimal(scores, k);
      rec.hungarian_seconds = seconds_since(t0);
      rec.esw_hungarian = best.welfare;
      rec.matches_hungarian = best.pairs.size();
      rec.esw_top_k = hungarian_top_k(scores, k).welfare;
      out.push_back(rec);
    }
  }
}

// ---- stdout summary ----

std::string ci_cell(std::span<const double> xs) {
  const auto s = stats::summarize(xs);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.4g [%.4g, %.4g]", s.mean, s.ci_low, s.ci_high);
  return buf;
}

void summarize_metrics(const ExperimentConfig& c, const std::vector<MetricsRecord>& records,
                       std::ostream& os) {
  using Key = std::tuple<std::string, std::size_t, double, double, std::size_t>;
  std::map<Key, std::vector<const MetricsRecord*>> groups;
  for (const auto& r : records)
    groups[{r.mechanism, r.capacity, r.beta_alpha, r.beta_lambda, r.round}].push_back(&r);

  os << to_string(c.experiment) << ": " << records.size() << " records, mean [95% CI]\n";
  for (const auto& [key, rs] : groups) {
    const auto& [mech, k, ba, bl, round] = key;
    auto column = [&](auto field) {
      std::vector<double> xs;
      for (const auto* r : rs) xs.push_back(static_cast<double>(field(*r)));
      return ci_cell(xs);
    };
    os << mech << " K=" << k << " beta=(" << format_number(ba) << ", " << format_number(bl) << ")";
    if (round) os << " round=" << round;
    os << " n=" << rs.size() << '\n'
       << "  esw " << column([](const auto& r) { return r.esw; })
       << "  nsw " << column([](const auto& r) { return r.nsw; }) << '\n'
       << "  platform pre " << column([](const auto& r) { return r.platform_utility_pre; })
       << "  post " << column([](const auto& r) { return r.platform_utility_post; }) << '\n'
       << "  avg requester " << column([](const auto& r) { return r.avg_requester_utility; })
       << "  avg worker " << column([](const auto& r) { return r.avg_worker_utility; }) << '\n';
    if (c.experiment == ExperimentKind::reselection) {
      os << "  requesters " << column([](const auto& r) { return r.n_requesters; })
         << "  workers " << column([](const auto& r) { return r.n_workers; }) << '\n';
    }
  }
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

void summarize_oracle(const std::vector<OracleRecord>& records, std::ostream& os) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const OracleRecord*>> groups;
  for (const auto& r : records) groups[{r.n_requesters, r.capacity}].push_back(&r);
  os << "oracle_compare: " << records.size() << " instances, mean [95% CI]\n";
  for (const auto& [key, rs] : groups) {
    std::vector<double> g, h, gap, tg, th;
    for (const auto* r : rs) {
      g.push_back(r->esw_greedy);
      h.push_back(r->esw_hungarian);
      gap.push_back(r->esw_hungarian > 0 ? (r->esw_hungarian - r->esw_greedy) / r->esw_hungarian
                                         : 0.0);
      tg.push_back(r->greedy_seconds);
      th.push_back(r->hungarian_seconds);
    }
    os << "|R|=" << key.first << " |W|=" << rs.front()->n_workers << " K=" << key.second
       << " n=" << rs.size() << '\n'
       << "  esw greedy " << ci_cell(g) << "  hungarian " << ci_cell(h) << '\n'
       << "  relative gap " << ci_cell(gap) << '\n'
       << "  median seconds greedy " << format_number(median(tg)) << "  hungarian "
       << format_number(median(th)) << '\n';
  }
}

}  // namespace

std::string oracle_csv_header() {
  return "n_requesters,n_workers,capacity,run,seed,esw_greedy,esw_hungarian,esw_top_k,"
         "matches_greedy,matches_hungarian,greedy_comparisons";
}

std::string to_csv(std::span<const OracleRecord> records) {
  std::ostringstream os;
  os << oracle_csv_header() << '\n';
  for (const auto& r : records) {
    os << r.n_requesters << ',' << r.n_workers << ',' << r.capacity << ',' << r.run << ','
       << r.seed << ',' << format_number(r.esw_greedy) << ',' << format_number(r.esw_hungarian)
       << ',' << format_number(r.esw_top_k) << ',' << r.matches_greedy << ','
       << r.matches_hungarian << ',' << r.greedy_comparisons << '\n';
  }
  return os.str();
}

ExperimentResult run_records(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult res;
  for (std::size_t run = 0; run < config.n_runs; ++run) {
    switch (config.experiment) {
      case ExperimentKind::single_auction:
        run_auctions(config, run, true, res.records);
        break;
      case ExperimentKind::beta_sweep:
        run_auctions(config, run, false, res.records);
        break;
      case ExperimentKind::reselection:
        run_reselection(config, run, res.records);
        break;
      case ExperimentKind::oracle_compare:
        run_oracle(config, run, res.oracle);
        break;
    }
  }
  return res;
}

std::filesystem::path run_experiment(const ExperimentConfig& config, std::ostream& summary) {
  const ExperimentResult res = run_records(config);
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  const auto path =
      dir / (std::string(to_string(config.experiment)) + "_" + std::to_string(config.master_seed) +
             ".csv");
  if (config.experiment == ExperimentKind::oracle_compare) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << to_csv(res.oracle);
    if (!f.flush()) throw std::runtime_error("failed writing " + path.string());
    summarize_oracle(res.oracle, summary);
  } else {
    emit_csv(res.records, path);
    summarize_metrics(config, res.records, summary);
  }
  summary << "wrote " << path.string() << '\n';
  return path;
}

}  // namespace eswm
