#include "morl/harness.hpp"

#include "morl/learners/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;

namespace morl::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) + ": empty key");
    c.kv_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override: expected key=value, got `" + assignment + "`");
  kv_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing key `" + key + "`");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

scalar_t Config::get_real(const std::string& key) const {
  const std::string raw = get_string(key);
  char* end = nullptr;
  const scalar_t v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0')
    throw ConfigError("config: key `" + key + "`: not a number: `" + raw + "`");
  return v;
}

scalar_t Config::get_real(const std::string& key, scalar_t fallback) const {
  return has(key) ? get_real(key) : fallback;
}

long Config::get_int(const std::string& key) const {
  const std::string raw = get_string(key);
  char* end = nullptr;
  const long v = std::strtol(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0')
    throw ConfigError("config: key `" + key + "`: not an integer: `" + raw + "`");
  return v;
}

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : kv_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : canonical()) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_real(scalar_t v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<int> parse_int_list(const std::string& raw, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(raw);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError("config: key `" + key + "`: not an integer list: `" + raw + "`");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ConfigError("config: key `" + key + "`: empty list");
  return out;
}

bool is_linear(const std::string& method) { return method.rfind("glinear", 0) == 0; }

/// Fills env/method-dependent defaults and checks the categorical keys,
/// naming every offending key at once.
Config resolve_run_config(const Config& in) {
  Config c = in;
  std::vector<std::string> bad;
  for (const char* k : {"method", "env"})
    if (!c.has(k)) bad.push_back(std::string("missing `") + k + "`");
  if (!bad.empty()) {
    std::string msg = "config:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
  const std::string method = c.get_string("method");
  const std::string env_id = c.get_string("env");
  if (method != "gtlo" && method != "gtlo-tabular" && method != "glinear" &&
      method != "glinear-tabular" && method != "outer-loop-gtlo")
    bad.push_back("`method`=" + method);
  if (env_id != "dst" && env_id != "surrogate") bad.push_back("`env`=" + env_id);
  if (!bad.empty()) {
    std::string msg = "config: invalid values:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }

  auto def = [&](const std::string& k, const std::string& v) {
    if (!c.has(k)) c.set(k, v);
  };
  def("encoding", "one-hot");
  def("seed", "0");
  def("total_steps", "250000");
  def("eval_period", "1000");
  if (is_linear(method)) {
    def("pref_lo", "0");
    def("pref_hi", "1");
    def("gamma", "0.9");
    // Optimistic table initialization; a mild upper bound on the best
    // achievable discounted scalarized return.
    def("q_init", env_id == "dst" ? "20" : "1");
  } else {
    def("gamma_0", "1");
    def("gamma_1", "1");
    if (env_id == "dst") {
      def("pref_lo", "0.5");
      def("pref_hi", "100");
    } else {
      def("pref_lo", "0");
      def("pref_hi", "1.2");
    }
  }
  def("pref_count", "100");
  if (env_id == "dst") {
    def("ref_0", "0");
    def("ref_1", "-25");
    def("match_tol", "1e-9");
  } else {
    def("ref_0", "-0.1");
    def("ref_1", "-0.1");
    def("match_tol", "1e-6");
  }
  def("learning_rate", "0.001");
  def("tabular_alpha", "0.1");
  // Deterministic transitions tolerate a constant step size, which
  // propagates long-horizon values much faster than the decayed schedule.
  def("alpha_decay", env_id == "dst" ? "none" : "sqrt");
  def("batch_size", "32");
  def("batches_per_step", "8");
  def("target_sync", "5000");
  def("warmup", "1000");
  def("eps_start", "1");
  def("eps_end", "0.05");
  def("eps_decay_frac", "0.2");
  def("grad_clip", "10");
  def("mlp_trunk", "128,64");
  def("mlp_head0", "64");
  def("mlp_head1", "64,32");
  def("out", "runs/" + method + "-" + env_id + "-s" + c.get_string("seed"));
  return c;
}

std::string output_directory(const Config& c) {
  const char* root = std::getenv("MORL_OUT");
  const fs::path out = c.get_string("out");
  if (out.is_absolute()) return out.string();
  return ((root ? fs::path(root) : fs::path(".")) / out).string();
}

learners::TrainConfig make_train_config(const Config& c) {
  learners::TrainConfig tc;
  const std::string method = c.get_string("method");
  if (is_linear(method)) {
    const scalar_t g = c.get_real("gamma");
    tc.gammas = {g, g};
  } else {
    tc.gammas = {c.get_real("gamma_0"), c.get_real("gamma_1")};
  }
  tc.learning_rate = c.get_real("learning_rate");
  tc.tabular_alpha = c.get_real("tabular_alpha");
  tc.batch_size = static_cast<int>(c.get_int("batch_size"));
  tc.batches_per_step = static_cast<int>(c.get_int("batches_per_step"));
  tc.target_sync = c.get_int("target_sync");
  tc.warmup = c.get_int("warmup");
  tc.eps_start = c.get_real("eps_start");
  tc.eps_end = c.get_real("eps_end");
  tc.eps_decay_frac = c.get_real("eps_decay_frac");
  tc.grid = learners::PreferenceGrid{c.get_real("pref_lo"), c.get_real("pref_hi"),
                                     static_cast<int>(c.get_int("pref_count"))};
  tc.total_steps = c.get_int("total_steps");
  tc.eval_period = c.get_int("eval_period");
  tc.seed = static_cast<std::uint64_t>(c.get_int("seed"));
  tc.grad_clip = c.get_real("grad_clip");
  tc.mlp.trunk = parse_int_list(c.get_string("mlp_trunk"), "mlp_trunk");
  tc.mlp.heads = {parse_int_list(c.get_string("mlp_head0"), "mlp_head0"),
                  parse_int_list(c.get_string("mlp_head1"), "mlp_head1")};
  tc.validate();
  return tc;
}

std::unique_ptr<learners::Learner> make_learner(const std::string& method, const MomdpEnv& env,
                                                const learners::TrainConfig& tc, scalar_t q_init,
                                                bool decay_alpha) {
  if (method == "gtlo-tabular" || method == "outer-loop-gtlo")
    return std::make_unique<learners::GtloTabularLearner>(env.state_count(), env.action_count(),
                                                          tc.grid, tc.gammas, tc.tabular_alpha,
                                                          tc.seed, decay_alpha);
  if (method == "gtlo")
    return std::make_unique<learners::GtloNetworkLearner>(
        env.observation_size(), env.action_count(), env.objective_count(), tc.grid, tc.mlp,
        tc.gammas, tc.learning_rate, tc.grad_clip, tc.seed);
  if (method == "glinear-tabular")
    return std::make_unique<learners::LinearTabularLearner>(env.state_count(), env.action_count(),
                                                            tc.grid, tc.gammas[0], tc.tabular_alpha,
                                                            tc.seed, q_init, decay_alpha);
  if (method == "glinear")
    return std::make_unique<learners::LinearNetworkLearner>(
        env.observation_size() + 1, env.action_count(), tc.mlp, tc.gammas[0], tc.learning_rate,
        tc.grad_clip, tc.seed);
  throw ConfigError("config: unknown method `" + method + "`");
}

void write_solutions_csv(const std::string& out_dir, long step,
                         const metrics::SolutionSet& solutions) {
  std::ofstream out(out_dir + "/solutions_" + std::to_string(step) + ".csv");
  out << "preference,context,ret_0,ret_1\n";
  for (const auto& rec : solutions)
    out << format_real(rec.preference) << ',' << rec.context << ',' << format_real(rec.ret[0])
        << ',' << format_real(rec.ret[1]) << '\n';
}

void write_metrics_row(std::ostream& out, std::uint64_t run_id, std::uint64_t seed, long step,
                       const metrics::EvalMetrics& m) {
  std::ostringstream id;
  id << std::hex << run_id;
  out << id.str() << ',' << seed << ',' << step << ',' << format_real(m.hypervolume) << ','
      << format_real(m.precision) << ',' << format_real(m.recall) << ',' << format_real(m.f1)
      << ',' << m.n_solutions << '\n';
}

/// Midpoint thresholds between consecutive treasure values, including the
/// r=0 case.
std::vector<scalar_t> outer_loop_preferences(const metrics::ParetoFront& front) {
  std::vector<scalar_t> values;
  values.reserve(front.size());
  for (const auto& p : front) values.push_back(p[0]);
  std::sort(values.begin(), values.end());
  std::vector<scalar_t> prefs;
  scalar_t prev = 0;
  for (scalar_t v : values) {
    prefs.push_back((prev + v) / 2);
    prev = v;
  }
  return prefs;
}

}  // namespace

RunResult run_train(const Config& in) {
  Config c = resolve_run_config(in);
  const std::string method = c.get_string("method");
  const std::string env_id = c.get_string("env");

  std::unique_ptr<MomdpEnv> env;
  std::vector<metrics::ParetoFront> fronts;
  if (env_id == "dst") {
    const envs::DstConfig dst_cfg = c.has("dst_layout")
                                        ? envs::load_dst_layout(c.get_string("dst_layout"))
                                        : envs::DstConfig::classic();
    env = std::make_unique<envs::DeepSeaTreasure>(dst_cfg,
                                                  parse_encoding(c.get_string("encoding")));
    fronts.push_back(metrics::dst_pareto_oracle(dst_cfg));
  } else {
    const envs::SurrogateConfig scfg;
    env = std::make_unique<envs::SurrogateEnv>(scfg);
    for (int k = 0; k < scfg.context_bins; ++k)
      fronts.push_back(metrics::surrogate_pareto_oracle(scfg, k));
  }

  learners::TrainConfig tc = make_train_config(c);
  const RewardVector ref{c.get_real("ref_0"), c.get_real("ref_1")};
  const scalar_t match_tol = c.get_real("match_tol");

  std::vector<scalar_t> outer_prefs;
  if (method == "outer-loop-gtlo") {
    outer_prefs = outer_loop_preferences(fronts[0]);
    if (!c.has("outer_steps_per_pref"))
      c.set("outer_steps_per_pref",
            std::to_string(tc.total_steps / static_cast<long>(outer_prefs.size())));
  }

  const std::string out_dir = output_directory(c);
  fs::create_directories(out_dir);
  {
    std::ofstream snapshot(out_dir + "/resolved_config.txt");
    snapshot << c.canonical();
  }
  // The run identity must not depend on where the artifacts land: two runs of
  // one configuration into different directories are the same experiment.
  Config identity;
  for (const auto& [key, value] : c.entries())
    if (key != "out") identity.set(key, value);
  const std::uint64_t run_id = identity.hash();

  std::ofstream metrics_csv(out_dir + "/eval_metrics.csv");
  metrics_csv << "run_id,seed,step,hypervolume,precision,recall,f1,n_solutions\n";

  const std::uint64_t eval_seed = tc.seed ^ 0x2545f4914f6cdd1dull;
  const std::vector<scalar_t> eval_grid = tc.grid.values();
  metrics::EvalMetrics last;

  if (method == "outer-loop-gtlo") {
    const long per_pref = c.get_int("outer_steps_per_pref");
    const bool decay_alpha = c.get_string("alpha_decay") == "sqrt";
    std::uint64_t next_learner_seed = tc.seed * 2654435761ull + 1;
    learners::LearnerFactory factory = [&](scalar_t p) {
      return std::make_unique<learners::GtloTabularLearner>(
          env->state_count(), env->action_count(), learners::PreferenceGrid{p, p, 1}, tc.gammas,
          tc.tabular_alpha, next_learner_seed++, decay_alpha);
    };
    // Evaluates the union of the per-preference greedy policies, each learner
    // queried at its own pinned threshold.
    auto outer_hook = [&](long step, const std::vector<std::unique_ptr<learners::Learner>>& ls) {
      metrics::SolutionSet solutions;
      for (std::size_t k = 0; k < ls.size(); ++k) {
        std::unique_ptr<MomdpEnv> rollout_env = env->clone();
        rollout_env->seed(eval_seed);
        rollout_env->reset();
        vector_t total = vector_t::Zero(rollout_env->objective_count());
        const Preference pref = ls[k]->preference_from(outer_prefs[k]);
        while (!rollout_env->terminal()) {
          const int a =
              learners::greedy_action(ls[k]->online(), rollout_env->current_state(), pref);
          total += rollout_env->step(a).reward.values();
        }
        solutions.push_back({outer_prefs[k], 0, RewardVector(std::move(total))});
      }
      std::vector<RewardVector> returns;
      for (const auto& rec : solutions) returns.push_back(rec.ret);
      metrics::EvalMetrics m;
      m.hypervolume = metrics::hypervolume_2d(returns, ref);
      const metrics::CoverageScores s = metrics::coverage_scores(solutions, fronts[0], match_tol);
      m.precision = s.precision;
      m.recall = s.recall;
      m.f1 = s.f1;
      m.precision_undefined = s.precision_undefined;
      m.n_solutions = static_cast<int>(pareto_filter(returns).size());
      write_metrics_row(metrics_csv, run_id, tc.seed, step, m);
      write_solutions_csv(out_dir, step, solutions);
      last = m;
    };
    const metrics::SolutionSet finals =
        learners::outer_loop_train(*env, outer_prefs, per_pref, factory, tc, outer_hook);
    write_solutions_csv(out_dir, tc.total_steps + 1, finals);
  } else {
    const std::string decay = c.get_string("alpha_decay");
    if (decay != "sqrt" && decay != "none")
      throw ConfigError("config: key `alpha_decay`: expected sqrt or none, got `" + decay + "`");
    std::unique_ptr<learners::Learner> learner =
        make_learner(method, *env, tc, c.get_real("q_init", 0.0), decay == "sqrt");
    learners::EvalHook hook = [&](long step, const learners::GeneralizedQ& q) {
      const metrics::EvalResult res = metrics::evaluation_phase(
          q, *env, eval_grid, [&](scalar_t v) { return learner->preference_from(v); }, ref, fronts,
          match_tol, eval_seed);
      write_metrics_row(metrics_csv, run_id, tc.seed, step, res.metrics);
      write_solutions_csv(out_dir, step, res.solutions);
      last = res.metrics;
    };
    learners::train(*env, *learner, tc, hook);
    std::ofstream ckpt(out_dir + "/checkpoint.txt");
    learner->save(ckpt);
  }

  return RunResult{last, out_dir, run_id};
}

namespace {

struct RunData {
  std::string method;
  long seed = 0;
  struct Row {
    long step;
    scalar_t hv, precision, recall, f1;
  };
  std::vector<Row> rows;
  scalar_t steps_to_full_front = std::numeric_limits<scalar_t>::infinity();
};

bool load_run(const std::string& dir, RunData& run) {
  std::ifstream cfg_in(dir + "/resolved_config.txt");
  if (!cfg_in) return false;
  std::string line;
  while (std::getline(cfg_in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    if (key == "method") run.method = line.substr(eq + 1);
    if (key == "seed") run.seed = std::strtol(line.c_str() + eq + 1, nullptr, 10);
  }
  if (run.method.empty()) return false;

  std::ifstream csv(dir + "/eval_metrics.csv");
  if (!csv) return false;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> fields;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (fields.size() < 8) continue;
    RunData::Row row;
    row.step = std::strtol(fields[2].c_str(), nullptr, 10);
    row.hv = std::strtod(fields[3].c_str(), nullptr);
    row.precision = std::strtod(fields[4].c_str(), nullptr);
    row.recall = std::strtod(fields[5].c_str(), nullptr);
    row.f1 = std::strtod(fields[6].c_str(), nullptr);
    run.rows.push_back(row);
    if (row.recall >= 1.0 - 1e-12 && std::isinf(run.steps_to_full_front))
      run.steps_to_full_front = static_cast<scalar_t>(row.step);
  }
  return !run.rows.empty();
}

scalar_t mean_of(const std::vector<scalar_t>& xs) {
  scalar_t s = 0;
  for (scalar_t x : xs) s += x;
  return s / static_cast<scalar_t>(xs.size());
}

scalar_t sample_std(const std::vector<scalar_t>& xs) {
  if (xs.size() < 2) return 0;
  const scalar_t mu = mean_of(xs);
  scalar_t s = 0;
  for (scalar_t x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<scalar_t>(xs.size() - 1));
}

scalar_t median_of(std::vector<scalar_t> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2;
}

}  // namespace

std::vector<MethodSummary> compare_runs(const std::vector<std::string>& run_dirs,
                                        const std::string& long_csv_path) {
  std::vector<RunData> runs;
  for (const auto& dir : run_dirs) {
    RunData run;
    if (load_run(dir, run)) {
      runs.push_back(std::move(run));
    } else {
      std::cerr << "warning: skipping incomplete run dir " << dir << '\n';
    }
  }

  if (!long_csv_path.empty()) {
    std::ofstream out(long_csv_path);
    out << "method,seed,step,metric,value\n";
    for (const auto& run : runs)
      for (const auto& row : run.rows) {
        out << run.method << ',' << run.seed << ',' << row.step << ",hypervolume,"
            << format_real(row.hv) << '\n';
        out << run.method << ',' << run.seed << ',' << row.step << ",precision,"
            << format_real(row.precision) << '\n';
        out << run.method << ',' << run.seed << ',' << row.step << ",recall,"
            << format_real(row.recall) << '\n';
        out << run.method << ',' << run.seed << ',' << row.step << ",f1," << format_real(row.f1)
            << '\n';
      }
  }

  std::vector<std::string> methods;
  for (const auto& run : runs)
    if (std::find(methods.begin(), methods.end(), run.method) == methods.end())
      methods.push_back(run.method);

  std::vector<MethodSummary> summaries;
  for (const auto& method : methods) {
    std::vector<scalar_t> hv, precision, recall, f1, steps;
    for (const auto& run : runs) {
      if (run.method != method) continue;
      const auto& final_row = run.rows.back();
      hv.push_back(final_row.hv);
      precision.push_back(final_row.precision);
      recall.push_back(final_row.recall);
      f1.push_back(final_row.f1);
      steps.push_back(run.steps_to_full_front);
    }
    MethodSummary s;
    s.method = method;
    s.runs = static_cast<int>(hv.size());
    s.hv_mean = mean_of(hv);
    s.hv_std = sample_std(hv);
    s.precision_mean = mean_of(precision);
    s.precision_std = sample_std(precision);
    s.recall_mean = mean_of(recall);
    s.recall_std = sample_std(recall);
    s.f1_mean = mean_of(f1);
    s.f1_std = sample_std(f1);
    s.median_steps_to_full_front = median_of(steps);
    summaries.push_back(s);
  }
  return summaries;
}

scalar_t hypervolume_from_csv(const std::string& path, const RewardVector& ref) {
  std::ifstream in(path);
  if (!in) throw ConfigError("hypervolume: cannot read " + path);
  std::vector<RewardVector> points;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
    char* end0 = nullptr;
    char* end1 = nullptr;
    const scalar_t x = std::strtod(a.c_str(), &end0);
    const scalar_t y = std::strtod(b.c_str(), &end1);
    if (end0 == a.c_str() || end1 == b.c_str()) continue;  // header or junk line
    points.push_back(RewardVector{x, y});
  }
  return metrics::hypervolume_2d(points, ref);
}

}  // namespace morl::harness
