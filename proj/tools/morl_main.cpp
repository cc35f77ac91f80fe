#include "morl/harness.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

morl::RewardVector parse_ref(const std::string& raw) {
  const auto comma = raw.find(',');
  if (comma == std::string::npos)
    throw morl::ConfigError("reference point: expected `x,y`, got `" + raw + "`");
  return morl::RewardVector{std::strtod(raw.c_str(), nullptr),
                            std::strtod(raw.c_str() + comma + 1, nullptr)};
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
  morl::harness::Config cfg = morl::harness::Config::from_file(config_path);
  for (const auto& o : overrides) cfg.apply_override(o);
  const morl::harness::RunResult result = morl::harness::run_train(cfg);
  std::printf("run complete: %s\n", result.out_dir.c_str());
  std::printf("final hypervolume=%s precision=%s recall=%s f1=%s n_solutions=%d\n",
              morl::harness::format_real(result.final_metrics.hypervolume).c_str(),
              morl::harness::format_real(result.final_metrics.precision).c_str(),
              morl::harness::format_real(result.final_metrics.recall).c_str(),
              morl::harness::format_real(result.final_metrics.f1).c_str(),
              result.final_metrics.n_solutions);
  return 0;
}

int cmd_oracle(const std::string& env_id, const std::string& ref_raw, int context,
               const std::string& out_path) {
  morl::metrics::ParetoFront front;
  morl::RewardVector ref;
  if (env_id == "dst") {
    front = morl::metrics::dst_pareto_oracle(morl::envs::DstConfig::classic());
    ref = ref_raw.empty() ? morl::RewardVector{0, -25} : parse_ref(ref_raw);
  } else if (env_id == "surrogate") {
    front = morl::metrics::surrogate_pareto_oracle(morl::envs::SurrogateConfig{}, context);
    ref = ref_raw.empty() ? morl::RewardVector{-0.1, -0.1} : parse_ref(ref_raw);
  } else {
    throw morl::ConfigError("oracle: unknown env `" + env_id + "`");
  }
  std::sort(front.begin(), front.end(),
            [](const morl::RewardVector& a, const morl::RewardVector& b) { return a[0] < b[0]; });
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    out = &file;
  }
  *out << "ret_0,ret_1\n";
  for (const auto& p : front)
    *out << morl::harness::format_real(p[0]) << ',' << morl::harness::format_real(p[1]) << '\n';
  std::printf("front size %zu, hypervolume %s (ref %s,%s)\n", front.size(),
              morl::harness::format_real(morl::metrics::hypervolume_2d(front, ref)).c_str(),
              morl::harness::format_real(ref[0]).c_str(),
              morl::harness::format_real(ref[1]).c_str());
  return 0;
}

int cmd_compare(const std::vector<std::string>& run_dirs, const std::string& out_csv) {
  const auto summaries = morl::harness::compare_runs(run_dirs, out_csv);
  std::printf("%-18s %4s %18s %12s %12s %12s %14s\n", "method", "runs", "hv", "precision",
              "recall", "f1", "steps-to-front");
  for (const auto& s : summaries)
    std::printf("%-18s %4d %10.2f±%-6.2f %5.3f±%-5.3f %5.3f±%-5.3f %5.3f±%-5.3f %14.0f\n",
                s.method.c_str(), s.runs, s.hv_mean, s.hv_std, s.precision_mean, s.precision_std,
                s.recall_mean, s.recall_std, s.f1_mean, s.f1_std, s.median_steps_to_full_front);
  return 0;
}

int cmd_hypervolume(const std::string& csv_path, const std::string& ref_raw) {
  const morl::RewardVector ref = parse_ref(ref_raw);
  std::printf("%s\n",
              morl::harness::format_real(morl::harness::hypervolume_from_csv(csv_path, ref)).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-objective RL toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand("train", "run a training experiment from a config file");
  train->add_option("--config", config_path, "key=value config file")->required();
  train->add_option("--set", overrides, "override a config key (key=value, repeatable)");

  std::string oracle_env;
  std::string oracle_ref;
  int oracle_context = 0;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle", "print an exact Pareto front and its hypervolume");
  oracle->add_option("env", oracle_env, "environment id (dst | surrogate)")->required();
  oracle->add_option("--ref", oracle_ref, "reference point `x,y`");
  oracle->add_option("--context", oracle_context, "surrogate context bin");
  oracle->add_option("--out", oracle_out, "write the front CSV to this path");

  std::vector<std::string> run_dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "aggregate completed run directories");
  compare->add_option("dirs", run_dirs, "run directories")->required();
  compare->add_option("--out", compare_out, "long-format CSV output path");

  std::string hv_csv;
  std::string hv_ref;
  auto* hv = app.add_subcommand("hypervolume", "hypervolume of a CSV of points");
  hv->add_option("csv", hv_csv, "CSV with two numeric columns")->required();
  hv->add_option("--ref", hv_ref, "reference point `x,y`")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, overrides);
    if (oracle->parsed()) return cmd_oracle(oracle_env, oracle_ref, oracle_context, oracle_out);
    if (compare->parsed()) return cmd_compare(run_dirs, compare_out);
    if (hv->parsed()) return cmd_hypervolume(hv_csv, hv_ref);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
