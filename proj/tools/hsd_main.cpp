// hsd: train, evaluate and analyze skill-discovery agents on the team sports
// simulator.
//
//   hsd train   --config <path> --seed <int> --out <dir>
//   hsd eval    --checkpoint <dir> --episodes <int> [--seed <int>] [--out <dir>]
//   hsd adhoc   --checkpoint <dir> --teammates training|scripted:<n>|skill:<k> [--episodes <int>]
//   hsd analyze --run <dir> [--skills <K>] [--out <dir>]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsd/analysis.hpp"
#include "hsd/trainer.hpp"

namespace {

constexpr int kConfigFailure = 1;
constexpr int kRuntimeFailure = 2;

void print_rates(const hsd::EvalResult& r, const std::string& label) {
  nlohmann::json j{{"teammates", label},
                   {"episodes", r.episodes},
                   {"win_rate", r.win_rate()},
                   {"lose_rate", r.lose_rate()},
                   {"draw_rate", r.draw_rate()}};
  std::cout << j.dump() << std::endl;
}

void write_logs(const hsd::EvalResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& log : r.logs) {
    char name[64];
    std::snprintf(name, sizeof(name), "episode_%05ld.jsonl", log.episode);
    hsd::write_episode_log(log, dir / name);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical skill discovery on a simulated team sport"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Run training from a config file");
  std::string config_path, out_dir;
  long long seed = -1;
  train->add_option("--config", config_path, "JSON config file")->required();
  train->add_option("--seed", seed, "Overrides the config seed");
  train->add_option("--out", out_dir, "Run directory")->required();

  auto* eval = app.add_subcommand("eval", "Greedy evaluation against the scripted team");
  std::string checkpoint;
  int episodes = 100;
  long long eval_seed = 0;
  std::string eval_out;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  eval->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--out", eval_out, "Write replay logs here");

  auto* adhoc = app.add_subcommand("adhoc", "Evaluate with substituted teammates");
  std::string teammates;
  adhoc->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  adhoc->add_option("--teammates", teammates, "training | scripted:<n> | skill:<k>")->required();
  adhoc->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
  adhoc->add_option("--seed", eval_seed, "Evaluation seed");

  auto* analyze = app.add_subcommand("analyze", "Behavioral analysis of replay logs");
  std::string run_dir, analyze_out;
  int skills = 0;
  analyze->add_option("--run", run_dir, "Run directory (reads <run>/replays)")->required();
  analyze->add_option("--skills", skills, "Number of skills (default: from the logs)");
  analyze->add_option("--out", analyze_out, "Output directory (default: <run>/analysis)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }

  try {
    if (*train) {
      hsd::TrainConfig config = hsd::load_config(config_path);
      if (seed >= 0) config.seed = static_cast<uint64_t>(seed);
      const auto art = hsd::run_training(config, std::filesystem::path(out_dir));
      if (!art.metrics.empty()) std::cout << art.metrics.back().to_json_line() << std::endl;
    } else if (*eval) {
      const auto policy = hsd::TeamPolicy::load(checkpoint);
      const auto r = hsd::evaluate(policy, episodes, static_cast<uint64_t>(eval_seed), !eval_out.empty());
      if (!eval_out.empty()) write_logs(r, eval_out);
      print_rates(r, "training");
    } else if (*adhoc) {
      const auto policy = hsd::TeamPolicy::load(checkpoint);
      const auto spec = hsd::TeammateSpec::parse(teammates);
      const auto r = hsd::adhoc_evaluate(policy, spec, episodes, static_cast<uint64_t>(eval_seed));
      print_rates(r, spec.str());
    } else if (*analyze) {
      const std::filesystem::path run(run_dir);
      const auto logs = hsd::read_episode_logs(run / "replays");
      if (logs.empty()) throw std::runtime_error("no replay logs under " + (run / "replays").string());
      const int k = skills > 0 ? skills : logs.front().num_skills;
      const auto tally = hsd::analysis::tally_by_skill(logs, k);
      const std::filesystem::path out = analyze_out.empty() ? run / "analysis" : std::filesystem::path(analyze_out);
      hsd::analysis::write_report(tally, out);
      std::cout << "wrote " << out.string() << std::endl;
    }
  } catch (const hsd::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return kConfigFailure;
  } catch (const hsd::sts2::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kRuntimeFailure;
  }
  return 0;
}
