#pragma once

// Per-episode replay logs: one JSON header line followed by one JSON line per
// environment step.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hsd/sts2_env.hpp"

namespace hsd {

struct StepRecord {
  int step = 0;
  sts2::GameState state;  // state in which the actions were chosen
  std::vector<int> home_actions;
  std::vector<int> away_actions;
  std::array<double, 2> reward{0.0, 0.0};
  std::vector<sts2::EventRecord> events;
  std::vector<int> skills;  // active skill per home agent; -1 for non-learned agents
};

struct EpisodeLog {
  long episode = 0;
  int agents_per_team = 0;
  int num_skills = 1;
  int t_seg = 1;
  double field_half_width = 10.0;
  double field_half_length = 20.0;
  sts2::Winner winner = sts2::Winner::kNone;
  std::vector<StepRecord> steps;
};

sts2::GameEvent parse_event_name(const std::string& name);

std::string episode_log_to_jsonl(const EpisodeLog& log);
EpisodeLog episode_log_from_jsonl(const std::string& text);

void write_episode_log(const EpisodeLog& log, const std::filesystem::path& path);
EpisodeLog read_episode_log(const std::filesystem::path& path);
// All *.jsonl files of a directory in file-name order.
std::vector<EpisodeLog> read_episode_logs(const std::filesystem::path& dir);

}  // namespace hsd
