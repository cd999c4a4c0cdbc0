#pragma once

// Behavioral diagnostics computed from replay logs: per-skill event and
// action distributions, 2-component PCA, skill usage, time series, heatmaps.

#include <array>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "hsd/replay_log.hpp"

namespace hsd::analysis {

using Matrix = Eigen::MatrixXd;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Event kinds tallied per skill, in column order.
inline constexpr std::array<sts2::GameEvent, 6> kTrackedEvents{
    sts2::GameEvent::kGoal,        sts2::GameEvent::kOffensiveRebound,
    sts2::GameEvent::kShotAttempt, sts2::GameEvent::kMadePass,
    sts2::GameEvent::kReceivedPass, sts2::GameEvent::kSteal};
int tracked_event_column(sts2::GameEvent e);  // -1 if not tracked

inline constexpr int kHeatmapRows = 36;  // along the field length
inline constexpr int kHeatmapCols = 18;  // across the width

struct SkillEventMatrix {
  Matrix totals;    // K x E summed over episodes
  Matrix mean;      // per-episode mean
  Matrix std_error; // standard error of the per-episode mean
  int episodes = 0;
};

struct SkillActionMatrix {
  Matrix counts;     // K x A
  Matrix frequency;  // row-normalized; zero rows for unused skills
};

struct UsageReport {
  Matrix possession_usage;  // K x 2: column 0 own team has the ball, column 1 it does not
  std::vector<Matrix> timeseries;  // per episode: N x (number of high-level steps)
  std::vector<Matrix> heatmaps;    // per skill: 36 x 18 occupancy counts
};

struct Tally {
  SkillEventMatrix events;
  SkillActionMatrix actions;
  UsageReport usage;
};

// skills[step][agent]; -1 marks agents that are not tallied.
using SkillTrace = std::vector<std::vector<int>>;

SkillTrace skill_trace(const EpisodeLog& log);

// Attributes each home-team event and action to the acting agent's active
// skill. Throws UsageError when logs and traces do not line up.
Tally tally_by_skill(const std::vector<EpisodeLog>& logs, const std::vector<SkillTrace>& traces,
                     int num_skills);
Tally tally_by_skill(const std::vector<EpisodeLog>& logs, int num_skills);

// possession[step] is whether the home team holds the ball; positions[step][agent].
struct UsageInput {
  SkillTrace skills;
  std::vector<bool> possession;
  std::vector<std::vector<Eigen::Vector2d>> positions;
  int t_seg = 10;
};
UsageReport usage_report(const std::vector<UsageInput>& episodes, int num_skills,
                         double field_half_width, double field_half_length);

// Grid cell of a position; clamped into the grid.
std::pair<int, int> heatmap_cell(const Eigen::Vector2d& pos, double field_half_width,
                                 double field_half_length);

struct Pca2Result {
  Matrix projection;       // rows x 2
  Eigen::Vector2d explained{0.0, 0.0};
  Matrix components;       // cols x 2, unit columns
  bool degenerate = false;
};

// Mean-centered PCA onto the top two directions. Each component's
// largest-magnitude loading is made positive.
Pca2Result pca2(const Matrix& rows);

// Writes the CSV matrices and summary.json into out_dir.
void write_report(const Tally& tally, const std::filesystem::path& out_dir);

}  // namespace hsd::analysis
