#pragma once

// Training loop, greedy evaluation against the scripted team, ad-hoc teammate
// experiments, metrics and checkpoints.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hsd/config.hpp"
#include "hsd/curriculum.hpp"
#include "hsd/high_level.hpp"
#include "hsd/low_level.hpp"
#include "hsd/replay.hpp"
#include "hsd/replay_log.hpp"
#include "hsd/skill_decoder.hpp"

namespace hsd {

// Everything needed to act: the learned team's networks plus run state.
struct TeamPolicy {
  TrainConfig config;
  HighPolicy high;        // skills (hierarchical) or primitive actions (qmix_flat)
  LowPolicy low;          // hierarchical and iql_flat
  SkillDecoder decoder;   // hierarchical
  double alpha = 1.0;
  long episode = 0;

  static TeamPolicy create(const TrainConfig& config);

  bool uses_high() const { return config.algorithm != Algorithm::kIqlFlat; }
  bool uses_low() const { return config.algorithm != Algorithm::kQmixFlat; }
  bool hierarchical() const { return is_hierarchical(config.algorithm); }

  // Greedy home actions given observations (obs_dim x N) and active skills.
  std::vector<int> greedy_actions(const nn::Matrix& observations,
                                  const std::vector<int>& skills) const;
  std::vector<int> greedy_skills(const nn::Matrix& observations) const;

  // Directory with params.ckpt, config.json and state.json.
  void save(const std::filesystem::path& dir) const;
  static TeamPolicy load(const std::filesystem::path& dir);
};

struct EvalResult {
  int episodes = 0;
  int wins = 0, losses = 0, draws = 0;
  double win_rate() const { return episodes ? static_cast<double>(wins) / episodes : 0.0; }
  double lose_rate() const { return episodes ? static_cast<double>(losses) / episodes : 0.0; }
  double draw_rate() const { return episodes ? static_cast<double>(draws) / episodes : 0.0; }
  std::vector<EpisodeLog> logs;  // filled when requested
};

// Which home agents are replaced in ad-hoc evaluation. Replacements always
// take the highest agent indices.
struct TeammateSpec {
  enum class Kind { kTraining, kScripted, kFixedSkill };
  Kind kind = Kind::kTraining;
  int count = 0;   // scripted teammates
  int skill = -1;  // pinned skill for one fixed-skill teammate

  static TeammateSpec parse(const std::string& text);  // training | scripted:<n> | skill:<k>
  std::string str() const;
};

// Greedy play at both levels against the scripted away team. Episode i uses
// seeds derived from (seed, i) only, so results do not depend on call order.
EvalResult evaluate(const TeamPolicy& policy, int episodes, uint64_t seed,
                    bool record_logs = false);
EvalResult adhoc_evaluate(const TeamPolicy& policy, const TeammateSpec& spec, int episodes,
                          uint64_t seed, bool record_logs = false);

// Labeled decoder inputs from greedy low-level play with a uniformly random
// skill per agent and segment; episode-final partial segments are dropped.
SkillDataset collect_segments(const TeamPolicy& policy, int count, uint64_t seed);

struct MetricsRecord {
  long episode = 0;
  double win_rate = 0.0, lose_rate = 0.0, draw_rate = 0.0;
  double alpha = 1.0;
  double epsilon = 0.0;
  std::optional<double> high_loss, low_loss, decoder_loss, decoder_accuracy;
  long high_updates = 0, low_updates = 0, decoder_updates = 0;

  std::string to_json_line() const;
};

struct SegmentInfo {
  long episode = 0;
  int start_step = 0;
  std::vector<double> rewards;  // team rewards of the segment's steps
};

// Observation points for instrumentation; all optional.
struct TrainingHooks {
  std::function<void(const HighTransition&, const SegmentInfo&)> on_high_transition;
  std::function<void(const LowTransition&)> on_low_transition;
  std::function<void(long high_steps)> on_high_update;
  std::function<void(long low_steps)> on_low_update;
  std::function<void(long episode, std::size_t dataset_size)> on_decoder_flush;
  std::function<void(const MetricsRecord&)> on_metrics;
};

struct RunArtifacts {
  std::vector<MetricsRecord> metrics;
  TeamPolicy policy;
  std::optional<std::filesystem::path> run_dir;
};

// With out_dir set, writes config.json, metrics.jsonl, checkpoints/ and
// replays/ beneath it.
RunArtifacts run_training(const TrainConfig& config,
                          const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                          const TrainingHooks& hooks = {});

}  // namespace hsd
