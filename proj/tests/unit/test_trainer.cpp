#include <doctest.h>

#include <filesystem>

#include "hsd/trainer.hpp"
#include "oracles.hpp"

using namespace hsd;

namespace {

TrainConfig small_config(Algorithm algo, int k) {
  TrainConfig c;
  c.algorithm = algo;
  c.num_skills = k;
  c.env.agents_per_team = 2;
  c.env.max_steps = 60;
  c.total_episodes = 6;
  c.eval_every = 3;
  c.eval_episodes = 2;
  c.minibatch = 16;
  c.train_every = 5;
  c.decoder_batch = 20;
  c.decoder_minibatch = 10;
  c.decoder_passes = 2;
  c.decoder_hidden = 8;
  c.low_hidden = {16, 16};
  c.high_hidden = {16, 16};
  c.flat_hidden = {16, 16};
  c.mixer_embed = 8;
  c.checkpoint_every = 0;
  c.final_eval_episodes = 0;
  c.seed = 42;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hsd_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("zero episodes produce no metrics") {
  TrainConfig c = small_config(Algorithm::kHsd, 4);
  c.total_episodes = 0;
  const auto run = run_training(c);
  CHECK(run.metrics.empty());
}

TEST_CASE("training is deterministic for a fixed seed") {
  for (Algorithm a : {Algorithm::kHsd, Algorithm::kQmixFlat, Algorithm::kIqlFlat,
                      Algorithm::kHsdScripted, Algorithm::kHsdExt}) {
    const int k = (a == Algorithm::kQmixFlat || a == Algorithm::kIqlFlat) ? 1 : 3;
    const TrainConfig c = small_config(a, k);
    const auto r1 = run_training(c);
    const auto r2 = run_training(c);
    REQUIRE(r1.metrics.size() == 2);
    for (std::size_t i = 0; i < r1.metrics.size(); ++i)
      CHECK(r1.metrics[i].to_json_line() == r2.metrics[i].to_json_line());
  }
}

TEST_CASE("segment bookkeeping and update cadence") {
  TrainConfig c = small_config(Algorithm::kHsd, 4);
  std::vector<SegmentInfo> segments;
  std::vector<double> rewards;
  long high_updates = 0, low_updates = 0, last_high = 0, last_low = 0, low_transitions = 0;
  int flushes = 0;
  TrainingHooks hooks;
  hooks.on_high_transition = [&](const HighTransition& t, const SegmentInfo& info) {
    segments.push_back(info);
    rewards.push_back(t.reward);
    CHECK(t.skills.size() == 2);
    CHECK(t.observations.cols() == 2);
  };
  hooks.on_low_transition = [&](const LowTransition&) { ++low_transitions; };
  hooks.on_high_update = [&](long steps) {
    CHECK(steps % c.train_every == 0);
    CHECK(steps > last_high);
    last_high = steps;
    ++high_updates;
  };
  hooks.on_low_update = [&](long steps) {
    CHECK(steps % c.train_every == 0);
    last_low = steps;
    ++low_updates;
  };
  hooks.on_decoder_flush = [&](long, std::size_t size) {
    CHECK(size >= static_cast<std::size_t>(c.decoder_batch));
    ++flushes;
  };
  const auto run = run_training(c, std::nullopt, hooks);
  REQUIRE(!segments.empty());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    CHECK(segments[i].start_step % c.t_seg == 0);
    CHECK(segments[i].rewards.size() == static_cast<std::size_t>(c.t_seg));
    CHECK(rewards[i] == doctest::Approx(oracle::discounted_sum(segments[i].rewards, c.gamma)).epsilon(1e-12));
  }
  CHECK(low_transitions % 2 == 0);
  CHECK(run.metrics.back().high_updates == high_updates);
  CHECK(run.metrics.back().low_updates == low_updates);
  CHECK(run.metrics.back().decoder_updates == flushes);
}

TEST_CASE("evaluation is pure and its rates partition the episodes") {
  TrainConfig c = small_config(Algorithm::kHsd, 3);
  c.total_episodes = 3;
  const auto run = run_training(c);
  const TeamPolicy& p = run.policy;
  const auto e1 = evaluate(p, 5, 7, true);
  const auto e2 = evaluate(p, 5, 7, true);
  CHECK(e1.wins == e2.wins);
  CHECK(e1.losses == e2.losses);
  CHECK(e1.win_rate() + e1.lose_rate() + e1.draw_rate() == doctest::Approx(1.0));
  REQUIRE(e1.logs.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(episode_log_to_jsonl(e1.logs[i]) == episode_log_to_jsonl(e2.logs[i]));
  const auto same = adhoc_evaluate(p, TeammateSpec::parse("training"), 5, 7, true);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(episode_log_to_jsonl(same.logs[i]) == episode_log_to_jsonl(e1.logs[i]));
}

TEST_CASE("ad-hoc teammate replacement") {
  TrainConfig c = small_config(Algorithm::kHsd, 3);
  c.total_episodes = 0;
  const auto run = run_training(c);
  const auto scripted = adhoc_evaluate(run.policy, TeammateSpec::parse("scripted:1"), 2, 1, true);
  for (const auto& log : scripted.logs)
    for (const auto& s : log.steps) {
      CHECK(s.skills[1] == -1);
      CHECK(s.skills[0] >= 0);
    }
  const auto pinned = adhoc_evaluate(run.policy, TeammateSpec::parse("skill:2"), 2, 1, true);
  for (const auto& log : pinned.logs)
    for (const auto& s : log.steps) CHECK(s.skills[1] == 2);
  CHECK_THROWS_AS(adhoc_evaluate(run.policy, TeammateSpec::parse("skill:3"), 1, 1), ConfigError);
  CHECK_THROWS_AS(adhoc_evaluate(run.policy, TeammateSpec::parse("scripted:3"), 1, 1), ConfigError);
  CHECK_THROWS(TeammateSpec::parse("humans:2"));
  CHECK(TeammateSpec::parse("scripted:2").str() == "scripted:2");

  TrainConfig flat = small_config(Algorithm::kIqlFlat, 1);
  flat.total_episodes = 0;
  const auto flat_run = run_training(flat);
  CHECK_THROWS_AS(adhoc_evaluate(flat_run.policy, TeammateSpec::parse("skill:0"), 1, 1), ConfigError);
}

TEST_CASE("one skill with alpha fixed at one reduces to independent learners") {
  TrainConfig iql = small_config(Algorithm::kIqlFlat, 1);
  TrainConfig hsd = small_config(Algorithm::kHsd, 1);
  hsd.alpha_start = hsd.alpha_end = 1.0;
  hsd.low_hidden = iql.flat_hidden;
  std::vector<LowTransition> a, b;
  TrainingHooks ha, hb;
  ha.on_low_transition = [&](const LowTransition& t) { a.push_back(t); };
  hb.on_low_transition = [&](const LowTransition& t) { b.push_back(t); };
  const auto ra = run_training(iql, std::nullopt, ha);
  const auto rb = run_training(hsd, std::nullopt, hb);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].action == b[i].action);
    CHECK(a[i].reward == b[i].reward);
    CHECK(a[i].observation == b[i].observation);
  }
  for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
    CHECK(ra.metrics[i].win_rate == rb.metrics[i].win_rate);
    CHECK(ra.metrics[i].low_loss == rb.metrics[i].low_loss);
  }
}

TEST_CASE("checkpoint round trip preserves greedy behavior") {
  TrainConfig c = small_config(Algorithm::kHsd, 3);
  const auto dir = scratch("ckpt");
  const auto run = run_training(c, dir);
  CHECK(std::filesystem::exists(dir / "metrics.jsonl"));
  CHECK(std::filesystem::exists(dir / "config.json"));
  const TeamPolicy loaded = TeamPolicy::load(dir / "checkpoints" / "final");
  CHECK(loaded.alpha == run.policy.alpha);
  CHECK(loaded.episode == run.policy.episode);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const nn::Matrix obs = oracle::random_matrix(c.obs_dim(), 2, rng);
    const auto z = run.policy.greedy_skills(obs);
    CHECK(loaded.greedy_skills(obs) == z);
    CHECK(loaded.greedy_actions(obs, z) == run.policy.greedy_actions(obs, z));
  }
  const auto e1 = evaluate(run.policy, 3, 9);
  const auto e2 = evaluate(loaded, 3, 9);
  CHECK(e1.wins == e2.wins);
  CHECK(e1.losses == e2.losses);
  std::filesystem::remove_all(dir);
}

TEST_CASE("collected segments are labeled with valid skills") {
  TrainConfig c = small_config(Algorithm::kHsd, 3);
  c.total_episodes = 0;
  const auto run = run_training(c);
  const SkillDataset d = collect_segments(run.policy, 30, 3);
  CHECK(d.size() == 30);
  for (int z : d.skills()) CHECK((z >= 0 && z < 3));
  for (const auto& in : d.inputs()) CHECK(in.frames.size() == 4);
}
