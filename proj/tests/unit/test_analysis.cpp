#include <doctest.h>

#include "hsd/analysis.hpp"
#include "hsd/trainer.hpp"
#include "oracles.hpp"

using namespace hsd;
using namespace hsd::analysis;

namespace {

std::vector<EpisodeLog> untrained_logs(int episodes) {
  TrainConfig c;
  c.env.agents_per_team = 2;
  c.num_skills = 3;
  c.low_hidden = {16, 16};
  c.high_hidden = {16, 16};
  c.mixer_embed = 8;
  c.decoder_hidden = 8;
  return evaluate(TeamPolicy::create(c), episodes, 11, true).logs;
}

}  // namespace

TEST_CASE("pca of collinear rows puts all variance on the first component") {
  Matrix rows(4, 3);
  rows << 0, 0, 0, 1, 2, 3, 2, 4, 6, 3, 6, 9;
  const Pca2Result r = pca2(rows);
  CHECK(r.explained(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.explained(1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(r.components(2, 0) > 0.0);  // largest loading made positive
  CHECK(r.projection.col(0).sum() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("pca agrees with the Jacobi oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix rows = oracle::random_matrix(8, 6, rng);
    const Pca2Result r = pca2(rows);
    const auto ref = oracle::pca2_reference(rows);
    CHECK((r.projection - ref.projection).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.explained(0) == doctest::Approx(ref.explained[0]).epsilon(1e-9));
    CHECK(r.explained(1) == doctest::Approx(ref.explained[1]).epsilon(1e-9));
    CHECK(r.explained(0) >= r.explained(1));
    CHECK(r.explained.sum() <= 1.0 + 1e-12);
    CHECK(std::abs(r.components.col(0).dot(r.components.col(1))) < 1e-10);
  }
}

TEST_CASE("pca projection never expands distances") {
  Rng rng(2);
  const Matrix rows = oracle::random_matrix(10, 6, rng);
  const Pca2Result r = pca2(rows);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      CHECK((r.projection.row(i) - r.projection.row(j)).norm() <=
            (rows.row(i) - rows.row(j)).norm() + 1e-12);
}

TEST_CASE("pca of identical rows is flagged degenerate") {
  const Matrix rows = Matrix::Constant(4, 3, 2.5);
  const Pca2Result r = pca2(rows);
  CHECK(r.degenerate);
  CHECK(r.projection.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hand-built tally") {
  EpisodeLog log;
  log.agents_per_team = 2;
  log.num_skills = 3;
  log.t_seg = 10;
  Rng rng(3);
  sts2::EnvConfig env;
  env.agents_per_team = 2;
  for (int t = 0; t < 3; ++t) {
    StepRecord s;
    s.step = t;
    s.state = sts2::kickoff_state(env, rng);
    s.state.carrier_team = t == 2 ? 1 : 0;
    s.state.carrier_index = 0;
    s.home_actions = {1, 7};
    s.away_actions = {0, 0};
    s.skills = {2, t == 0 ? -1 : 0};
    log.steps.push_back(s);
  }
  log.steps[0].events = {{sts2::GameEvent::kShotAttempt, 0, 0}, {sts2::GameEvent::kGoal, 0, 0}};
  log.steps[1].events = {{sts2::GameEvent::kSteal, 0, 1}, {sts2::GameEvent::kSteal, 1, 1}};
  log.steps[2].events = {{sts2::GameEvent::kMadePass, 0, 0}, {sts2::GameEvent::kPossessionGain, 0, 0}};
  const Tally t = tally_by_skill({log}, 3);
  const int goal = tracked_event_column(sts2::GameEvent::kGoal);
  const int shot = tracked_event_column(sts2::GameEvent::kShotAttempt);
  const int steal = tracked_event_column(sts2::GameEvent::kSteal);
  const int pass = tracked_event_column(sts2::GameEvent::kMadePass);
  CHECK(tracked_event_column(sts2::GameEvent::kPossessionGain) == -1);
  CHECK(t.events.totals(2, goal) == 1);
  CHECK(t.events.totals(2, shot) == 1);
  CHECK(t.events.totals(2, pass) == 1);
  CHECK(t.events.totals(0, steal) == 1);  // the away steal is ignored
  CHECK(t.events.totals.sum() == 4);
  CHECK(t.actions.counts(2, 1) == 3);
  CHECK(t.actions.counts(0, 7) == 2);
  CHECK(t.actions.counts.sum() == 5);
  CHECK(t.actions.frequency.row(1).sum() == 0.0);
  CHECK(t.actions.frequency.row(2).sum() == doctest::Approx(1.0));
  CHECK(t.usage.possession_usage(2, 0) == 2);
  CHECK(t.usage.possession_usage(2, 1) == 1);
  CHECK(t.usage.possession_usage(0, 0) == 1);
  CHECK(t.usage.possession_usage(0, 1) == 1);
  CHECK_THROWS_AS(tally_by_skill({log}, std::vector<SkillTrace>{}, 3), UsageError);
  CHECK_THROWS_AS(tally_by_skill({log}, 2), UsageError);
}

TEST_CASE("tallies conserve events, actions and occupancy") {
  const auto logs = untrained_logs(3);
  const Tally t = tally_by_skill(logs, 3);
  double events = 0, agent_steps = 0;
  for (const auto& log : logs)
    for (const auto& s : log.steps) {
      for (const auto& e : s.events)
        if (e.team == 0 && tracked_event_column(e.event) >= 0 && s.skills[e.player] >= 0) ++events;
      for (int z : s.skills) agent_steps += z >= 0;
    }
  CHECK(t.events.totals.sum() == events);
  CHECK(t.actions.counts.sum() == agent_steps);
  CHECK(t.usage.possession_usage.sum() == agent_steps);
  double heat = 0;
  for (const auto& h : t.usage.heatmaps) heat += h.sum();
  CHECK(heat == agent_steps);
  CHECK(t.events.episodes == 3);
  CHECK(((t.events.mean * 3.0) - t.events.totals).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE(t.usage.timeseries.size() == 3);
  for (std::size_t e = 0; e < 3; ++e)
    CHECK(t.usage.timeseries[e].cols() == static_cast<long>((logs[e].steps.size() + 9) / 10));
}

TEST_CASE("heatmap cells cover the field") {
  CHECK(heatmap_cell({-10, -20}, 10, 20) == std::pair<int, int>{0, 0});
  CHECK(heatmap_cell({10, 20}, 10, 20) == std::pair<int, int>{35, 17});
  CHECK(heatmap_cell({0, 0}, 10, 20) == std::pair<int, int>{18, 9});
  CHECK(heatmap_cell({50, -50}, 10, 20) == std::pair<int, int>{0, 17});
}

TEST_CASE("replay logs survive a JSONL round trip") {
  const auto logs = untrained_logs(1);
  const std::string text = episode_log_to_jsonl(logs[0]);
  CHECK(episode_log_to_jsonl(episode_log_from_jsonl(text)) == text);
}

TEST_CASE("report files are written") {
  const auto dir = std::filesystem::temp_directory_path() / "hsd_unit_report";
  std::filesystem::remove_all(dir);
  write_report(tally_by_skill(untrained_logs(2), 3), dir);
  for (const char* f : {"events.csv", "actions.csv", "usage.csv", "heatmap_0.csv", "pca_events.csv",
                        "pca_actions.csv", "summary.json"})
    CHECK(std::filesystem::exists(dir / f));
  std::filesystem::remove_all(dir);
}
