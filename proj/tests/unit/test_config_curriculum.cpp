#include <doctest.h>

#include <cmath>

#include "hsd/config.hpp"
#include "hsd/curriculum.hpp"

using namespace hsd;

TEST_CASE("alpha schedule examples") {
  AlphaSchedule s;
  CHECK_FALSE(s.update(0.70));
  CHECK(s.alpha == 1.0);
  CHECK(s.update(0.71));
  CHECK(s.alpha == doctest::Approx(0.99).epsilon(1e-12));
  CHECK_FALSE(s.update(0.2));
  CHECK(s.alpha == doctest::Approx(0.99).epsilon(1e-12));
  for (int i = 0; i < 100; ++i) s.update(1.0);
  CHECK(s.alpha == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(s.alpha >= 0.6);
  CHECK_THROWS_AS(s.update(1.5), std::invalid_argument);
}

TEST_CASE("alpha traces are non-increasing, bounded and step-sized") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    AlphaSchedule s;
    double prev = s.alpha;
    for (int i = 0; i < 60; ++i) {
      s.update(uniform01(rng), i);
      CHECK(s.alpha <= prev);
      CHECK(s.alpha >= s.alpha_end);
      CHECK(prev - s.alpha <= s.alpha_step + 1e-12);
      prev = s.alpha;
    }
    CHECK(s.history.size() == 60);
  }
}

TEST_CASE("config JSON round trip") {
  TrainConfig c;
  c.algorithm = Algorithm::kHsdExt;
  c.num_skills = 6;
  c.gamma = 0.95;
  c.low_hidden = {32, 16};
  c.env.agents_per_team = 2;
  c.seed = 1234567890123ULL;
  c.smdp_form = SmdpRewardForm::kScaledSum;
  const std::string text = to_json_string(c);
  const TrainConfig back = config_from_json_string(text);
  CHECK(to_json_string(back) == text);
  CHECK(back.algorithm == Algorithm::kHsdExt);
  CHECK(back.seed == c.seed);
  CHECK(back.env.agents_per_team == 2);
  CHECK(back.low_hidden == std::vector<int>{32, 16});
}

TEST_CASE("config rejects unknown keys and inconsistent settings") {
  CHECK_THROWS_AS(config_from_json_string(R"({"num_skils": 4})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_string(R"({"env": {"agent_per_team": 2}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_string(R"({"algorithm": "iql_flat", "num_skills": 4})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_string(R"({"algorithm": "magic"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_string(R"({"t_seg": 3, "k_skip": 2})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_string("{not json"), ConfigError);
  CHECK_NOTHROW(config_from_json_string(R"({"algorithm": "qmix_flat", "num_skills": 1})"));
  CHECK_NOTHROW(config_from_json_string("{}"));
}

TEST_CASE("epsilon decays linearly then holds") {
  TrainConfig c;
  CHECK(c.epsilon_at(0) == 0.5);
  CHECK(c.epsilon_at(500) == doctest::Approx(0.275));
  CHECK(c.epsilon_at(1000) == doctest::Approx(0.05));
  CHECK(c.epsilon_at(40000) == doctest::Approx(0.05));
}
