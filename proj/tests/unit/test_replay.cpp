#include <doctest.h>

#include "hsd/replay.hpp"

using namespace hsd;

TEST_CASE("push grows the buffer up to capacity then evicts the oldest") {
  ReplayBuffer<int> buf(100000);
  buf.push(0);
  CHECK(buf.size() == 1);
  for (int i = 1; i <= 100000; ++i) buf.push(i);
  CHECK(buf.size() == 100000);
  CHECK(buf.at(0) == 1);
  CHECK(buf.at(buf.size() - 1) == 100000);
}

TEST_CASE("eviction is strictly FIFO") {
  ReplayBuffer<int> buf(5);
  for (int i = 0; i < 13; ++i) {
    buf.push(i);
    CHECK(buf.size() == std::min<std::size_t>(i + 1, 5));
    const int oldest = std::max(0, i - 4);
    for (std::size_t k = 0; k < buf.size(); ++k) CHECK(buf.at(k) == oldest + static_cast<int>(k));
  }
}

TEST_CASE("entries are retrievable bit-exact") {
  ReplayBuffer<LowTransition> buf(4);
  LowTransition t;
  t.observation = Eigen::VectorXd::LinSpaced(31, -1.0, 1.0 / 3.0);
  t.skill = 2;
  t.action = 7;
  t.reward = 0.1 + 0.2;
  t.next_observation = t.observation * 3.0;
  t.terminal = true;
  buf.push(t);
  const auto& back = buf.at(0);
  CHECK(back.observation == t.observation);
  CHECK(back.next_observation == t.next_observation);
  CHECK(back.reward == t.reward);
  CHECK(back.skill == 2);
  CHECK(back.action == 7);
  CHECK(back.terminal);
}

TEST_CASE("underfull buffer signals not ready") {
  ReplayBuffer<int> buf(10);
  Rng rng(1);
  buf.push(1);
  CHECK_FALSE(buf.sample_indices(4, rng).has_value());
  CHECK_FALSE(buf.sample(4, rng).has_value());
  CHECK(buf.sample(1, rng).has_value());
}

TEST_CASE("sampling is deterministic and draws members") {
  ReplayBuffer<int> buf(100000);
  for (int i = 0; i < 100000; ++i) buf.push(i + 200000);
  for (int i = 0; i < 50; ++i) buf.push(i);  // wrap around
  Rng a(5), b(5);
  const auto s1 = buf.sample(256, a);
  const auto s2 = buf.sample(256, b);
  REQUIRE(s1.has_value());
  CHECK(s1->size() == 256);
  CHECK(*s1 == *s2);
  for (int v : *s1) CHECK(((v >= 200050 && v < 300000) || (v >= 0 && v < 50)));
}

TEST_CASE("sampling is uniform over entries") {
  ReplayBuffer<int> buf(100);
  for (int i = 0; i < 100; ++i) buf.push(i);
  Rng rng(17);
  std::vector<long> counts(100, 0);
  long draws = 0;
  while (draws < 1000000) {
    const auto idx = buf.sample_indices(100, rng);
    REQUIRE(idx.has_value());
    for (auto i : *idx) ++counts[buf.at(i)];
    draws += 100;
  }
  for (long c : counts) CHECK(std::abs(c - 10000) <= 500);
}
