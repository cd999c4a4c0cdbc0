#include "hsd/replay_log.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hsd {

using nlohmann::json;

sts2::GameEvent parse_event_name(const std::string& name) {
  for (int i = 0; i < sts2::kNumGameEvents; ++i) {
    const auto e = static_cast<sts2::GameEvent>(i);
    if (name == sts2::event_name(e)) return e;
  }
  throw std::runtime_error("unknown event '" + name + "'");
}

namespace {

json players_to_json(const std::vector<sts2::Player>& players) {
  json arr = json::array();
  for (const auto& p : players) arr.push_back({p.pos.x(), p.pos.y(), p.vel.x(), p.vel.y()});
  return arr;
}

std::vector<sts2::Player> players_from_json(const json& arr) {
  std::vector<sts2::Player> out;
  for (const auto& row : arr) {
    sts2::Player p;
    p.pos = {row.at(0).get<double>(), row.at(1).get<double>()};
    p.vel = {row.at(2).get<double>(), row.at(3).get<double>()};
    out.push_back(p);
  }
  return out;
}

json state_to_json(const sts2::GameState& s) {
  return json{{"home", players_to_json(s.players[0])},
              {"away", players_to_json(s.players[1])},
              {"carrier", {s.carrier_team, s.carrier_index}},
              {"ball", {s.ball.x(), s.ball.y()}},
              {"step", s.step_count},
              {"done", s.done},
              {"winner", static_cast<int>(s.winner)},
              {"last", {s.last_team, s.last_carrier}},
              {"rebound", s.rebound_team}};
}

sts2::GameState state_from_json(const json& j) {
  sts2::GameState s;
  s.players[0] = players_from_json(j.at("home"));
  s.players[1] = players_from_json(j.at("away"));
  s.carrier_team = j.at("carrier").at(0).get<int>();
  s.carrier_index = j.at("carrier").at(1).get<int>();
  s.ball = {j.at("ball").at(0).get<double>(), j.at("ball").at(1).get<double>()};
  s.step_count = j.at("step").get<int>();
  s.done = j.at("done").get<bool>();
  s.winner = static_cast<sts2::Winner>(j.at("winner").get<int>());
  s.last_team = j.at("last").at(0).get<int>();
  s.last_carrier = j.at("last").at(1).get<int>();
  s.rebound_team = j.at("rebound").get<int>();
  return s;
}

}  // namespace

std::string episode_log_to_jsonl(const EpisodeLog& log) {
  std::ostringstream out;
  json header{{"type", "episode"},
              {"episode", log.episode},
              {"agents_per_team", log.agents_per_team},
              {"num_skills", log.num_skills},
              {"t_seg", log.t_seg},
              {"field_half_width", log.field_half_width},
              {"field_half_length", log.field_half_length},
              {"winner", static_cast<int>(log.winner)},
              {"steps", log.steps.size()}};
  out << header.dump() << '\n';
  for (const auto& r : log.steps) {
    json events = json::array();
    for (const auto& e : r.events) events.push_back({sts2::event_name(e.event), e.team, e.player});
    json line{{"type", "step"},
              {"t", r.step},
              {"state", state_to_json(r.state)},
              {"home_actions", r.home_actions},
              {"away_actions", r.away_actions},
              {"reward", {r.reward[0], r.reward[1]}},
              {"events", events},
              {"skills", r.skills}};
    out << line.dump() << '\n';
  }
  return out.str();
}

EpisodeLog episode_log_from_jsonl(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t expected = 0;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "episode") {
        log.episode = j.at("episode").get<long>();
        log.agents_per_team = j.at("agents_per_team").get<int>();
        log.num_skills = j.at("num_skills").get<int>();
        log.t_seg = j.at("t_seg").get<int>();
        log.field_half_width = j.at("field_half_width").get<double>();
        log.field_half_length = j.at("field_half_length").get<double>();
        log.winner = static_cast<sts2::Winner>(j.at("winner").get<int>());
        expected = j.at("steps").get<std::size_t>();
        have_header = true;
      } else if (type == "step") {
        StepRecord r;
        r.step = j.at("t").get<int>();
        r.state = state_from_json(j.at("state"));
        r.home_actions = j.at("home_actions").get<std::vector<int>>();
        r.away_actions = j.at("away_actions").get<std::vector<int>>();
        r.reward = {j.at("reward").at(0).get<double>(), j.at("reward").at(1).get<double>()};
        for (const auto& e : j.at("events")) {
          r.events.push_back(
              {parse_event_name(e.at(0).get<std::string>()), e.at(1).get<int>(), e.at(2).get<int>()});
        }
        r.skills = j.at("skills").get<std::vector<int>>();
        log.steps.push_back(std::move(r));
      } else {
        throw std::runtime_error("unknown record type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed replay log: ") + e.what());
  }
  if (!have_header) throw std::runtime_error("replay log without header");
  if (log.steps.size() != expected) throw std::runtime_error("replay log truncated");
  return log;
}

void write_episode_log(const EpisodeLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << episode_log_to_jsonl(log);
}

EpisodeLog read_episode_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return episode_log_from_jsonl(ss.str());
}

std::vector<EpisodeLog> read_episode_logs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EpisodeLog> logs;
  for (const auto& f : files) logs.push_back(read_episode_log(f));
  return logs;
}

}  // namespace hsd
