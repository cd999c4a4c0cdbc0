#include "hsd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace hsd::analysis {

int tracked_event_column(sts2::GameEvent e) {
  for (std::size_t i = 0; i < kTrackedEvents.size(); ++i) {
    if (kTrackedEvents[i] == e) return static_cast<int>(i);
  }
  return -1;
}

SkillTrace skill_trace(const EpisodeLog& log) {
  SkillTrace trace;
  trace.reserve(log.steps.size());
  for (const auto& s : log.steps) trace.push_back(s.skills);
  return trace;
}

std::pair<int, int> heatmap_cell(const Eigen::Vector2d& pos, double hw, double hl) {
  auto bin = [](double v, double half, int bins) {
    const int b = static_cast<int>(std::floor((v + half) / (2.0 * half) * bins));
    return std::clamp(b, 0, bins - 1);
  };
  return {bin(pos.y(), hl, kHeatmapRows), bin(pos.x(), hw, kHeatmapCols)};
}

UsageReport usage_report(const std::vector<UsageInput>& episodes, int num_skills, double hw,
                         double hl) {
  UsageReport u;
  u.possession_usage = Matrix::Zero(num_skills, 2);
  u.heatmaps.assign(num_skills, Matrix::Zero(kHeatmapRows, kHeatmapCols));
  for (const auto& ep : episodes) {
    const std::size_t steps = ep.skills.size();
    if (ep.possession.size() != steps || ep.positions.size() != steps) {
      throw UsageError("usage_report: traces are not aligned");
    }
    const int agents = steps ? static_cast<int>(ep.skills.front().size()) : 0;
    const int high_steps = static_cast<int>((steps + ep.t_seg - 1) / ep.t_seg);
    Matrix series = Matrix::Constant(agents, high_steps, -1.0);
    for (std::size_t t = 0; t < steps; ++t) {
      for (int a = 0; a < agents; ++a) {
        const int z = ep.skills[t][a];
        if (t % ep.t_seg == 0) series(a, static_cast<Eigen::Index>(t / ep.t_seg)) = z;
        if (z < 0) continue;
        if (z >= num_skills) throw UsageError("usage_report: skill out of range");
        u.possession_usage(z, ep.possession[t] ? 0 : 1) += 1.0;
        const auto [r, c] = heatmap_cell(ep.positions[t][a], hw, hl);
        u.heatmaps[z](r, c) += 1.0;
      }
    }
    u.timeseries.push_back(std::move(series));
  }
  return u;
}

Tally tally_by_skill(const std::vector<EpisodeLog>& logs, const std::vector<SkillTrace>& traces,
                     int num_skills) {
  if (logs.size() != traces.size()) throw UsageError("tally_by_skill: episode count mismatch");
  if (num_skills < 1) throw UsageError("tally_by_skill: num_skills must be >= 1");
  const int e_cols = static_cast<int>(kTrackedEvents.size());
  Tally out;
  out.events.totals = Matrix::Zero(num_skills, e_cols);
  Matrix sum_sq = Matrix::Zero(num_skills, e_cols);
  int num_actions = 0;
  for (const auto& log : logs) num_actions = std::max(num_actions, sts2::num_actions(log.agents_per_team));
  out.actions.counts = Matrix::Zero(num_skills, num_actions);

  std::vector<UsageInput> usage;
  double hw = 10.0, hl = 20.0;
  for (std::size_t e = 0; e < logs.size(); ++e) {
    const EpisodeLog& log = logs[e];
    const SkillTrace& trace = traces[e];
    if (trace.size() != log.steps.size()) throw UsageError("tally_by_skill: trace length mismatch");
    hw = log.field_half_width;
    hl = log.field_half_length;
    Matrix episode_counts = Matrix::Zero(num_skills, e_cols);
    UsageInput ui;
    ui.t_seg = log.t_seg;
    for (std::size_t t = 0; t < log.steps.size(); ++t) {
      const StepRecord& step = log.steps[t];
      const auto& skills = trace[t];
      if (static_cast<int>(skills.size()) != log.agents_per_team ||
          static_cast<int>(step.home_actions.size()) != log.agents_per_team) {
        throw UsageError("tally_by_skill: agent count mismatch");
      }
      for (int a = 0; a < log.agents_per_team; ++a) {
        const int z = skills[a];
        if (z >= num_skills) throw UsageError("tally_by_skill: skill out of range");
        if (z >= 0) out.actions.counts(z, step.home_actions[a]) += 1.0;
      }
      for (const auto& ev : step.events) {
        if (ev.team != sts2::kHome) continue;
        const int col = tracked_event_column(ev.event);
        if (col < 0) continue;
        const int z = skills.at(ev.player);
        if (z >= 0) episode_counts(z, col) += 1.0;
      }
      ui.skills.push_back(skills);
      ui.possession.push_back(step.state.carrier_team == sts2::kHome);
      std::vector<Eigen::Vector2d> pos;
      for (const auto& p : step.state.players[sts2::kHome]) pos.push_back(p.pos);
      ui.positions.push_back(std::move(pos));
    }
    out.events.totals += episode_counts;
    sum_sq += episode_counts.cwiseProduct(episode_counts);
    usage.push_back(std::move(ui));
  }

  const int n = static_cast<int>(logs.size());
  out.events.episodes = n;
  out.events.mean = n ? Matrix(out.events.totals / n) : Matrix::Zero(num_skills, e_cols);
  out.events.std_error = Matrix::Zero(num_skills, e_cols);
  if (n > 1) {
    const Matrix var =
        ((sum_sq - out.events.totals.cwiseProduct(out.events.mean)) / (n - 1)).cwiseMax(0.0);
    out.events.std_error = (var / n).cwiseSqrt();
  }

  out.actions.frequency = Matrix::Zero(num_skills, num_actions);
  for (int z = 0; z < num_skills; ++z) {
    const double total = out.actions.counts.row(z).sum();
    if (total > 0) out.actions.frequency.row(z) = out.actions.counts.row(z) / total;
  }
  out.usage = usage_report(usage, num_skills, hw, hl);
  return out;
}

Tally tally_by_skill(const std::vector<EpisodeLog>& logs, int num_skills) {
  std::vector<SkillTrace> traces;
  for (const auto& log : logs) traces.push_back(skill_trace(log));
  return tally_by_skill(logs, traces, num_skills);
}

Pca2Result pca2(const Matrix& rows) {
  if (rows.rows() < 2 || rows.cols() < 2) throw UsageError("pca2 needs at least 2 rows and 2 columns");
  Pca2Result r;
  const Matrix centered = rows.rowwise() - rows.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
  const double total = cov.trace();
  r.projection = Matrix::Zero(rows.rows(), 2);
  r.components = Matrix::Zero(rows.cols(), 2);
  if (!(total > 0.0)) {
    r.degenerate = true;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::Index d = values.size();
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    r.components.col(k) = v;
    r.explained(k) = std::max(0.0, values(d - 1 - k)) / total;
  }
  r.projection = centered * r.components;
  return r;
}

namespace {

void write_csv(const Matrix& m, const std::filesystem::path& path,
               const std::vector<std::string>& header = {}) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

}  // namespace

void write_report(const Tally& tally, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> event_header;
  for (auto e : kTrackedEvents) event_header.push_back(sts2::event_name(e));
  std::vector<std::string> se_header;
  for (auto& h : event_header) se_header.push_back(h);
  for (auto& h : event_header) se_header.push_back(h + "_stderr");
  const Eigen::Index k = tally.events.mean.rows();
  const Eigen::Index e = tally.events.mean.cols();
  Matrix events(k, 2 * e);
  events << tally.events.mean, tally.events.std_error;
  write_csv(events, out_dir / "events.csv", se_header);
  write_csv(tally.actions.frequency, out_dir / "actions.csv");
  write_csv(tally.usage.possession_usage, out_dir / "usage.csv", {"has_possession", "no_possession"});
  for (std::size_t z = 0; z < tally.usage.heatmaps.size(); ++z) {
    write_csv(tally.usage.heatmaps[z], out_dir / ("heatmap_" + std::to_string(z) + ".csv"));
  }
  for (std::size_t i = 0; i < tally.usage.timeseries.size(); ++i) {
    write_csv(tally.usage.timeseries[i], out_dir / ("timeseries_" + std::to_string(i) + ".csv"));
  }

  nlohmann::json summary{{"episodes", tally.events.episodes}, {"num_skills", k}};
  auto pca_block = [&](const Matrix& m, const char* file, const char* key) {
    if (m.rows() < 2 || m.cols() < 2) return;
    const Pca2Result p = pca2(m);
    write_csv(p.projection, out_dir / file, {"pc1", "pc2"});
    summary[key] = {{"explained", {p.explained(0), p.explained(1)}}, {"degenerate", p.degenerate}};
  };
  pca_block(tally.events.mean, "pca_events.csv", "pca_events");
  pca_block(tally.actions.frequency, "pca_actions.csv", "pca_actions");
  nlohmann::json totals = nlohmann::json::object();
  for (Eigen::Index c = 0; c < e; ++c) totals[event_header[c]] = tally.events.totals.col(c).sum();
  summary["event_totals"] = totals;
  std::ofstream out(out_dir / "summary.json", std::ios::trunc);
  out << summary.dump(2) << '\n';
}

}  // namespace hsd::analysis
