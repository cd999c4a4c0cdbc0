#pragma once

#include <vector>

namespace hsd {

// Weight on the extrinsic team reward in the low-level objective. It only
// moves down, by alpha_step, when an evaluation win rate strictly exceeds
// alpha_threshold, and never below alpha_end.
struct AlphaSchedule {
  struct Entry {
    long episode;
    double alpha;
  };

  double alpha = 1.0;
  double alpha_end = 0.6;
  double alpha_step = 0.01;
  double alpha_threshold = 0.70;
  std::vector<Entry> history;

  // Returns true when alpha was decremented.
  bool update(double eval_win_rate, long episode = -1);
};

}  // namespace hsd
