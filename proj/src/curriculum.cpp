#include "hsd/curriculum.hpp"

#include <algorithm>
#include <stdexcept>

namespace hsd {

bool AlphaSchedule::update(double eval_win_rate, long episode) {
  if (!(eval_win_rate >= 0.0 && eval_win_rate <= 1.0)) {
    throw std::invalid_argument("AlphaSchedule: win rate outside [0, 1]");
  }
  const double before = alpha;
  if (eval_win_rate > alpha_threshold) alpha = std::max(alpha_end, alpha - alpha_step);
  history.push_back({episode, alpha});
  return alpha < before;
}

}  // namespace hsd
