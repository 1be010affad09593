#include "macchiato/baselines.hpp"

namespace macchiato {

BinaryMask majority_vote(const RaterStack& stack) {
  const std::vector<int> s = stack.s_plus();
  BinaryMask out = BinaryMask::zeros(stack.grid);
  const int K = stack.k();
  for (std::size_t i = 0; i < s.size(); ++i)
    out.values[i] = 2 * s[i] > K ? 1 : 0;
  return out;
}

SoftMask mask_average(const RaterStack& stack) {
  const std::vector<int> s = stack.s_plus();
  SoftMask out = SoftMask::zeros(stack.grid);
  const double inv_k = 1.0 / stack.k();
  for (std::size_t i = 0; i < s.size(); ++i) out.values[i] = s[i] * inv_k;
  return out;
}

}  // namespace macchiato
