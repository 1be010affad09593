#pragma once

#include "macchiato/stack.hpp"

namespace macchiato {

// T_n = 1 iff strictly more than half the raters agree; exact ties go to
// background.
BinaryMask majority_vote(const RaterStack& stack);

// U_n = S_n^+ / K.
SoftMask mask_average(const RaterStack& stack);

}  // namespace macchiato
