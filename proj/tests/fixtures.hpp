#pragma once

#include <vector>

#include "timepop/core.hpp"

namespace fixtures {

using timepop::Interaction;

// Four users, six items. u2 rated two of u's items before u did, u4 one,
// and u3 rated two of them only after u.
inline std::vector<Interaction> precursor_example() {
  return {
      {"u", "i1", 5, 100}, {"u", "i2", 4, 200}, {"u", "i3", 5, 300},
      {"u2", "i1", 4, 50}, {"u2", "i2", 5, 150}, {"u2", "i5", 4, 160},
      {"u3", "i1", 3, 400}, {"u3", "i3", 4, 450}, {"u3", "i4", 5, 460},
      {"u4", "i3", 5, 250}, {"u4", "i6", 4, 260},
  };
}

}  // namespace fixtures
