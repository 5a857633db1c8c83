#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "timepop/core.hpp"

namespace timepop {

enum class DecayKind { kExponential, kLinear, kNone };

struct DecayParams {
  double beta = 1.0 / 200.0;  // per day
  DecayKind kind = DecayKind::kExponential;
};

inline DecayKind parse_decay_kind(std::string_view tag) {
  if (tag == "exp") return DecayKind::kExponential;
  if (tag == "linear") return DecayKind::kLinear;
  if (tag == "none") return DecayKind::kNone;
  throw Error(ErrorKind::kConfig, "unknown decay function '" + std::string(tag) + "'");
}

inline std::string_view to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::kExponential: return "exp";
    case DecayKind::kLinear: return "linear";
    case DecayKind::kNone: return "none";
  }
  return "exp";
}

/// Elapsed time in days seen by a contribution from a neighbour whose last
/// activity was at `last_activity` and who rated the item at `rating_time`:
/// |t0 - 2 * last_activity + rating_time|.
///
/// A recent neighbour rating a recent item gets ~0; an inactive neighbour is
/// charged the time since its last activity; an active neighbour is charged
/// the age of the rating.
inline double delta_t_days(Timestamp t0, Timestamp last_activity, Timestamp rating_time) {
  if (!(rating_time <= last_activity && last_activity <= t0))
    throw Error(ErrorKind::kInvalidInput, "non-causal timestamps: rating " + std::to_string(rating_time) +
                                              ", last activity " + std::to_string(last_activity) + ", t0 " +
                                              std::to_string(t0));
  const Timestamp raw = t0 - 2 * last_activity + rating_time;
  return static_cast<double>(raw < 0 ? -raw : raw) / static_cast<double>(kSecondsPerDay);
}

/// Age of a rating relative to t0, in days.
inline double age_days(Timestamp t0, Timestamp rating_time) {
  if (rating_time > t0)
    throw Error(ErrorKind::kInvalidInput, "non-causal timestamps: rating " + std::to_string(rating_time) +
                                              " after t0 " + std::to_string(t0));
  return static_cast<double>(t0 - rating_time) / static_cast<double>(kSecondsPerDay);
}

inline double decay_weight(double delta_days, const DecayParams& params) {
  if (!(delta_days >= 0.0)) throw Error(ErrorKind::kInvalidInput, "negative elapsed time");
  if (!(params.beta > 0.0)) throw Error(ErrorKind::kConfig, "decay rate must be positive");
  switch (params.kind) {
    case DecayKind::kExponential: return std::exp(-params.beta * delta_days);
    case DecayKind::kLinear: return std::max(0.0, 1.0 - params.beta * delta_days);
    case DecayKind::kNone: return 1.0;
  }
  return 1.0;
}

}  // namespace timepop
