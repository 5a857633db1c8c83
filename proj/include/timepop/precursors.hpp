#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "timepop/core.hpp"

namespace timepop {

/// A user who rated at least one of the target's items strictly earlier than
/// the target did, with the number of such items.
struct CandidateEntry {
  UserHandle candidate;
  std::uint32_t common_before;

  friend bool operator==(const CandidateEntry&, const CandidateEntry&) = default;
};

/// Threshold on common_before: the candidate mean when `fixed` is empty.
struct TauMode {
  std::optional<double> fixed;

  static TauMode automatic() { return {}; }
  static TauMode fixed_value(double v) { return {v}; }
};

struct PrecursorSet {
  UserHandle target = 0;
  std::vector<CandidateEntry> candidates;  // ordered by candidate handle
  double tau = 0.0;                        // 0 when there are no candidates
  std::vector<UserHandle> precursors;      // ordered by handle
};

class PrecursorScratch;
inline std::vector<CandidateEntry> candidate_precursors(const Dataset& ds, UserHandle target,
                                                        PrecursorScratch& scratch);

/// Reusable per-thread buffers for the counting pass.
class PrecursorScratch {
 public:
  explicit PrecursorScratch(std::size_t num_users = 0) : counts_(num_users, 0) {}

 private:
  friend std::vector<CandidateEntry> candidate_precursors(const Dataset&, UserHandle, PrecursorScratch&);
  std::vector<std::uint32_t> counts_;
  std::vector<UserHandle> touched_;
};

/// Walks each of the target's items' rater lists up to the target's own
/// rating time, so the cost is the number of earlier raters rather than the
/// number of user pairs. Equal timestamps do not count as earlier.
inline std::vector<CandidateEntry> candidate_precursors(const Dataset& ds, UserHandle target,
                                                        PrecursorScratch& scratch) {
  if (target >= ds.num_users()) throw Error(ErrorKind::kUnknownUser, "unknown user handle " + std::to_string(target));
  auto& counts = scratch.counts_;
  auto& touched = scratch.touched_;
  if (counts.size() < ds.num_users()) counts.assign(ds.num_users(), 0);
  touched.clear();

  for (const auto& own : ds.profile(target).interactions) {
    for (const auto& rater : ds.item_raters(own.item)) {
      if (rater.timestamp >= own.timestamp) break;
      if (counts[rater.user]++ == 0) touched.push_back(rater.user);
    }
  }

  std::sort(touched.begin(), touched.end());
  std::vector<CandidateEntry> out;
  out.reserve(touched.size());
  for (UserHandle u : touched) {
    out.push_back({u, counts[u]});
    counts[u] = 0;
  }
  return out;
}

inline std::vector<CandidateEntry> candidate_precursors(const Dataset& ds, UserHandle target) {
  PrecursorScratch scratch(ds.num_users());
  return candidate_precursors(ds, target, scratch);
}

inline double compute_tau(std::span<const CandidateEntry> candidates, const TauMode& mode) {
  if (mode.fixed) return *mode.fixed;
  if (candidates.empty()) throw Error(ErrorKind::kDegenerate, "no candidates");
  std::uint64_t total = 0;
  for (const auto& c : candidates) total += c.common_before;
  return static_cast<double>(total) / static_cast<double>(candidates.size());
}

inline PrecursorSet precursor_set(const Dataset& ds, UserHandle target, const TauMode& mode,
                                  PrecursorScratch& scratch) {
  PrecursorSet out;
  out.target = target;
  out.candidates = candidate_precursors(ds, target, scratch);
  if (out.candidates.empty()) return out;
  out.tau = compute_tau(out.candidates, mode);
  for (const auto& c : out.candidates)
    if (static_cast<double>(c.common_before) >= out.tau) out.precursors.push_back(c.candidate);
  return out;
}

inline PrecursorSet precursor_set(const Dataset& ds, UserHandle target, const TauMode& mode) {
  PrecursorScratch scratch(ds.num_users());
  return precursor_set(ds, target, mode, scratch);
}

}  // namespace timepop
