#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "timepop/core.hpp"
#include "timepop/decay.hpp"
#include "timepop/precursors.hpp"

namespace timepop {

enum class Source { kScored, kBackfill };

inline std::string_view to_string(Source s) { return s == Source::kScored ? "scored" : "backfill"; }

struct ScoredItem {
  ItemHandle item;
  double score;
  Source source;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Top-N list for one user. Scored entries come first, ordered by
/// (score desc, global popularity desc, item id asc); backfill entries follow
/// in (popularity desc, item id asc) order with score 0.
struct RankedList {
  UserHandle user = 0;
  std::vector<ScoredItem> entries;
};

struct RecommendationContext {
  Timestamp t0 = 0;
  std::size_t top_n = 10;
  DecayParams decay{};
  TauMode tau_mode{};
};

namespace detail {

inline void check_context(const Dataset& ds, const RecommendationContext& ctx) {
  if (ctx.top_n < 1) throw Error(ErrorKind::kConfig, "top_n must be at least 1");
  if (ctx.t0 < ds.max_timestamp())
    throw Error(ErrorKind::kConfig, "t0 " + std::to_string(ctx.t0) + " precedes training interaction at " +
                                        std::to_string(ds.max_timestamp()));
}

inline std::vector<char> rated_mask(const Dataset& ds, UserHandle target) {
  std::vector<char> mask(ds.num_items(), 0);
  for (const auto& e : ds.profile(target).interactions) mask[e.item] = 1;
  return mask;
}

/// Sorts the scored candidates, keeps the best n, then tops up with popular
/// items not already rated or listed.
inline RankedList finalize(const Dataset& ds, UserHandle target, std::vector<ScoredItem> scored, std::size_t n,
                           std::vector<char>& excluded) {
  std::sort(scored.begin(), scored.end(), [&](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto pa = ds.popularity(a.item), pb = ds.popularity(b.item);
    if (pa != pb) return pa > pb;
    return a.item < b.item;
  });
  if (scored.size() > n) scored.resize(n);

  RankedList out{target, std::move(scored)};
  for (const auto& e : out.entries) excluded[e.item] = 1;
  for (ItemHandle i : ds.items_by_popularity()) {
    if (out.entries.size() >= n) break;
    if (excluded[i]) continue;
    out.entries.push_back({i, 0.0, Source::kBackfill});
  }
  return out;
}

/// Dense accumulator that remembers which slots were written.
class ScoreAccumulator {
 public:
  explicit ScoreAccumulator(std::size_t size) : scores_(size, 0.0), seen_(size, 0) {}

  void add(ItemHandle i, double v) {
    if (!seen_[i]) {
      seen_[i] = 1;
      touched_.push_back(i);
    }
    scores_[i] += v;
  }

  std::vector<ScoredItem> take() {
    std::vector<ScoredItem> out;
    out.reserve(touched_.size());
    for (ItemHandle i : touched_) out.push_back({i, scores_[i], Source::kScored});
    return out;
  }

 private:
  std::vector<double> scores_;
  std::vector<char> seen_;
  std::vector<ItemHandle> touched_;
};

}  // namespace detail

/// Global popularity ranking over the items the target has not rated.
inline RankedList most_popular(const Dataset& ds, UserHandle target, std::size_t n) {
  if (target >= ds.num_users()) throw Error(ErrorKind::kUnknownUser, "unknown user handle " + std::to_string(target));
  auto excluded = detail::rated_mask(ds, target);
  RankedList out{target, {}};
  for (ItemHandle i : ds.items_by_popularity()) {
    if (out.entries.size() >= n) break;
    if (excluded[i]) continue;
    out.entries.push_back({i, static_cast<double>(ds.popularity(i)), Source::kScored});
  }
  return out;
}

/// Local popularity among the target's precursors, each occurrence weighted by
/// the two-anchor decay of the precursor holding it. Falls back to global
/// popularity when there are no precursors and backfills short lists.
inline RankedList timepop_recommend(const Dataset& ds, UserHandle target, const RecommendationContext& ctx,
                                    PrecursorScratch& scratch) {
  detail::check_context(ds, ctx);
  const auto pset = precursor_set(ds, target, ctx.tau_mode, scratch);
  auto excluded = detail::rated_mask(ds, target);

  detail::ScoreAccumulator acc(ds.num_items());
  for (UserHandle p : pset.precursors) {
    const auto& prof = ds.profile(p);
    for (const auto& e : prof.interactions) {
      if (excluded[e.item]) continue;
      acc.add(e.item, decay_weight(delta_t_days(ctx.t0, prof.last_activity, e.timestamp), ctx.decay));
    }
  }
  return detail::finalize(ds, target, acc.take(), ctx.top_n, excluded);
}

inline RankedList timepop_recommend(const Dataset& ds, UserHandle target, const RecommendationContext& ctx) {
  PrecursorScratch scratch(ds.num_users());
  return timepop_recommend(ds, target, ctx, scratch);
}

enum class KnnVariant { kUser, kItem };

struct Neighbor {
  std::uint32_t id;
  double sim;
};

namespace detail {

inline void keep_top_k(std::vector<Neighbor>& v, std::size_t k) {
  auto better = [](const Neighbor& a, const Neighbor& b) { return a.sim != b.sim ? a.sim > b.sim : a.id < b.id; };
  if (v.size() > k) {
    std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), better);
    v.resize(k);
  } else {
    std::sort(v.begin(), v.end(), better);
  }
}

}  // namespace detail

/// User-based kNN with binary cosine similarity. With decay enabled each
/// neighbour rating is weighted by the decay of its age relative to t0.
class UserKnn {
 public:
  UserKnn(const Dataset& ds, std::size_t k, bool decay_enabled) : ds_(ds), k_(k), decay_(decay_enabled) {
    if (k < 1) throw Error(ErrorKind::kConfig, "k must be at least 1");
  }

  std::vector<Neighbor> neighbors(UserHandle target) const {
    if (target >= ds_.num_users()) throw Error(ErrorKind::kUnknownUser, "unknown user handle " + std::to_string(target));
    std::vector<std::uint32_t> overlap(ds_.num_users(), 0);
    std::vector<UserHandle> touched;
    for (const auto& e : ds_.profile(target).interactions)
      for (const auto& r : ds_.item_raters(e.item))
        if (r.user != target && overlap[r.user]++ == 0) touched.push_back(r.user);

    const double own = static_cast<double>(ds_.profile(target).interactions.size());
    std::vector<Neighbor> out;
    out.reserve(touched.size());
    for (UserHandle v : touched) {
      const double other = static_cast<double>(ds_.profile(v).interactions.size());
      out.push_back({v, overlap[v] / std::sqrt(own * other)});
    }
    detail::keep_top_k(out, k_);
    return out;
  }

  RankedList recommend(UserHandle target, const RecommendationContext& ctx) const {
    detail::check_context(ds_, ctx);
    auto excluded = detail::rated_mask(ds_, target);
    detail::ScoreAccumulator acc(ds_.num_items());
    for (const auto& nb : neighbors(target)) {
      for (const auto& e : ds_.profile(nb.id).interactions) {
        if (excluded[e.item]) continue;
        const double w = decay_ ? decay_weight(age_days(ctx.t0, e.timestamp), ctx.decay) : 1.0;
        acc.add(e.item, nb.sim * w);
      }
    }
    return detail::finalize(ds_, target, acc.take(), ctx.top_n, excluded);
  }

 private:
  const Dataset& ds_;
  std::size_t k_;
  bool decay_;
};

/// Item-based kNN with binary cosine similarity. A candidate item collects
/// sim(i, j) for each rated item j that is among its k nearest items; with
/// decay enabled the term is weighted by the age of the target's rating of j.
class ItemKnn {
 public:
  ItemKnn(const Dataset& ds, std::size_t k, bool decay_enabled) : ds_(ds), k_(k), decay_(decay_enabled) {
    if (k < 1) throw Error(ErrorKind::kConfig, "k must be at least 1");
    reverse_.resize(ds.num_items());
    std::vector<std::uint32_t> co(ds.num_items(), 0);
    std::vector<ItemHandle> touched;
    for (ItemHandle i = 0; i < ds.num_items(); ++i) {
      touched.clear();
      for (const auto& r : ds.item_raters(i))
        for (const auto& e : ds.profile(r.user).interactions)
          if (e.item != i && co[e.item]++ == 0) touched.push_back(e.item);
      std::vector<Neighbor> nbs;
      nbs.reserve(touched.size());
      const double pi = ds.popularity(i);
      for (ItemHandle j : touched) {
        nbs.push_back({j, co[j] / std::sqrt(pi * ds.popularity(j))});
        co[j] = 0;
      }
      detail::keep_top_k(nbs, k_);
      for (const auto& nb : nbs) reverse_[nb.id].push_back({i, nb.sim});
    }
  }

  RankedList recommend(UserHandle target, const RecommendationContext& ctx) const {
    detail::check_context(ds_, ctx);
    if (target >= ds_.num_users()) throw Error(ErrorKind::kUnknownUser, "unknown user handle " + std::to_string(target));
    auto excluded = detail::rated_mask(ds_, target);
    detail::ScoreAccumulator acc(ds_.num_items());
    for (const auto& e : ds_.profile(target).interactions) {
      const double w = decay_ ? decay_weight(age_days(ctx.t0, e.timestamp), ctx.decay) : 1.0;
      for (const auto& rn : reverse_[e.item]) {
        if (excluded[rn.id]) continue;
        acc.add(rn.id, rn.sim * w);
      }
    }
    return detail::finalize(ds_, target, acc.take(), ctx.top_n, excluded);
  }

 private:
  const Dataset& ds_;
  std::size_t k_;
  bool decay_;
  // reverse_[j] lists (i, sim(i, j)) for every item i that has j among its k nearest.
  std::vector<std::vector<Neighbor>> reverse_;
};

inline RankedList knn_recommend(const Dataset& ds, UserHandle target, const RecommendationContext& ctx,
                                KnnVariant variant, std::size_t k, bool decay_enabled) {
  if (variant == KnnVariant::kUser) return UserKnn(ds, k, decay_enabled).recommend(target, ctx);
  return ItemKnn(ds, k, decay_enabled).recommend(target, ctx);
}

}  // namespace timepop
