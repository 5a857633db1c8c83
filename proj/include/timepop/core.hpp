#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace timepop {

using Timestamp = std::int64_t;
using UserHandle = std::uint32_t;
using ItemHandle = std::uint32_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

enum class ErrorKind {
  kInvalidInput,
  kConfig,
  kIo,
  kUnknownUser,
  kInfeasible,
  kDegenerate,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// One (user, item, rating, timestamp) event as read from a ratings file.
struct Interaction {
  std::string user;
  std::string item;
  double rating = 0.0;
  Timestamp timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// Ordering on external ids: all-digit ids compare numerically and sort
/// before any other id; everything else compares lexicographically.
inline bool id_less(std::string_view a, std::string_view b) {
  auto numeric = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  const bool na = numeric(a), nb = numeric(b);
  if (na != nb) return na;
  if (na) {
    auto strip = [](std::string_view s) {
      const auto p = s.find_first_not_of('0');
      return p == std::string_view::npos ? std::string_view{} : s.substr(p);
    };
    const auto sa = strip(a), sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

struct IdLess {
  bool operator()(std::string_view a, std::string_view b) const { return id_less(a, b); }
};

struct ProfileEntry {
  ItemHandle item;
  Timestamp timestamp;
  double rating;
};

struct RaterEntry {
  UserHandle user;
  Timestamp timestamp;
  double rating;
};

/// A user's interactions ordered by (timestamp, item id).
struct UserProfile {
  UserHandle user = 0;
  std::vector<ProfileEntry> interactions;
  Timestamp last_activity = 0;
};

class Dataset;
inline Dataset build_dataset(std::span<const Interaction> records);

/// Immutable bidirectional index over a set of interactions.
///
/// External ids are interned into dense handles assigned in `id_less` order,
/// so comparing handles is the same as comparing external ids. Each
/// (user, item) pair occurs at most once: duplicates collapse to the record
/// with the earliest timestamp.
class Dataset {
 public:
  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }
  std::size_t num_interactions() const { return num_interactions_; }

  const std::string& user_id(UserHandle u) const { return user_ids_.at(u); }
  const std::string& item_id(ItemHandle i) const { return item_ids_.at(i); }
  std::span<const std::string> user_ids() const { return user_ids_; }
  std::span<const std::string> item_ids() const { return item_ids_; }

  bool has_user(std::string_view id) const { return user_index_.count(std::string(id)) != 0; }
  bool has_item(std::string_view id) const { return item_index_.count(std::string(id)) != 0; }

  UserHandle user_handle(std::string_view id) const {
    auto it = user_index_.find(std::string(id));
    if (it == user_index_.end()) throw Error(ErrorKind::kUnknownUser, "unknown user '" + std::string(id) + "'");
    return it->second;
  }
  ItemHandle item_handle(std::string_view id) const {
    auto it = item_index_.find(std::string(id));
    if (it == item_index_.end()) throw Error(ErrorKind::kInvalidInput, "unknown item '" + std::string(id) + "'");
    return it->second;
  }

  const UserProfile& profile(UserHandle u) const { return profiles_.at(u); }
  std::span<const UserProfile> profiles() const { return profiles_; }

  /// Raters of an item ordered by (timestamp, user id).
  std::span<const RaterEntry> item_raters(ItemHandle i) const { return item_raters_.at(i); }
  std::uint32_t popularity(ItemHandle i) const { return static_cast<std::uint32_t>(item_raters_.at(i).size()); }

  Timestamp max_timestamp() const { return max_timestamp_; }
  Timestamp min_timestamp() const { return min_timestamp_; }

  /// Items ordered by (popularity descending, item id ascending).
  std::span<const ItemHandle> items_by_popularity() const { return by_popularity_; }

  /// Every stored interaction, grouped by user and time-ordered within a user.
  std::vector<Interaction> interactions() const {
    std::vector<Interaction> out;
    out.reserve(num_interactions_);
    for (const auto& p : profiles_)
      for (const auto& e : p.interactions)
        out.push_back({user_ids_[p.user], item_ids_[e.item], e.rating, e.timestamp});
    return out;
  }

  friend Dataset build_dataset(std::span<const Interaction> records);

 private:
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, UserHandle> user_index_;
  std::unordered_map<std::string, ItemHandle> item_index_;
  std::vector<UserProfile> profiles_;
  std::vector<std::vector<RaterEntry>> item_raters_;
  std::vector<ItemHandle> by_popularity_;
  std::size_t num_interactions_ = 0;
  Timestamp max_timestamp_ = 0;
  Timestamp min_timestamp_ = 0;
};

namespace detail {

inline std::string describe(const Interaction& r) {
  return "(" + r.user + ", " + r.item + ", " + std::to_string(r.rating) + ", " + std::to_string(r.timestamp) + ")";
}

template <typename Handle>
std::unordered_map<std::string, Handle> intern(std::vector<std::string>& ids) {
  std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) { return id_less(a, b); });
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::unordered_map<std::string, Handle> index;
  index.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) index.emplace(ids[k], static_cast<Handle>(k));
  return index;
}

}  // namespace detail

inline Dataset build_dataset(std::span<const Interaction> records) {
  if (records.empty()) throw Error(ErrorKind::kInvalidInput, "empty dataset");

  Dataset ds;
  {
    std::vector<std::string> users, items;
    users.reserve(records.size());
    items.reserve(records.size());
    for (const auto& r : records) {
      if (!std::isfinite(r.rating))
        throw Error(ErrorKind::kInvalidInput, "non-finite rating in record " + detail::describe(r));
      if (r.timestamp < 0)
        throw Error(ErrorKind::kInvalidInput, "negative timestamp in record " + detail::describe(r));
      users.push_back(r.user);
      items.push_back(r.item);
    }
    ds.user_index_ = detail::intern<UserHandle>(users);
    ds.item_index_ = detail::intern<ItemHandle>(items);
    ds.user_ids_ = std::move(users);
    ds.item_ids_ = std::move(items);
  }

  struct Row {
    UserHandle user;
    ItemHandle item;
    Timestamp timestamp;
    double rating;
  };
  std::vector<Row> rows;
  rows.reserve(records.size());
  for (const auto& r : records)
    rows.push_back({ds.user_index_.at(r.user), ds.item_index_.at(r.item), r.timestamp, r.rating});

  // Earliest record per (user, item) wins; on equal timestamps the higher
  // rating wins so the result does not depend on input order.
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.item != b.item) return a.item < b.item;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.rating > b.rating;
  });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.user == b.user && a.item == b.item; }),
             rows.end());

  ds.num_interactions_ = rows.size();
  ds.profiles_.resize(ds.user_ids_.size());
  ds.item_raters_.resize(ds.item_ids_.size());
  ds.min_timestamp_ = rows.front().timestamp;
  ds.max_timestamp_ = rows.front().timestamp;
  for (UserHandle u = 0; u < ds.profiles_.size(); ++u) ds.profiles_[u].user = u;
  for (const auto& r : rows) {
    ds.profiles_[r.user].interactions.push_back({r.item, r.timestamp, r.rating});
    ds.item_raters_[r.item].push_back({r.user, r.timestamp, r.rating});
    ds.min_timestamp_ = std::min(ds.min_timestamp_, r.timestamp);
    ds.max_timestamp_ = std::max(ds.max_timestamp_, r.timestamp);
  }
  for (auto& p : ds.profiles_) {
    std::sort(p.interactions.begin(), p.interactions.end(), [](const ProfileEntry& a, const ProfileEntry& b) {
      return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.item < b.item;
    });
    p.last_activity = p.interactions.back().timestamp;
  }
  for (auto& raters : ds.item_raters_) {
    std::sort(raters.begin(), raters.end(), [](const RaterEntry& a, const RaterEntry& b) {
      return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.user < b.user;
    });
  }

  ds.by_popularity_.resize(ds.item_ids_.size());
  for (ItemHandle i = 0; i < ds.by_popularity_.size(); ++i) ds.by_popularity_[i] = i;
  std::stable_sort(ds.by_popularity_.begin(), ds.by_popularity_.end(), [&](ItemHandle a, ItemHandle b) {
    return ds.item_raters_[a].size() > ds.item_raters_[b].size();
  });
  return ds;
}

inline Dataset build_dataset(const std::vector<Interaction>& records) {
  return build_dataset(std::span<const Interaction>(records));
}

}  // namespace timepop
