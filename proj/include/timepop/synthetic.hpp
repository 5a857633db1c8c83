#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "timepop/core.hpp"

namespace timepop::synthetic {

/// Draws from std::mt19937_64 through fixed arithmetic so sequences do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

inline constexpr Timestamp kEpoch = 1'000'000'000;

/// Communities of "leader" users who consume a shared item sequence early
/// and "follower" users who consume the same sequence with a lag, on top of
/// globally popular noise items with uninformative ratings. A follower's
/// future items are the ones its leaders rated most recently.
struct PlantedConfig {
  std::size_t users = 500;
  std::size_t communities = 25;
  std::size_t leaders_per_community = 5;
  std::size_t pool_size = 60;
  std::size_t global_items = 100;
  std::size_t noise_per_user = 8;
  std::uint64_t seed = 42;
};

inline std::vector<Interaction> planted_signal(const PlantedConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<Interaction> out;
  const std::size_t per_community = cfg.users / cfg.communities;
  auto day = [](double d) { return kEpoch + static_cast<Timestamp>(d * kSecondsPerDay); };

  // Zipf-like cumulative weights over the global items.
  std::vector<double> cum(cfg.global_items);
  double total = 0.0;
  for (std::size_t k = 0; k < cfg.global_items; ++k) cum[k] = (total += 1.0 / std::pow(k + 1.0, 0.9));

  for (std::size_t c = 0; c < cfg.communities; ++c) {
    std::vector<std::size_t> order(cfg.pool_size);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);

    for (std::size_t m = 0; m < per_community; ++m) {
      const std::string user = "u" + std::to_string(c * per_community + m);
      const bool leader = m < cfg.leaders_per_community;
      const double lag = leader ? 0.0 : 150.0 + static_cast<double>(rng.below(101));
      const double keep = leader ? 0.75 : 0.7;
      for (std::size_t k = 0; k < cfg.pool_size; ++k) {
        if (rng.uniform() >= keep) continue;
        const double when = 10.0 * static_cast<double>(k) + lag + 8.0 * rng.uniform();
        const double rating = leader ? static_cast<double>(rng.between(4, 5))
                                     : (rng.uniform() < 0.8 ? static_cast<double>(rng.between(4, 5)) : 3.0);
        out.push_back({user, "c" + std::to_string(c) + "_" + std::to_string(order[k]), rating, day(when)});
      }
      std::unordered_set<std::size_t> picked;
      while (picked.size() < cfg.noise_per_user) {
        const double x = rng.uniform() * total;
        const auto g = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), x) - cum.begin());
        if (g >= cfg.global_items || !picked.insert(g).second) continue;
        out.push_back({user, "g" + std::to_string(g), static_cast<double>(rng.between(1, 5)),
                       day(1000.0 * rng.uniform())});
      }
    }
  }
  return out;
}

/// Movielens-1M-shaped random data: heavy-tailed profile sizes, Zipf item
/// popularity, each user active in a window of up to 200 days.
struct ScaleConfig {
  std::size_t users = 6040;
  std::size_t items = 3700;
  std::size_t min_profile = 20;
  double profile_scale = 760.0;
  std::uint64_t seed = 7;
};

inline std::vector<Interaction> movielens_like(const ScaleConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<double> cum(cfg.items);
  double total = 0.0;
  for (std::size_t k = 0; k < cfg.items; ++k) cum[k] = (total += 1.0 / std::pow(k + 1.0, 0.8));

  std::vector<Interaction> out;
  out.reserve(cfg.users * (cfg.min_profile + static_cast<std::size_t>(cfg.profile_scale / 5.0)));
  std::vector<char> taken(cfg.items);
  for (std::size_t u = 0; u < cfg.users; ++u) {
    const double x = rng.uniform();
    const auto n = std::min(cfg.items / 2, cfg.min_profile + static_cast<std::size_t>(x * x * x * x * cfg.profile_scale));
    const Timestamp start = kEpoch + rng.between(0, 900) * kSecondsPerDay;
    const Timestamp span = rng.between(1, 200) * kSecondsPerDay;
    std::fill(taken.begin(), taken.end(), 0);
    for (std::size_t k = 0; k < n;) {
      const double y = rng.uniform() * total;
      const auto item = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), y) - cum.begin());
      if (item >= cfg.items || taken[item]) continue;
      taken[item] = 1;
      ++k;
      const double r = rng.uniform();
      const double rating = r < 0.06 ? 1 : r < 0.17 ? 2 : r < 0.43 ? 3 : r < 0.78 ? 4 : 5;
      out.push_back({std::to_string(u + 1), std::to_string(item + 1), rating,
                     start + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(span)))});
    }
  }
  return out;
}

}  // namespace timepop::synthetic
