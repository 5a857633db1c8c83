#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "timepop/core.hpp"

namespace timepop {

enum class FileFormat { kMovielensDat, kDelimited };
enum class Field { kUser, kItem, kRating, kTimestamp };
enum class TimeUnit { kSeconds, kMilliseconds };

struct ParseConfig {
  FileFormat format = FileFormat::kDelimited;
  char delimiter = '\t';
  std::array<Field, 4> column_order{Field::kUser, Field::kItem, Field::kRating, Field::kTimestamp};
  TimeUnit timestamp_unit = TimeUnit::kSeconds;
  bool has_header = false;

  static ParseConfig movielens() {
    ParseConfig c;
    c.format = FileFormat::kMovielensDat;
    return c;
  }
  static ParseConfig tsv() { return {}; }
};

inline FileFormat parse_format(std::string_view tag) {
  if (tag == "movielens-dat") return FileFormat::kMovielensDat;
  if (tag == "delimited") return FileFormat::kDelimited;
  throw Error(ErrorKind::kConfig, "unknown format '" + std::string(tag) + "'");
}

inline TimeUnit parse_time_unit(std::string_view tag) {
  if (tag == "s" || tag == "seconds") return TimeUnit::kSeconds;
  if (tag == "ms" || tag == "milliseconds") return TimeUnit::kMilliseconds;
  throw Error(ErrorKind::kConfig, "unknown timestamp unit '" + std::string(tag) + "'");
}

/// Parses "user,item,rating,timestamp" (any permutation, each name once).
inline std::array<Field, 4> parse_column_order(std::string_view spec) {
  std::array<Field, 4> out{};
  std::array<bool, 4> seen{};
  std::size_t n = 0;
  while (true) {
    const auto comma = spec.find(',');
    const auto name = spec.substr(0, comma);
    Field f;
    if (name == "user") f = Field::kUser;
    else if (name == "item") f = Field::kItem;
    else if (name == "rating") f = Field::kRating;
    else if (name == "timestamp") f = Field::kTimestamp;
    else throw Error(ErrorKind::kConfig, "unknown column '" + std::string(name) + "'");
    const auto idx = static_cast<std::size_t>(f);
    if (n >= 4 || seen[idx]) throw Error(ErrorKind::kConfig, "column order must name each field exactly once");
    seen[idx] = true;
    out[n++] = f;
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  if (n != 4) throw Error(ErrorKind::kConfig, "column order must name each field exactly once");
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline std::string format_rating(double r) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), r);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

inline std::vector<Interaction> parse_interactions(std::istream& in, const ParseConfig& config) {
  const std::string sep = config.format == FileFormat::kMovielensDat ? "::" : std::string(1, config.delimiter);
  const std::array<Field, 4> order = config.format == FileFormat::kMovielensDat
                                         ? std::array<Field, 4>{Field::kUser, Field::kItem, Field::kRating,
                                                                Field::kTimestamp}
                                         : config.column_order;

  std::vector<Interaction> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = config.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = detail::split_fields(view, sep);
    auto malformed = [&](const std::string& why) {
      return Error(ErrorKind::kInvalidInput, "line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 4) throw malformed("expected 4 fields, found " + std::to_string(fields.size()));

    Interaction rec;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto f = detail::trim(fields[k]);
      switch (order[k]) {
        case Field::kUser:
          if (f.empty()) throw malformed("empty user id");
          rec.user = std::string(f);
          break;
        case Field::kItem:
          if (f.empty()) throw malformed("empty item id");
          rec.item = std::string(f);
          break;
        case Field::kRating:
          if (!detail::parse_number(f, rec.rating) || !std::isfinite(rec.rating))
            throw malformed("bad rating '" + std::string(f) + "'");
          break;
        case Field::kTimestamp: {
          if (!detail::parse_number(f, rec.timestamp) || rec.timestamp < 0)
            throw malformed("bad timestamp '" + std::string(f) + "'");
          if (config.timestamp_unit == TimeUnit::kMilliseconds) rec.timestamp /= 1000;
          break;
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<Interaction> read_interactions(const std::filesystem::path& path, const ParseConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return parse_interactions(in, config);
}

/// Orders records by (user id, timestamp, item id).
inline void sort_canonical(std::vector<Interaction>& records) {
  std::sort(records.begin(), records.end(), [](const Interaction& a, const Interaction& b) {
    if (a.user != b.user) return id_less(a.user, b.user);
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.item != b.item) return id_less(a.item, b.item);
    return a.rating < b.rating;
  });
}

/// Tab-separated user, item, rating, timestamp; one record per line.
inline void write_interactions(std::ostream& out, std::vector<Interaction> records) {
  sort_canonical(records);
  for (const auto& r : records)
    out << r.user << '\t' << r.item << '\t' << detail::format_rating(r.rating) << '\t' << r.timestamp << '\n';
}

struct SplitPaths {
  std::filesystem::path train;
  std::filesystem::path test;
};

inline SplitPaths split_paths(const std::filesystem::path& destination) {
  return {destination.string() + ".train.tsv", destination.string() + ".test.tsv"};
}

/// Writes `<destination>.train.tsv` and `<destination>.test.tsv`.
inline SplitPaths write_split(std::vector<Interaction> train, std::vector<Interaction> test,
                              const std::filesystem::path& destination) {
  if (train.empty() || test.empty()) throw Error(ErrorKind::kInvalidInput, "train and test must be non-empty");
  const auto paths = split_paths(destination);
  if (destination.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(destination.parent_path(), ec);
  }
  auto write_one = [](const std::filesystem::path& p, std::vector<Interaction> recs) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + p.string());
    write_interactions(out, std::move(recs));
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + p.string());
  };
  write_one(paths.train, std::move(train));
  write_one(paths.test, std::move(test));
  return paths;
}

}  // namespace timepop
