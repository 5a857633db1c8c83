// timepop: split, recommend, evaluate and inspect from the command line.
//
// Every subcommand that writes files also writes a key = value manifest with
// its effective parameters; `timepop replay --manifest F` re-runs it.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "timepop/timepop.hpp"

namespace fs = std::filesystem;
using namespace timepop;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIoError = 3,
  kInfeasibleSplit = 4,
  kBadInput = 5,
  kDegenerateData = 6,
  kBadConfig = 7,
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return kIoError;
    case ErrorKind::kInfeasible: return kInfeasibleSplit;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kUnknownUser: return kBadInput;
    case ErrorKind::kDegenerate: return kDegenerateData;
    case ErrorKind::kConfig: return kBadConfig;
  }
  return kBadInput;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string to_text(double v) { return detail::format_rating(v); }

class Manifest {
 public:
  explicit Manifest(std::string command) { set("command", std::move(command)); }

  void set(const std::string& key, std::string value) {
    for (auto& kv : entries_)
      if (kv.first == key) {
        kv.second = std::move(value);
        return;
      }
    entries_.emplace_back(key, std::move(value));
  }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  }

  static std::vector<std::pair<std::string, std::string>> read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Options shared by the reading side of every subcommand.
struct ParseOptions {
  std::string format = "delimited";
  std::string delimiter = "\t";
  std::string columns = "user,item,rating,timestamp";
  std::string time_unit = "s";
  bool header = false;

  void add_to(CLI::App* app) {
    app->add_option("--format", format, "movielens-dat | delimited")->capture_default_str();
    app->add_option("--delimiter", delimiter, "field separator for delimited input (\\t for tab)");
    app->add_option("--columns", columns, "column order, e.g. user,item,rating,timestamp")->capture_default_str();
    app->add_option("--time-unit", time_unit, "s | ms")->capture_default_str();
    app->add_flag("--header", header, "skip the first line");
  }

  ParseConfig config() const {
    ParseConfig c;
    c.format = parse_format(format);
    const std::string d = delimiter == "\\t" || delimiter == "tab" ? "\t" : delimiter;
    if (d.size() != 1) throw Error(ErrorKind::kConfig, "delimiter must be a single character");
    c.delimiter = d.front();
    c.column_order = parse_column_order(columns);
    c.timestamp_unit = parse_time_unit(time_unit);
    c.has_header = header;
    return c;
  }

  void record(Manifest& m) const {
    m.set("format", format);
    m.set("delimiter", delimiter == "\t" ? "\\t" : delimiter);
    m.set("columns", columns);
    m.set("time-unit", time_unit);
    m.set("header", header ? "true" : "false");
  }
};

// Options for producing recommendations from a training file.
struct AlgoOptions {
  std::string train;
  std::string test;
  std::string algo = "timepop";
  double beta = 0.005;
  std::string decay = "exp";
  std::string tau = "auto";
  std::size_t k = 50;
  bool knn_decay = false;
  std::size_t topn = 10;
  std::optional<Timestamp> t0;
  std::string out;

  void add_to(CLI::App* app, bool test_required) {
    app->add_option("--train", train, "training TSV")->required()->check(CLI::ExistingFile);
    auto* t = app->add_option("--test", test, "test TSV")->check(CLI::ExistingFile);
    if (test_required) t->required();
    app->add_option("--algo", algo, "timepop | mostpop | user-knn | item-knn")
        ->capture_default_str()
        ->check(CLI::IsMember({"timepop", "mostpop", "user-knn", "item-knn"}));
    app->add_option("--beta", beta, "decay rate per day")->capture_default_str();
    app->add_option("--decay", decay, "exp | linear | none")->capture_default_str();
    app->add_option("--tau", tau, "precursor threshold: auto or a number")->capture_default_str();
    app->add_option("--k", k, "neighbourhood size for kNN baselines")->capture_default_str();
    app->add_flag("--knn-decay", knn_decay, "time-decay variant of the kNN baselines");
    app->add_option("--topn", topn, "list length")->capture_default_str();
    app->add_option("--t0", t0, "reference time in seconds (default: split time, else last training time)");
    app->add_option("--out", out, "output prefix (default: derived from --train and --algo)");
  }

  TauMode tau_mode() const {
    if (tau == "auto") return TauMode::automatic();
    try {
      std::size_t used = 0;
      const double v = std::stod(tau, &used);
      if (used == tau.size()) return TauMode::fixed_value(v);
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::kConfig, "--tau must be 'auto' or a number");
  }

  std::string prefix() const {
    if (!out.empty()) return out;
    std::string base = train;
    const std::string suffix = ".train.tsv";
    if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
      base.resize(base.size() - suffix.size());
    return base + "." + algo;
  }

  void record(Manifest& m, Timestamp effective_t0) const {
    m.set("train", train);
    if (!test.empty()) m.set("test", test);
    m.set("algo", algo);
    m.set("beta", to_text(beta));
    m.set("decay", decay);
    m.set("tau", tau);
    m.set("k", std::to_string(k));
    m.set("knn-decay", knn_decay ? "true" : "false");
    m.set("topn", std::to_string(topn));
    m.set("t0", std::to_string(effective_t0));
    m.set("out", prefix());
  }
};

std::optional<Timestamp> split_time_from_manifest(const std::string& train_path) {
  const std::string suffix = ".train.tsv";
  if (train_path.size() <= suffix.size() ||
      train_path.compare(train_path.size() - suffix.size(), suffix.size(), suffix) != 0)
    return std::nullopt;
  const fs::path manifest = train_path.substr(0, train_path.size() - suffix.size()) + ".split.manifest";
  if (!fs::exists(manifest)) return std::nullopt;
  for (const auto& [k, v] : Manifest::read(manifest))
    if (k == "result.split_time") return std::stoll(v);
  return std::nullopt;
}

using Producer = std::function<RankedList(UserHandle, std::size_t)>;

struct Engine {
  std::unique_ptr<UserKnn> user_knn;
  std::unique_ptr<ItemKnn> item_knn;
  Producer produce;
};

Engine make_engine(const Dataset& train, const AlgoOptions& opt, const RecommendationContext& base) {
  Engine e;
  if (opt.algo == "timepop") {
    e.produce = [&train, base](UserHandle u, std::size_t n) {
      auto ctx = base;
      ctx.top_n = n;
      return timepop_recommend(train, u, ctx);
    };
  } else if (opt.algo == "mostpop") {
    e.produce = [&train](UserHandle u, std::size_t n) { return most_popular(train, u, n); };
  } else if (opt.algo == "user-knn") {
    e.user_knn = std::make_unique<UserKnn>(train, opt.k, opt.knn_decay);
    e.produce = [knn = e.user_knn.get(), base](UserHandle u, std::size_t n) {
      auto ctx = base;
      ctx.top_n = n;
      return knn->recommend(u, ctx);
    };
  } else {
    e.item_knn = std::make_unique<ItemKnn>(train, opt.k, opt.knn_decay);
    e.produce = [knn = e.item_knn.get(), base](UserHandle u, std::size_t n) {
      auto ctx = base;
      ctx.top_n = n;
      return knn->recommend(u, ctx);
    };
  }
  return e;
}

struct Loaded {
  Dataset train;
  std::vector<Interaction> test;
  RecommendationContext ctx;
};

Loaded load(const AlgoOptions& opt, const ParseOptions& parse) {
  const auto cfg = parse.config();
  Loaded l{build_dataset(read_interactions(opt.train, cfg)), {}, {}};
  if (!opt.test.empty()) l.test = read_interactions(opt.test, cfg);
  l.ctx.top_n = opt.topn;
  l.ctx.decay = {opt.beta, parse_decay_kind(opt.decay)};
  l.ctx.tau_mode = opt.tau_mode();
  if (opt.t0) l.ctx.t0 = *opt.t0;
  else if (auto st = split_time_from_manifest(opt.train)) l.ctx.t0 = *st;
  else l.ctx.t0 = l.train.max_timestamp();
  if (opt.beta <= 0.0) throw Error(ErrorKind::kConfig, "--beta must be positive");
  if (opt.topn < 1) throw Error(ErrorKind::kConfig, "--topn must be at least 1");
  return l;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_file(const fs::path& path, const std::string& content) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

// --- subcommands -----------------------------------------------------------

struct SplitOptions {
  std::string input;
  std::size_t min_train = 15;
  std::size_t min_test = 5;
  std::string boundary = "test";
  std::optional<Timestamp> split_time;
  std::string out;
};

int run_split(const SplitOptions& opt, const ParseOptions& parse) {
  const auto records = read_interactions(opt.input, parse.config());
  const auto ds = build_dataset(records);
  const auto boundary = opt.boundary == "train" ? SplitBoundary::kEqualToTrain : SplitBoundary::kEqualToTest;
  SplitSpec spec = opt.split_time ? SplitSpec{*opt.split_time, opt.min_train, opt.min_test, boundary}
                                  : find_best_split(ds, opt.min_train, opt.min_test, boundary);
  auto result = apply_split(ds, spec);
  ensure_parent(opt.out);
  const auto paths = write_split(std::move(result.train), std::move(result.test), opt.out);

  Manifest m("split");
  m.set("input", opt.input);
  parse.record(m);
  m.set("min-train", std::to_string(opt.min_train));
  m.set("min-test", std::to_string(opt.min_test));
  m.set("boundary", opt.boundary);
  if (opt.split_time) m.set("split-time", std::to_string(*opt.split_time));
  m.set("out", opt.out);
  m.set("result.split_time", std::to_string(spec.split_time));
  m.set("result.evaluated_users", std::to_string(result.evaluated_users.size()));
  m.set("result.train_file", paths.train.string());
  m.set("result.test_file", paths.test.string());
  m.write(opt.out + ".split.manifest");

  std::cout << "split_time\t" << spec.split_time << "\nevaluated_users\t" << result.evaluated_users.size()
            << "\ntrain\t" << paths.train.string() << "\ntest\t" << paths.test.string() << '\n';
  return kOk;
}

int run_recommend(const AlgoOptions& opt, const ParseOptions& parse) {
  auto l = load(opt, parse);
  std::vector<UserHandle> users;
  if (!l.test.empty()) {
    for (const auto& [user, recs] : group_by_user(l.test)) users.push_back(l.train.user_handle(user));
  } else {
    for (UserHandle u = 0; u < l.train.num_users(); ++u) users.push_back(u);
  }
  auto engine = make_engine(l.train, opt, l.ctx);

  std::vector<std::string> blocks(users.size());
  parallel_for(users.size(), default_workers(), [&](std::size_t k) {
    const auto list = engine.produce(users[k], opt.topn);
    std::string block;
    const auto& uid = l.train.user_id(list.user);
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      const auto& e = list.entries[r];
      block += uid + '\t' + std::to_string(r + 1) + '\t' + l.train.item_id(e.item) + '\t' + fixed(e.score, 6) +
               '\t' + std::string(to_string(e.source)) + '\n';
    }
    blocks[k] = std::move(block);
  });
  std::string content;
  for (auto& b : blocks) content += b;

  const std::string prefix = opt.prefix();
  write_file(prefix + ".recs.tsv", content);
  Manifest m("recommend");
  parse.record(m);
  opt.record(m, l.ctx.t0);
  m.set("result.users", std::to_string(users.size()));
  m.write(prefix + ".recommend.manifest");
  std::cout << "recommendations\t" << prefix << ".recs.tsv\nusers\t" << users.size() << '\n';
  return kOk;
}

struct EvalOptions {
  double threshold = 4.0;
  bool keep_empty = false;
};

int run_evaluate(const AlgoOptions& opt, const EvalOptions& eopt, const ParseOptions& parse) {
  auto l = load(opt, parse);
  if (opt.topn < 2) throw Error(ErrorKind::kConfig, "--topn must be at least 2 for evaluation");
  EvalConfig cfg{opt.topn, eopt.threshold, !eopt.keep_empty};
  auto engine = make_engine(l.train, opt, l.ctx);
  const auto report = evaluate(l.train, l.test, engine.produce, cfg, default_workers());

  std::string summary = "N\tmean_ndcg\tevaluated_count\n";
  std::string plot = "N," + opt.algo + "\n";
  for (const auto& [n, mean] : report.per_n) {
    summary += std::to_string(n) + '\t' + fixed(mean, 10) + '\t' + std::to_string(report.evaluated_count) + '\n';
    plot += std::to_string(n) + ',' + fixed(mean, 10) + '\n';
  }
  std::string per_user = "user";
  for (std::size_t n = 2; n <= opt.topn; ++n) per_user += "\tndcg@" + std::to_string(n);
  per_user += '\n';
  for (const auto& u : report.per_user) {
    per_user += u.user;
    for (double v : u.ndcg) per_user += '\t' + fixed(v, 10);
    per_user += '\n';
  }

  const std::string prefix = opt.prefix();
  write_file(prefix + ".report.tsv", summary);
  write_file(prefix + ".per_user.tsv", per_user);
  write_file(prefix + ".plot.csv", plot);
  Manifest m("evaluate");
  parse.record(m);
  opt.record(m, l.ctx.t0);
  m.set("threshold", to_text(eopt.threshold));
  m.set("keep-empty-users", eopt.keep_empty ? "true" : "false");
  m.set("result.evaluated_count", std::to_string(report.evaluated_count));
  m.write(prefix + ".evaluate.manifest");
  std::cout << summary;
  return kOk;
}

struct InspectOptions {
  std::string train;
  std::string user;
  std::string tau = "auto";
  std::string out;
};

int run_inspect(const InspectOptions& opt, const ParseOptions& parse) {
  const auto ds = build_dataset(read_interactions(opt.train, parse.config()));
  AlgoOptions tmp;
  tmp.tau = opt.tau;
  const auto pset = precursor_set(ds, ds.user_handle(opt.user), tmp.tau_mode());
  std::string content = "candidate\tcommon_before\tis_precursor\n";
  for (const auto& c : pset.candidates) {
    const bool is_pre = std::binary_search(pset.precursors.begin(), pset.precursors.end(), c.candidate);
    content += ds.user_id(c.candidate) + '\t' + std::to_string(c.common_before) + '\t' + (is_pre ? "1" : "0") + '\n';
  }
  if (opt.out.empty()) {
    std::cout << "# user " << opt.user << " tau " << to_text(pset.tau) << '\n' << content;
  } else {
    write_file(opt.out, content);
    Manifest m("inspect-precursors");
    m.set("train", opt.train);
    parse.record(m);
    m.set("user", opt.user);
    m.set("tau", opt.tau);
    m.set("out", opt.out);
    m.set("result.tau", to_text(pset.tau));
    m.write(opt.out + ".manifest");
  }
  return kOk;
}

std::map<std::string, double> read_per_user(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kInvalidInput, path + ": empty file");
  const auto header = detail::split_fields(line, "\t");
  const std::string want = "ndcg@" + std::to_string(n);
  const auto col = static_cast<std::size_t>(std::find(header.begin(), header.end(), want) - header.begin());
  if (col >= header.size()) throw Error(ErrorKind::kInvalidInput, path + ": no column " + want);
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_fields(line, "\t");
    if (f.size() != header.size()) throw Error(ErrorKind::kInvalidInput, path + ": ragged row");
    double v = 0.0;
    if (!detail::parse_number(f[col], v)) throw Error(ErrorKind::kInvalidInput, path + ": bad value");
    out[std::string(f[0])] = v;
  }
  return out;
}

int run_ttest(const std::string& a, const std::string& b, std::size_t n) {
  const auto res = paired_ttest(read_per_user(a, n), read_per_user(b, n));
  std::cout << "n\t" << res.common_users << "\nt\t" << fixed(res.t_statistic, 10) << "\np\t"
            << fixed(res.p_value, 10) << '\n';
  return kOk;
}

struct GenerateOptions {
  std::string kind = "planted";
  std::uint64_t seed = 42;
  std::size_t users = 0;
  std::string out;
};

int run_generate(const GenerateOptions& opt) {
  std::vector<Interaction> records;
  std::string content;
  if (opt.kind == "planted") {
    synthetic::PlantedConfig cfg;
    cfg.seed = opt.seed;
    if (opt.users) cfg.users = opt.users;
    records = synthetic::planted_signal(cfg);
    std::ostringstream os;
    write_interactions(os, records);
    content = os.str();
  } else {
    synthetic::ScaleConfig cfg;
    cfg.seed = opt.seed;
    if (opt.users) cfg.users = opt.users;
    records = synthetic::movielens_like(cfg);
    content.reserve(records.size() * 32);
    for (const auto& r : records)
      content += r.user + "::" + r.item + "::" + to_text(r.rating) + "::" + std::to_string(r.timestamp) + '\n';
  }
  write_file(opt.out, content);
  std::cout << "interactions\t" << records.size() << '\n';
  return kOk;
}

int dispatch(int argc, const char* const* argv);

int run_replay(const std::string& manifest) {
  const auto entries = Manifest::read(manifest);
  if (entries.empty() || entries.front().first != "command")
    throw Error(ErrorKind::kInvalidInput, manifest + ": missing command line");
  std::vector<std::string> args{"timepop", entries.front().second};
  for (std::size_t k = 1; k < entries.size(); ++k) {
    const auto& [key, value] = entries[k];
    if (key.rfind("result.", 0) == 0) continue;
    if (value == "false") continue;
    if (value == "true") args.push_back("--" + key);
    else args.push_back("--" + key + "=" + value);
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Time-aware local popularity recommender and evaluation toolkit", "timepop"};
  app.require_subcommand(1);

  ParseOptions parse;

  SplitOptions split;
  auto* split_cmd = app.add_subcommand("split", "fixed-timestamp train/test split");
  split_cmd->add_option("--input", split.input, "ratings file")->required()->check(CLI::ExistingFile);
  parse.add_to(split_cmd);
  split_cmd->add_option("--min-train", split.min_train, "minimum training interactions")->capture_default_str();
  split_cmd->add_option("--min-test", split.min_test, "minimum test interactions")->capture_default_str();
  split_cmd->add_option("--boundary", split.boundary, "side for interactions at the split instant")
      ->capture_default_str()
      ->check(CLI::IsMember({"test", "train"}));
  split_cmd->add_option("--split-time", split.split_time, "use this split time instead of searching");
  split_cmd->add_option("--out", split.out, "output prefix")->required();

  AlgoOptions rec;
  auto* rec_cmd = app.add_subcommand("recommend", "write top-N lists");
  rec.add_to(rec_cmd, false);
  parse.add_to(rec_cmd);

  AlgoOptions ev;
  EvalOptions eopt;
  auto* ev_cmd = app.add_subcommand("evaluate", "nDCG@2..N over the test users");
  ev.add_to(ev_cmd, true);
  parse.add_to(ev_cmd);
  ev_cmd->add_option("--threshold", eopt.threshold, "minimum rating of a relevant test item")->capture_default_str();
  ev_cmd->add_flag("--keep-empty-users", eopt.keep_empty, "count users without relevant items as 0");

  InspectOptions ins;
  auto* ins_cmd = app.add_subcommand("inspect-precursors", "dump a user's candidate precursors");
  ins_cmd->add_option("--train", ins.train, "training TSV")->required()->check(CLI::ExistingFile);
  ins_cmd->add_option("--user", ins.user, "target user id")->required();
  ins_cmd->add_option("--tau", ins.tau, "auto or a number")->capture_default_str();
  ins_cmd->add_option("--out", ins.out, "output TSV (default: stdout)");
  parse.add_to(ins_cmd);

  std::string tt_a, tt_b;
  std::size_t tt_n = 10;
  auto* tt_cmd = app.add_subcommand("ttest", "paired t-test over two per-user nDCG files");
  tt_cmd->add_option("--a", tt_a, "per-user TSV of the first algorithm")->required()->check(CLI::ExistingFile);
  tt_cmd->add_option("--b", tt_b, "per-user TSV of the second algorithm")->required()->check(CLI::ExistingFile);
  tt_cmd->add_option("--n", tt_n, "cutoff column to compare")->capture_default_str();

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic dataset");
  gen_cmd->add_option("--kind", gen.kind, "planted | movielens")
      ->capture_default_str()
      ->check(CLI::IsMember({"planted", "movielens"}));
  gen_cmd->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  gen_cmd->add_option("--users", gen.users, "number of users (default per kind)");
  gen_cmd->add_option("--out", gen.out, "output file")->required();

  std::string replay_manifest;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a subcommand from its manifest");
  replay_cmd->add_option("--manifest", replay_manifest, "manifest file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    const bool missing_file = std::string(e.what()).find("does not exist") != std::string::npos;
    return missing_file ? kIoError : kUsage;
  }

  if (*split_cmd) return run_split(split, parse);
  if (*rec_cmd) return run_recommend(rec, parse);
  if (*ev_cmd) return run_evaluate(ev, eopt, parse);
  if (*ins_cmd) return run_inspect(ins, parse);
  if (*tt_cmd) return run_ttest(tt_a, tt_b, tt_n);
  if (*gen_cmd) return run_generate(gen);
  if (*replay_cmd) return run_replay(replay_manifest);
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const Error& e) {
    std::cerr << "timepop: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "timepop: " << e.what() << '\n';
    return kBadInput;
  }
}
