#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "lmnl/error.hpp"

namespace lmnl::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t alternative_index(const std::vector<std::string>& alts, const std::string& name) {
  const auto it = std::find(alts.begin(), alts.end(), name);
  if (it == alts.end()) throw ConfigError("unknown alternative '" + name + "'");
  return static_cast<std::size_t>(it - alts.begin());
}

std::vector<Eigen::Index> widths(const Config& c, Eigen::Index fallback) {
  std::vector<Eigen::Index> out;
  for (const auto& w : c.list("model.width")) out.push_back(std::stol(w));
  if (out.empty()) out.push_back(fallback);
  return out;
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream is(text);
  try {
    pt::read_ini(is, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

bool Config::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return trim(tree_.get<std::string>(key, fallback));
}

std::string Config::str(const std::string& key) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) throw ConfigError("config: missing required key '" + key + "'");
  return trim(*v);
}

double Config::real(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const auto s = str(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' is not a number: '" + s + "'");
}

long long Config::integer(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const auto s = str(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' is not an integer: '" + s + "'");
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  auto s = str(key);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("config: '" + key + "' is not a boolean: '" + s + "'");
}

std::vector<std::string> Config::list(const std::string& key) const {
  return has(key) ? split_on(str(key), ',') : std::vector<std::string>{};
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : list(key)) {
    try {
      out.push_back(std::stod(s));
    } catch (const std::exception&) {
      throw ConfigError("config: '" + key + "' has a non-numeric entry '" + s + "'");
    }
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

std::vector<std::pair<std::string, std::string>> Config::section(const std::string& name) const {
  std::vector<std::pair<std::string, std::string>> out;
  if (auto child = tree_.get_child_optional(name)) {
    for (const auto& [k, v] : *child) out.emplace_back(k, trim(v.data()));
  }
  return out;
}

std::string Config::canonical() const {
  // sorted so key order in the file does not change the hash; [spec] order
  // matters for parameter order, so it is kept as written
  std::vector<std::string> lines;
  for (const auto& [sec, child] : tree_) {
    if (child.empty()) {
      lines.push_back(sec + "=" + trim(child.data()));
      continue;
    }
    std::vector<std::string> part;
    for (const auto& [k, v] : child) part.push_back(sec + "." + k + "=" + trim(v.data()));
    if (sec != "spec") std::sort(part.begin(), part.end());
    lines.insert(lines.end(), part.begin(), part.end());
  }
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Config::write(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  pt::write_ini(f, tree_);
}

std::filesystem::path make_run_dir(const std::filesystem::path& out_dir, const std::string& command,
                                   const Config& config) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  auto dir = out_dir / (command + "-" + config.hash() + "-" + stamp);
  for (int k = 1; std::filesystem::exists(dir); ++k) {
    dir = out_dir / (command + "-" + config.hash() + "-" + stamp + "-" + std::to_string(k));
  }
  std::filesystem::create_directories(dir);
  config.write(dir / "config.ini");
  return dir;
}

TrainConfig train_config(const Config& c) {
  TrainConfig t;
  t.epochs = static_cast<int>(c.integer("train.epochs", t.epochs));
  const auto batch = c.integer("train.batch_size", static_cast<long long>(t.batch_size));
  if (batch < 0) throw ConfigError("train.batch_size must be >= 0");
  t.batch_size = static_cast<std::size_t>(batch);
  t.dropout = c.real("train.dropout", t.dropout);
  t.l2 = c.real("train.l2", t.l2);
  t.learning_rate = c.real("train.learning_rate", t.learning_rate);
  t.seed = static_cast<std::uint64_t>(c.integer("run.seed", 0));
  t.validate();
  return t;
}

ChoiceDataset load_full_data(const Config& c) {
  const auto source = c.str("data.source", "csv");
  const auto path = c.str("data.path");
  if (source == "swissmetro") {
    SwissmetroOptions o;
    o.ga_cost_adjust = c.flag("data.ga_cost_adjust", false);
    return preprocess_swissmetro(load_table(path), o);
  }
  if (source == "optima") return preprocess_optima(load_table(path));
  if (source == "csv") {
    const auto alts = c.list("data.alternatives");
    if (alts.empty()) throw ConfigError("data.alternatives is required for csv data");
    return load_csv(path, default_schema(alts));
  }
  throw ConfigError("unknown data.source '" + source + "'");
}

std::pair<ChoiceDataset, ChoiceDataset> load_data(const Config& c) {
  auto data = load_full_data(c);
  if (c.has("data.train_rows")) {
    const auto n = c.integer("data.train_rows", 0);
    if (n < 1) throw ConfigError("data.train_rows must be >= 1");
    return head_split(data, static_cast<std::size_t>(n));
  }
  const double fraction = c.real("data.train_fraction", 0.8);
  if (fraction >= 1.0) return {std::move(data), ChoiceDataset{}};
  const auto seed = static_cast<std::uint64_t>(c.integer("data.split_seed", 0));
  return split(data, fraction, seed);
}

ModelDef model_def(const Config& c) {
  const auto preset = c.str("model.preset", "");
  if (!preset.empty()) {
    const auto colon = preset.find(':');
    if (colon == std::string::npos) throw ConfigError("model.preset must look like family:name");
    const auto family = preset.substr(0, colon);
    const auto name = preset.substr(colon + 1);
    const auto w = widths(c, 100).front();
    if (family == "swissmetro") return swissmetro_model(name, w);
    if (family == "optima") return optima_model(name, w);
    if (family == "semi") return semi_synthetic_model(name, w);
    if (family == "synthetic" || family == "correlation" || family == "guevara") {
      const auto set = family == "synthetic"     ? synthetic_benchmark_models(w)
                       : family == "correlation" ? correlation_models(w)
                                                 : guevara_models(w);
      for (const auto& d : set) {
        if (d.name == name) return d;
      }
    }
    throw ConfigError("unknown model.preset '" + preset + "'");
  }

  ModelDef d;
  d.kind = parse_model_kind(c.str("model.kind"));
  d.name = c.str("model.name", to_string(d.kind));
  const auto alts = c.list("model.alternatives");
  if (alts.empty()) throw ConfigError("model.alternatives is required without a preset");
  UtilitySpec spec(alts);
  for (const auto& [param, entry] : c.section("spec")) {
    std::vector<std::pair<std::size_t, std::string>> terms;
    for (const auto& item : split_on(entry, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        spec.intercept(param, alternative_index(alts, item));
      } else {
        terms.emplace_back(alternative_index(alts, trim(item.substr(0, colon))), trim(item.substr(colon + 1)));
      }
    }
    if (!terms.empty()) spec.shared(param, terms);
  }
  d.spec = std::move(spec);
  d.partition.x = c.list("model.x");
  d.partition.q = c.list("model.q");
  d.net.hidden = widths(c, 100);
  if (c.has("model.nests")) {
    std::vector<std::vector<std::size_t>> groups;
    for (const auto& g : c.list("model.nests")) {
      std::vector<std::size_t> members;
      for (const auto& a : split_on(g, '+')) members.push_back(alternative_index(alts, a));
      groups.push_back(std::move(members));
    }
    d.nests = NestStructure::make(std::move(groups), alts.size());
  }
  return d;
}

BinaryScenario binary_scenario(const Config& c) {
  BinaryScenario s;
  s.beta_p = c.real("scenario.beta_p", s.beta_p);
  s.beta_a = c.real("scenario.beta_a", s.beta_a);
  s.beta_b = c.real("scenario.beta_b", s.beta_b);
  s.beta_qc = c.real("scenario.beta_qc", s.beta_qc);
  const auto n_train = c.integer("scenario.n_train", static_cast<long long>(s.n_train));
  const auto n_test = c.integer("scenario.n_test", static_cast<long long>(s.n_test));
  if (n_train < 1 || n_test < 0) throw ConfigError("scenario.n_train must be >= 1 and n_test >= 0");
  s.n_train = static_cast<std::size_t>(n_train);
  s.n_test = static_cast<std::size_t>(n_test);
  s.seed = static_cast<std::uint64_t>(c.integer("run.seed", 0));
  return s;
}

}  // namespace lmnl::cli
