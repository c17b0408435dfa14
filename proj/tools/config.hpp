#pragma once

// INI-style run configuration ([section] + key = value) and the builders
// that turn it into datasets and model definitions.

#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lmnl/dataio.hpp"
#include "lmnl/estimation.hpp"
#include "lmnl/scenarios.hpp"
#include "lmnl/synthgen.hpp"

namespace lmnl::cli {

class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& path);  // throws ConfigError
  static Config parse(const std::string& text);

  bool has(const std::string& key) const;  // "section.key"
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string str(const std::string& key) const;  // required
  double real(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<std::string> list(const std::string& key) const;  // comma separated, may be empty
  std::vector<double> reals(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  /// (key, value) pairs of one section in file order.
  std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;

  /// Canonical "section.key=value" dump; hashing it names the run directory.
  std::string canonical() const;
  std::string hash() const;  // 16 hex digits
  void write(const std::filesystem::path& path) const;

 private:
  boost::property_tree::ptree tree_;
};

/// <out_dir>/<command>-<hash>-<UTC timestamp>, created.
std::filesystem::path make_run_dir(const std::filesystem::path& out_dir, const std::string& command,
                                   const Config& config);

TrainConfig train_config(const Config& c);

/// [data] source = swissmetro | optima | csv. Returns (train, test); test may be empty.
std::pair<ChoiceDataset, ChoiceDataset> load_data(const Config& c);
ChoiceDataset load_full_data(const Config& c);

/// [model] preset = swissmetro:<name> | optima:<name> | semi:<name> | synthetic:<name>,
/// or kind + [spec] + q + nests for a hand-written model.
ModelDef model_def(const Config& c);

BinaryScenario binary_scenario(const Config& c);

}  // namespace lmnl::cli
