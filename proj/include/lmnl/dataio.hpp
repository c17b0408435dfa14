#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmnl/numcore.hpp"

namespace lmnl {

/// Headered numeric table as read from disk, before any choice semantics.
struct Table {
  std::vector<std::string> columns;
  Matrix values;  // [rows x columns]
  std::map<std::string, std::string> meta;

  Eigen::Index rows() const { return values.rows(); }
  bool has_column(std::string_view name) const;
  Eigen::Index column_index(std::string_view name) const;  // throws DataError
};

/// Observations with per-row availability and the observed choice.
///
/// Feature columns are addressed by name; alternatives by index into
/// `alternatives`. Every row's chosen alternative is available.
struct ChoiceDataset {
  std::vector<std::string> columns;
  Matrix values;                   // [rows x columns]
  AvailabilityMatrix available;    // [rows x alternatives]
  std::vector<int> choice;         // alternative index per row
  std::vector<std::string> alternatives;
  std::map<std::string, std::string> meta;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index alternative_count() const {
    return static_cast<Eigen::Index>(alternatives.size());
  }
  bool has_column(std::string_view name) const;
  Eigen::Index column_index(std::string_view name) const;  // throws DataError
  Vector column(std::string_view name) const;
  void set_column(std::string_view name, const Vector& values);

  ChoiceDataset subset(std::span<const std::size_t> rows) const;
  Table table() const;

  /// Throws InvalidRowError / DataError if an invariant is broken.
  void validate() const;
};

/// Layout of a choice CSV: which header names carry the label and availability.
struct CsvSchema {
  std::vector<std::string> alternatives;
  std::string choice_column = "choice";
  std::string availability_prefix = "av_";  // av_<alternative>; absent => all available
  int choice_offset = 0;                    // label value of the first alternative
  std::vector<std::string> required_columns;
};

/// Numeric CSV (comma or tab separated, detected from the header line).
Table load_table(const std::filesystem::path& path);

ChoiceDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Writes feature columns, then av_<alt> and `choice`, in the schema `load_csv` reads.
void write_csv(const ChoiceDataset& data, const std::filesystem::path& path);

CsvSchema default_schema(std::vector<std::string> alternatives);

struct SwissmetroOptions {
  bool ga_cost_adjust = false;  // zero train/SM cost for annual-pass holders
};

/// Drops unknown-choice rows and rows without all three modes available,
/// scales travel times, costs and headways by 1/100. Alternatives: Train, SM, Car.
ChoiceDataset preprocess_swissmetro(const Table& raw, const SwissmetroOptions& options = {});

struct OptimaOptions {
  std::string income_column = "CalculatedIncome";  // CHF per year
  std::string car_availability_column = "CarAvail";  // value 3 => no car; optional
};

/// Drops rows with a missing (-1) used variable or a non-available mode and
/// derives ScaledIncome (kCHF) and MCost_PT / MCost_CAR = cost / ScaledIncome. Alternatives: PT, Car, Slow.
ChoiceDataset preprocess_optima(const Table& raw, const OptimaOptions& options = {});

/// Swissmetro column groups used throughout the studies.
struct SwissmetroColumns {
  static const std::vector<std::string>& unused();        // Q1
  static const std::vector<std::string>& representation();  // Q2
};

/// Optima column groups.
struct OptimaColumns {
  static const std::vector<std::string>& required();
  static const std::vector<std::string>& extra();  // Q1
};

/// Seeded shuffle-then-cut split; the train part has ceil(fraction * N) rows.
std::pair<ChoiceDataset, ChoiceDataset> split(const ChoiceDataset& data, double train_fraction,
                                              std::uint64_t seed);

struct CorrelationMatrix {
  std::vector<std::string> columns;
  Matrix values;
  std::vector<std::string> warnings;
};

/// Pearson correlations; a zero-variance column correlates 0 with everything
/// else (and 1 with itself) and produces a warning.
CorrelationMatrix correlation_matrix(const ChoiceDataset& data,
                                     const std::vector<std::string>& columns);

}  // namespace lmnl
