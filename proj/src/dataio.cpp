#include "lmnl/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "lmnl/error.hpp"

namespace lmnl {

namespace {

Eigen::Index find_column(const std::vector<std::string>& columns, std::string_view name) {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return -1;
  return static_cast<Eigen::Index>(it - columns.begin());
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream in(line);
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
  }
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

char detect_separator(const std::string& header) {
  if (header.find(',') != std::string::npos) return ',';
  if (header.find('\t') != std::string::npos) return '\t';
  return ' ';
}

}  // namespace

bool Table::has_column(std::string_view name) const { return find_column(columns, name) >= 0; }

Eigen::Index Table::column_index(std::string_view name) const {
  const auto idx = find_column(columns, name);
  if (idx < 0) throw DataError("missing column '" + std::string(name) + "'");
  return idx;
}

bool ChoiceDataset::has_column(std::string_view name) const {
  return find_column(columns, name) >= 0;
}

Eigen::Index ChoiceDataset::column_index(std::string_view name) const {
  const auto idx = find_column(columns, name);
  if (idx < 0) throw DataError("missing column '" + std::string(name) + "'");
  return idx;
}

Vector ChoiceDataset::column(std::string_view name) const { return values.col(column_index(name)); }

void ChoiceDataset::set_column(std::string_view name, const Vector& v) {
  if (v.size() != rows()) throw ShapeError("set_column: length mismatch");
  const auto idx = find_column(columns, name);
  if (idx >= 0) {
    values.col(idx) = v;
    return;
  }
  columns.emplace_back(name);
  values.conservativeResize(Eigen::NoChange, values.cols() + 1);
  values.col(values.cols() - 1) = v;
}

ChoiceDataset ChoiceDataset::subset(std::span<const std::size_t> rows_) const {
  ChoiceDataset out;
  out.columns = columns;
  out.alternatives = alternatives;
  out.meta = meta;
  const auto n = static_cast<Eigen::Index>(rows_.size());
  out.values.resize(n, values.cols());
  out.available.resize(n, available.cols());
  out.choice.resize(rows_.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto src = static_cast<Eigen::Index>(rows_[static_cast<std::size_t>(r)]);
    if (src >= rows()) throw DataError("subset: row index out of range");
    out.values.row(r) = values.row(src);
    out.available.row(r) = available.row(src);
    out.choice[static_cast<std::size_t>(r)] = choice[static_cast<std::size_t>(src)];
  }
  return out;
}

Table ChoiceDataset::table() const { return Table{columns, values, meta}; }

void ChoiceDataset::validate() const {
  if (static_cast<Eigen::Index>(choice.size()) != rows() || available.rows() != rows() ||
      available.cols() != alternative_count()) {
    throw ShapeError("ChoiceDataset: inconsistent row/alternative counts");
  }
  if (static_cast<Eigen::Index>(columns.size()) != values.cols()) {
    throw ShapeError("ChoiceDataset: column names do not match value matrix");
  }
  for (Eigen::Index r = 0; r < rows(); ++r) {
    const int c = choice[static_cast<std::size_t>(r)];
    if (c < 0 || c >= alternative_count()) {
      throw InvalidRowError("row " + std::to_string(r) + ": choice index out of range");
    }
    if (!available(r, c)) {
      throw InvalidRowError("row " + std::to_string(r) + ": chosen alternative unavailable");
    }
  }
  if (!values.allFinite()) throw DataError("ChoiceDataset: non-finite value");
}

Table load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string header;
  while (std::getline(in, header) && trim(header).empty()) {
  }
  if (trim(header).empty()) throw DataError("'" + path.string() + "' is empty");
  const char sep = detect_separator(header);
  Table table;
  table.columns = split_line(header, sep);

  std::vector<double> cells;
  std::string line;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, sep);
    if (fields.size() != table.columns.size()) {
      std::ostringstream msg;
      msg << path.string() << ": row " << row + 1 << " has " << fields.size() << " cells, expected "
          << table.columns.size();
      throw DataError(msg.str());
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      double v = 0.0;
      const auto* begin = f.data();
      const auto* end = f.data() + f.size();
      auto [ptr, ec] = std::from_chars(begin, end, v);
      if (f.empty() || ec != std::errc() || ptr != end) {
        std::ostringstream msg;
        msg << path.string() << ": row " << row + 1 << ", column '" << table.columns[c]
            << "': cannot parse '" << f << "' as a number";
        throw DataError(msg.str());
      }
      cells.push_back(v);
    }
    ++row;
  }
  if (row == 0) throw DataError("'" + path.string() + "' has a header but no data rows");
  const auto ncol = static_cast<Eigen::Index>(table.columns.size());
  table.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cells.data(), row, ncol);
  return table;
}

CsvSchema default_schema(std::vector<std::string> alternatives) {
  CsvSchema schema;
  schema.alternatives = std::move(alternatives);
  return schema;
}

ChoiceDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  Table table = load_table(path);
  if (schema.alternatives.empty()) throw ConfigError("CsvSchema: no alternatives");
  for (const auto& required : schema.required_columns) table.column_index(required);

  const Eigen::Index choice_col = table.column_index(schema.choice_column);
  const auto n_alt = static_cast<Eigen::Index>(schema.alternatives.size());
  std::vector<Eigen::Index> av_cols;
  for (const auto& alt : schema.alternatives) {
    av_cols.push_back(find_column(table.columns, schema.availability_prefix + alt));
  }

  ChoiceDataset data;
  data.alternatives = schema.alternatives;
  data.meta = table.meta;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(table.columns.size()); ++c) {
    const bool is_av = std::find(av_cols.begin(), av_cols.end(), c) != av_cols.end();
    if (c != choice_col && !is_av) {
      keep.push_back(c);
      data.columns.push_back(table.columns[static_cast<std::size_t>(c)]);
    }
  }
  const Eigen::Index n = table.rows();
  data.values.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    data.values.col(static_cast<Eigen::Index>(k)) = table.values.col(keep[k]);
  }
  data.available.setConstant(n, n_alt, true);
  for (Eigen::Index a = 0; a < n_alt; ++a) {
    const auto col = av_cols[static_cast<std::size_t>(a)];
    if (col >= 0) data.available.col(a) = table.values.col(col).array() != 0.0;
  }
  data.choice.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const double raw = table.values(r, choice_col);
    const int idx = static_cast<int>(std::lround(raw)) - schema.choice_offset;
    if (raw != std::round(raw) || idx < 0 || idx >= n_alt) {
      std::ostringstream msg;
      msg << path.string() << ": row " << r + 1 << ", column '" << schema.choice_column
          << "': invalid choice label " << raw;
      throw DataError(msg.str());
    }
    data.choice[static_cast<std::size_t>(r)] = idx;
  }
  data.validate();
  return data;
}

void write_csv(const ChoiceDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  for (std::size_t c = 0; c < data.columns.size(); ++c) out << data.columns[c] << ',';
  for (const auto& alt : data.alternatives) out << "av_" << alt << ',';
  out << "choice\n";
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.values.cols(); ++c) out << data.values(r, c) << ',';
    for (Eigen::Index a = 0; a < data.alternative_count(); ++a) {
      out << (data.available(r, a) ? 1 : 0) << ',';
    }
    out << data.choice[static_cast<std::size_t>(r)] << '\n';
  }
}

namespace {

// headways too: the reported VOF magnitudes only make sense with all three scaled
const std::vector<std::string> kSwissmetroScaled = {"TRAIN_TT", "TRAIN_CO", "TRAIN_HE", "SM_TT",
                                                    "SM_CO",    "SM_HE",    "CAR_TT",   "CAR_CO"};
const std::vector<std::string> kSwissmetroRequired = {
    "GROUP", "SURVEY", "PURPOSE", "FIRST",  "TICKET", "WHO",     "LUGGAGE", "AGE",     "MALE",
    "INCOME",  "GA",     "ORIGIN", "DEST",    "TRAIN_AV", "CAR_AV", "SM_AV",
    "TRAIN_TT", "TRAIN_CO", "TRAIN_HE", "SM_TT", "SM_CO", "SM_HE", "SM_SEATS",
    "CAR_TT",  "CAR_CO", "CHOICE"};

}  // namespace

const std::vector<std::string>& SwissmetroColumns::unused() {
  static const std::vector<std::string> cols = {"PURPOSE", "FIRST",  "TICKET", "WHO",
                                                "MALE",    "INCOME", "ORIGIN", "DEST"};
  return cols;
}

const std::vector<std::string>& SwissmetroColumns::representation() {
  // everything except ids, availabilities, the choice, the constant SP flag
  // and the time/cost/headway attributes of the linear part
  static const std::vector<std::string> cols = {"GROUP",  "SURVEY", "PURPOSE", "FIRST",  "TICKET",
                                                "WHO",    "LUGGAGE", "AGE",    "MALE",   "INCOME",
                                                "GA",     "ORIGIN", "DEST",    "SM_SEATS"};
  return cols;
}

ChoiceDataset preprocess_swissmetro(const Table& raw, const SwissmetroOptions& options) {
  for (const auto& col : kSwissmetroRequired) {
    if (!raw.has_column(col)) throw DataError("Swissmetro schema: missing column '" + col + "'");
  }
  const auto choice_col = raw.column_index("CHOICE");
  const auto av_train = raw.column_index("TRAIN_AV");
  const auto av_sm = raw.column_index("SM_AV");
  const auto av_car = raw.column_index("CAR_AV");

  std::vector<std::size_t> keep;
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    const double c = raw.values(r, choice_col);
    if (c < 1.0 || c > 3.0) continue;
    if (raw.values(r, av_train) == 0.0 || raw.values(r, av_sm) == 0.0 ||
        raw.values(r, av_car) == 0.0) {
      continue;
    }
    keep.push_back(static_cast<std::size_t>(r));
  }

  ChoiceDataset data;
  data.columns = raw.columns;
  data.alternatives = {"Train", "SM", "Car"};
  data.meta = raw.meta;
  const auto n = static_cast<Eigen::Index>(keep.size());
  data.values.resize(n, raw.values.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    data.values.row(r) = raw.values.row(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(r)]));
  }
  data.available.setConstant(n, 3, true);
  data.choice.resize(keep.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    data.choice[static_cast<std::size_t>(r)] = static_cast<int>(data.values(r, choice_col)) - 1;
  }

  if (data.meta.count("swissmetro.scaled") == 0) {
    for (const auto& col : kSwissmetroScaled) {
      data.values.col(data.column_index(col)) /= 100.0;
    }
    data.meta["swissmetro.scaled"] = "1/100";
  }
  if (options.ga_cost_adjust && data.meta.count("swissmetro.ga_cost_adjust") == 0) {
    const auto ga = data.column_index("GA");
    for (const char* col : {"TRAIN_CO", "SM_CO"}) {
      const auto idx = data.column_index(col);
      for (Eigen::Index r = 0; r < n; ++r) {
        if (data.values(r, ga) != 0.0) data.values(r, idx) = 0.0;
      }
    }
    data.meta["swissmetro.ga_cost_adjust"] = "on";
  }
  data.validate();
  return data;
}

const std::vector<std::string>& OptimaColumns::required() {
  static const std::vector<std::string> cols = {
      "Choice",   "TimePT",  "TimeCar", "MarginalCostPT", "CostCarCHF", "distance_km",
      "TripPurpose", "LangCode", "OccupStat", "UrbRur", "NbChild",    "NbCar",
      "NbBicy"};
  return cols;
}

const std::vector<std::string>& OptimaColumns::extra() {
  static const std::vector<std::string> cols = {"age",       "HouseType", "Gender",
                                                "Education", "FamilSitu", "ScaledIncome",
                                                "OwnHouse",  "Mothertongue", "SocioProfCat"};
  return cols;
}

ChoiceDataset preprocess_optima(const Table& raw, const OptimaOptions& options) {
  std::vector<std::string> used = OptimaColumns::required();
  for (const auto& c : OptimaColumns::extra()) {
    if (c != "ScaledIncome" || raw.has_column(c)) used.push_back(c);
  }
  used.push_back(options.income_column);
  for (const auto& col : used) {
    if (!raw.has_column(col)) throw DataError("Optima schema: missing column '" + col + "'");
  }
  const auto choice_col = raw.column_index("Choice");
  const auto income_col = raw.column_index(options.income_column);
  const Eigen::Index car_av_col = raw.has_column(options.car_availability_column)
                                      ? raw.column_index(options.car_availability_column)
                                      : -1;
  std::vector<Eigen::Index> used_idx;
  for (const auto& col : used) used_idx.push_back(raw.column_index(col));

  std::vector<std::size_t> keep;
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    bool ok = true;
    for (auto c : used_idx) ok = ok && raw.values(r, c) != -1.0;
    const double label = raw.values(r, choice_col);
    ok = ok && label >= 0.0 && label <= 2.0;
    ok = ok && raw.values(r, income_col) > 0.0;
    if (car_av_col >= 0) ok = ok && raw.values(r, car_av_col) != 3.0;
    if (ok) keep.push_back(static_cast<std::size_t>(r));
  }

  ChoiceDataset data;
  data.columns = raw.columns;
  data.alternatives = {"PT", "Car", "Slow"};
  data.meta = raw.meta;
  const auto n = static_cast<Eigen::Index>(keep.size());
  data.values.resize(n, raw.values.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    data.values.row(r) = raw.values.row(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(r)]));
  }
  data.available.setConstant(n, 3, true);
  data.choice.resize(keep.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    data.choice[static_cast<std::size_t>(r)] = static_cast<int>(data.values(r, choice_col));
  }
  // income in thousands of CHF
  if (!data.has_column("ScaledIncome")) data.set_column("ScaledIncome", data.column(options.income_column) / 1000.0);
  const Vector income = data.column("ScaledIncome");
  data.set_column("MCost_PT", data.column("MarginalCostPT").cwiseQuotient(income));
  data.set_column("MCost_CAR", data.column("CostCarCHF").cwiseQuotient(income));
  const auto indicator = [&](const char* src, double value) {
    Vector v = data.column(src);
    return Vector((v.array() == value).cast<double>());
  };
  data.set_column("Work", indicator("TripPurpose", 1.0));
  data.set_column("French", indicator("LangCode", 1.0));
  data.set_column("Student", indicator("OccupStat", 8.0));
  data.set_column("Urban", indicator("UrbRur", 2.0));
  data.validate();
  return data;
}

std::pair<ChoiceDataset, ChoiceDataset> split(const ChoiceDataset& data, double train_fraction,
                                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const double exact = train_fraction * static_cast<double>(order.size());
  auto n_train = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  n_train = std::min(n_train, order.size());
  std::span<const std::size_t> all(order);
  return {data.subset(all.subspan(0, n_train)), data.subset(all.subspan(n_train))};
}

CorrelationMatrix correlation_matrix(const ChoiceDataset& data,
                                     const std::vector<std::string>& columns) {
  if (data.rows() < 2) throw DataError("correlation_matrix: need at least two rows");
  const auto k = static_cast<Eigen::Index>(columns.size());
  Matrix centered(data.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Vector v = data.column(columns[static_cast<std::size_t>(c)]);
    centered.col(c) = v.array() - v.mean();
  }
  CorrelationMatrix out;
  out.columns = columns;
  out.values = Matrix::Identity(k, k);
  Vector norms(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    norms[c] = centered.col(c).norm();
    if (norms[c] == 0.0) {
      out.warnings.push_back("column '" + columns[static_cast<std::size_t>(c)] +
                             "' has zero variance; its correlations are reported as 0");
    }
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      double r = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0) {
        r = centered.col(i).dot(centered.col(j)) / (norms[i] * norms[j]);
        r = std::clamp(r, -1.0, 1.0);
      }
      out.values(i, j) = r;
      out.values(j, i) = r;
    }
  }
  return out;
}

}  // namespace lmnl
