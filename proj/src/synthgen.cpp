#include "lmnl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "lmnl/error.hpp"

namespace lmnl {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ChoiceDataset empty_dataset(std::vector<std::string> columns, std::vector<std::string> alternatives,
                            std::size_t rows) {
  ChoiceDataset d;
  d.columns = std::move(columns);
  d.alternatives = std::move(alternatives);
  const auto n = static_cast<Eigen::Index>(rows);
  d.values = Matrix::Zero(n, static_cast<Eigen::Index>(d.columns.size()));
  d.available = AvailabilityMatrix::Constant(n, d.alternative_count(), true);
  d.choice.assign(rows, 0);
  return d;
}

// Core of the binary family; u (if beta_u != 0) comes from its own stream so
// the emitted columns and every other draw are unchanged.
ChoiceDataset binary_family(const BinaryScenario& sc, double s, double beta_u) {
  if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("correlation s must lie in [0, 1]");
  const std::size_t rows = sc.n_train + sc.n_test;
  if (sc.n_train == 0) throw ConfigError("n_train must be >= 1");
  auto d = empty_dataset({"p_1", "p_2", "a_1", "a_2", "b_1", "b_2", "q_1", "q_2", "c_1", "c_2",
                          "qc_1", "qc_2"},
                         {"1", "2"}, rows);
  Rng rng(sc.seed);
  Rng unobserved(Rng::mix(sc.seed ^ 0x5eedf00dULL));
  const double mix_q = std::sqrt(1.0 - s * s);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto n = static_cast<Eigen::Index>(r);
    double v[2];
    for (int i = 0; i < 2; ++i) {
      const double a = rng.uniform(-1.0, 1.0);
      const double b = rng.uniform(-1.0, 1.0);
      const double c = rng.uniform(-1.0, 1.0);
      const double z = rng.uniform(-1.0, 1.0);
      const double wz = rng.uniform(-1.0, 1.0);
      const double h = rng.uniform(-1.0, 1.0);
      const double e_p = rng.uniform(-1.0, 1.0);
      const double e_k = rng.uniform(-1.0, 1.0);
      const double e_q = rng.uniform(-1.0, 1.0);
      const double p = 5.0 + z + 0.03 * wz + e_p;
      const double k = h + e_k;
      double q = 2.0 * h + k + e_q;
      if (s != 0.0) q = s * p + mix_q * q;
      v[i] = sc.beta_p * p + sc.beta_a * a + sc.beta_b * b + sc.beta_qc * q * c;
      if (beta_u != 0.0) v[i] += beta_u * unobserved.uniform(-1.0, 1.0);
      d.values(n, 0 + i) = p;
      d.values(n, 2 + i) = a;
      d.values(n, 4 + i) = b;
      d.values(n, 6 + i) = q;
      d.values(n, 8 + i) = c;
      d.values(n, 10 + i) = q * c;
    }
    d.choice[r] = rng.bernoulli(logistic(v[0] - v[1])) ? 0 : 1;
  }
  d.meta["n_train"] = std::to_string(sc.n_train);
  d.meta["seed"] = std::to_string(sc.seed);
  return d;
}

double minmax(double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; }

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double Truth::get(std::string_view key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw DataError("truth has no entry '" + std::string(key) + "'");
}

void Truth::set(const std::string& key, double value) {
  for (auto& [k, v] : values) {
    if (k == key) {
      v = value;
      return;
    }
  }
  values.emplace_back(key, value);
}

void Truth::write(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  for (const auto& [k, v] : values) f << k << '=' << real(v) << '\n';
}

Truth Truth::read(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path.string());
  Truth t;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("truth line without '=': " + line);
    t.set(line.substr(0, eq), std::stod(line.substr(eq + 1)));
  }
  return t;
}

Truth BinaryScenario::truth() const {
  Truth t;
  t.set("beta_p", beta_p);
  t.set("beta_a", beta_a);
  t.set("beta_b", beta_b);
  t.set("beta_qc", beta_qc);
  return t;
}

ChoiceDataset gen_binary(const BinaryScenario& scenario) { return binary_family(scenario, 0.0, 0.0); }

ChoiceDataset gen_correlated(const BinaryScenario& scenario, double s) {
  auto d = binary_family(scenario, s, 0.0);
  d.meta["s"] = real(s);
  return d;
}

std::pair<ChoiceDataset, Truth> gen_with_unobserved(const BinaryScenario& scenario, double beta_u) {
  auto d = binary_family(scenario, 0.0, beta_u);
  auto t = scenario.truth();
  t.set("beta_u", beta_u);
  return {std::move(d), std::move(t)};
}

Truth guevara_truth() {
  Truth t;
  t.set("beta_p", -2.0);
  t.set("beta_a", 1.0);
  t.set("beta_b", 1.0);
  t.set("beta_q", 1.0);
  return t;
}

ChoiceDataset gen_guevara(std::size_t rows, std::uint64_t seed) {
  if (rows == 0) throw ConfigError("rows must be >= 1");
  auto d = empty_dataset({"p_1", "p_2", "a_1", "a_2", "b_1", "b_2", "q_1", "q_2"}, {"1", "2"}, rows);
  Rng rng(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto n = static_cast<Eigen::Index>(r);
    double u[2];
    for (int i = 0; i < 2; ++i) {
      const double a = rng.uniform(-2.0, 2.0);
      const double b = rng.uniform(-2.0, 2.0);
      const double q = rng.uniform(-2.0, 2.0);
      const double z = rng.uniform(-2.0, 2.0);
      const double wz = rng.uniform(-2.0, 2.0);
      const double e_p = rng.uniform(-2.0, 2.0);
      const double p = 5.0 + q + z + 0.03 * wz + e_p;
      u[i] = -2.0 * p + a + b + q + rng.gumbel();
      d.values(n, 0 + i) = p;
      d.values(n, 2 + i) = a;
      d.values(n, 4 + i) = b;
      d.values(n, 6 + i) = q;
    }
    d.choice[r] = u[0] >= u[1] ? 0 : 1;
  }
  d.meta["seed"] = std::to_string(seed);
  return d;
}

Truth SemiSyntheticScenario::truth() const {
  Truth t;
  t.set("beta_tt", beta_tt);
  t.set("beta_tc", beta_tc);
  t.set("dest3_age", dest3_age);
  t.set("age05_origin", age05_origin);
  t.set("dest_age", dest_age);
  t.set("income5_purpose2", income5_purpose2);
  t.set("age_income5", age_income5);
  t.set("origin2_income5", origin2_income5);
  t.set("minmax_scale", minmax_scale ? 1.0 : 0.0);
  return t;
}

ChoiceDataset gen_semi_synthetic(const SemiSyntheticScenario& sc, const ChoiceDataset& source) {
  const std::vector<std::string> needed = {"TRAIN_TT", "TRAIN_CO", "SM_TT", "SM_CO", "CAR_TT",
                                           "CAR_CO", "AGE", "DEST", "ORIGIN", "INCOME", "PURPOSE"};
  for (const auto& c : needed) {
    if (!source.has_column(c)) throw DataError("semi-synthetic source lacks column '" + c + "'");
  }
  if (source.rows() == 0) throw DataError("semi-synthetic source is empty");

  std::vector<Vector> col;
  for (const auto& c : needed) col.push_back(source.column(c));
  // categorical inputs (indices 6..10)
  for (std::size_t k = 6; k < needed.size() && sc.minmax_scale; ++k) {
    const double lo = col[k].minCoeff();
    const double hi = col[k].maxCoeff();
    col[k] = col[k].unaryExpr([&](double x) { return minmax(x, lo, hi); });
  }

  Rng rng(sc.seed);
  const std::size_t rows = sc.rows == 0 ? static_cast<std::size_t>(source.rows()) : sc.rows;
  auto d = empty_dataset({"TT_TRAIN", "TC_TRAIN", "TT_SM", "TC_SM", "TT_CAR", "TC_CAR", "AGE", "DEST",
                          "ORIGIN", "INCOME", "PURPOSE"},
                         {"Train", "SM", "Car"}, rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = static_cast<Eigen::Index>(sc.rows == 0 ? r : rng.below(static_cast<std::size_t>(source.rows())));
    const auto n = static_cast<Eigen::Index>(r);
    for (std::size_t k = 0; k < needed.size(); ++k) d.values(n, static_cast<Eigen::Index>(k)) = col[k][src];
    const double age = col[6][src], dest = col[7][src], origin = col[8][src];
    const double income = col[9][src], purpose = col[10][src];
    const double income5 = std::pow(income, 5.0);
    double v[3];
    for (int i = 0; i < 3; ++i) v[i] = sc.beta_tt * col[2 * i][src] + sc.beta_tc * col[2 * i + 1][src];
    v[0] += sc.dest3_age * std::pow(dest, 3.0) * age + sc.age05_origin * std::sqrt(std::max(age, 0.0)) * origin;
    v[1] += sc.dest_age * dest * age + sc.income5_purpose2 * income5 * purpose * purpose;
    v[2] += sc.age_income5 * age * income5 + sc.origin2_income5 * origin * origin * income5;
    int best = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const double u = v[i] + rng.gumbel();
      if (source.available(src, i) && u > best_u) {
        best_u = u;
        best = i;
      }
      d.available(n, i) = source.available(src, i);
    }
    d.choice[r] = best;
  }
  d.meta["seed"] = std::to_string(sc.seed);
  d.meta["minmax_scale"] = sc.minmax_scale ? "1" : "0";
  return d;
}

std::pair<ChoiceDataset, ChoiceDataset> head_split(const ChoiceDataset& data, std::size_t n_train) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (n_train > n) throw DataError("head_split: more training rows than data");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::span<const std::size_t> all(idx);
  return {data.subset(all.subspan(0, n_train)), data.subset(all.subspan(n_train))};
}

}  // namespace lmnl
