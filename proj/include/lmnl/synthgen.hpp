#pragma once

// Seeded synthetic and semi-synthetic choice data. Every generator is a pure
// function of its scenario (seed included).

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lmnl/dataio.hpp"

namespace lmnl {

/// True coefficient values written next to a generated dataset.
struct Truth {
  std::vector<std::pair<std::string, double>> values;

  double get(std::string_view key) const;  // throws DataError
  void set(const std::string& key, double value);
  void write(const std::filesystem::path& path) const;  // key=value lines
  static Truth read(const std::filesystem::path& path);
};

/// Binary scenario: V_i = bp*p_i + ba*a_i + bb*b_i + bqc*q_i*c_i with
/// p = 5 + z + 0.03 wz + e_p, k = h + e_k, q = 2h + k + e_q, all draws U[-1,1].
struct BinaryScenario {
  double beta_p = -1.0;
  double beta_a = 0.5;
  double beta_b = 0.5;
  double beta_qc = 1.0;
  std::size_t n_train = 1000;
  std::size_t n_test = 200;
  std::uint64_t seed = 0;

  Truth truth() const;
};

/// Columns p_1 p_2 a_1 a_2 b_1 b_2 q_1 q_2 c_1 c_2 qc_1 qc_2; alternatives 1, 2.
/// The first n_train rows are the training part.
ChoiceDataset gen_binary(const BinaryScenario& scenario);

/// Same draws, with q replaced by s*p + sqrt(1-s^2)*q before utilities are formed.
ChoiceDataset gen_correlated(const BinaryScenario& scenario, double s);

/// Adds beta_u * u_i (u ~ U[-1,1], own stream) to each utility; u is not emitted.
std::pair<ChoiceDataset, Truth> gen_with_unobserved(const BinaryScenario& scenario, double beta_u);

/// U_i = -2 p_i + a_i + b_i + q_i + Gumbel, p = 5 + q + z + 0.03 wz + e_p,
/// every draw U[-2,2]. Columns p, a, b, q per alternative.
ChoiceDataset gen_guevara(std::size_t rows, std::uint64_t seed);
Truth guevara_truth();

struct SemiSyntheticScenario {
  double beta_tt = -1.0;
  double beta_tc = -2.0;
  // interaction coefficients, in the order of the six power-series terms
  double dest3_age = 1.0;        // Train: DEST^3 * AGE
  double age05_origin = -1.0;    // Train: AGE^0.5 * ORIGIN
  double dest_age = 1.0;         // SM: DEST * AGE
  double income5_purpose2 = 3.0; // SM: INCOME^5 * PURPOSE^2
  double age_income5 = 5.0;      // Car: AGE * INCOME^5
  double origin2_income5 = 2.0;  // Car: ORIGIN^2 * INCOME^5
  bool minmax_scale = true;      // categoricals mapped to [0, 1] first
  std::size_t rows = 0;          // 0 => one synthetic row per source row, else sample with replacement
  std::uint64_t seed = 0;

  Truth truth() const;
};

/// Source: a preprocessed Swissmetro dataset. Emits TT_TRAIN, TC_TRAIN, TT_SM,
/// TC_SM, TT_CAR, TC_CAR and the (scaled) AGE, DEST, ORIGIN, INCOME, PURPOSE
/// columns; alternatives Train, SM, Car; choices by Gumbel simulation.
ChoiceDataset gen_semi_synthetic(const SemiSyntheticScenario& scenario, const ChoiceDataset& source);

/// First `n_train` rows and the rest.
std::pair<ChoiceDataset, ChoiceDataset> head_split(const ChoiceDataset& data, std::size_t n_train);

}  // namespace lmnl
