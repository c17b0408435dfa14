#pragma once

// Ready-made model definitions for the synthetic studies and the Swissmetro
// and Optima data sets.

#include <optional>
#include <string>
#include <vector>

#include "lmnl/models.hpp"

namespace lmnl {

/// Everything build_model needs, plus a display name.
struct ModelDef {
  std::string name;
  ModelKind kind = ModelKind::Logit;
  UtilitySpec spec;
  FeaturePartition partition;
  NetConfig net;
  std::optional<NestStructure> nests;

  HybridChoiceModel build(std::uint64_t seed) const;
};

// Binary designs: variable `v` lives in columns v_1, v_2, and enters both
// utilities with one generic coefficient named B_<V>.
UtilitySpec binary_spec(const std::vector<std::string>& variables);
std::vector<std::string> binary_columns(const std::vector<std::string>& variables);

ModelDef binary_logit(const std::string& name, const std::vector<std::string>& x);
ModelDef binary_lmnl(const std::string& name, const std::vector<std::string>& x,
                     const std::vector<std::string>& q, Eigen::Index width);
ModelDef binary_dnn(const std::string& name, const std::vector<std::string>& q, Eigen::Index width);
ModelDef binary_dnn_l(const std::string& name, const std::vector<std::string>& xq, Eigen::Index width);

// Model sets of the synthetic studies.
// logit_xtrue, lmnl, logit_x1, dnn, dnn_l (X = {p,a,b}, Q = {q,c} for lmnl)
std::vector<ModelDef> synthetic_benchmark_models(Eigen::Index width = 25);
// lmnl, logit_x1 ({p,a,b,q,c}), logit_x2 ({p,a,b})
std::vector<ModelDef> correlation_models(Eigen::Index width = 100);
// mnl_true ({p,a,b,q}), lmnl_true (X = {p,a,b}, Q = {q}), mnl_endo ({p,a,b})
std::vector<ModelDef> guevara_models(Eigen::Index width = 100);

// Swissmetro (alternatives Train, SM, Car).
UtilitySpec swissmetro_benchmark_spec();  // ASCs, time, cost, headway, GA, age, luggage, seats
UtilitySpec swissmetro_vot_spec();        // time, cost, headway only
std::vector<std::string> swissmetro_q0();
NestStructure swissmetro_nests();  // {Car, Train}, {SM}

ModelDef swissmetro_model(const std::string& which, Eigen::Index width = 100);

// Optima (alternatives PT, Car, Slow).
UtilitySpec optima_base_spec();
UtilitySpec optima_minimal_spec();  // time, cost and distance only
ModelDef optima_model(const std::string& which, Eigen::Index width = 100);

// Semi-synthetic (alternatives Train, SM, Car).
ModelDef semi_synthetic_model(const std::string& which, Eigen::Index width = 100);

}  // namespace lmnl
