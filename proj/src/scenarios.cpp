#include "lmnl/scenarios.hpp"

#include <algorithm>
#include <cctype>

#include "lmnl/dataio.hpp"
#include "lmnl/error.hpp"

namespace lmnl {

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

constexpr std::size_t kTrain = 0, kSM = 1, kCar = 2;
constexpr std::size_t kPT = 0, kCarO = 1, kSlow = 2;

}  // namespace

HybridChoiceModel ModelDef::build(std::uint64_t seed) const {
  return build_model(kind, spec, partition, net, nests, seed);
}

UtilitySpec binary_spec(const std::vector<std::string>& variables) {
  UtilitySpec spec({"1", "2"});
  for (const auto& v : variables) spec.shared("B_" + upper(v), {{0, v + "_1"}, {1, v + "_2"}});
  return spec;
}

std::vector<std::string> binary_columns(const std::vector<std::string>& variables) {
  std::vector<std::string> cols;
  for (const auto& v : variables) {
    cols.push_back(v + "_1");
    cols.push_back(v + "_2");
  }
  return cols;
}

ModelDef binary_logit(const std::string& name, const std::vector<std::string>& x) {
  ModelDef d;
  d.name = name;
  d.kind = ModelKind::Logit;
  d.spec = binary_spec(x);
  return d;
}

ModelDef binary_lmnl(const std::string& name, const std::vector<std::string>& x,
                     const std::vector<std::string>& q, Eigen::Index width) {
  if (width == 0) return binary_logit(name, x);
  ModelDef d;
  d.name = name;
  d.kind = ModelKind::LMNL;
  d.spec = binary_spec(x);
  d.partition.q = binary_columns(q);
  d.net.hidden = {width};
  return d;
}

ModelDef binary_dnn(const std::string& name, const std::vector<std::string>& q, Eigen::Index width) {
  ModelDef d;
  d.name = name;
  d.kind = ModelKind::DNN;
  d.spec = UtilitySpec({"1", "2"});
  d.partition.q = binary_columns(q);
  d.net.hidden = {width};
  return d;
}

ModelDef binary_dnn_l(const std::string& name, const std::vector<std::string>& xq,
                      Eigen::Index width) {
  ModelDef d;
  d.name = name;
  d.kind = ModelKind::DNN_L;
  d.spec = binary_spec(xq);
  d.partition.x = binary_columns(xq);
  d.partition.q = binary_columns(xq);
  d.net.hidden = {width};
  return d;
}

std::vector<ModelDef> synthetic_benchmark_models(Eigen::Index width) {
  return {binary_logit("logit_xtrue", {"p", "a", "b", "qc"}),
          binary_lmnl("lmnl", {"p", "a", "b"}, {"q", "c"}, width),
          binary_logit("logit_x1", {"p", "a", "b", "q", "c"}),
          binary_dnn("dnn", {"p", "a", "b", "q", "c"}, width),
          binary_dnn_l("dnn_l", {"p", "a", "b", "q", "c"}, width)};
}

std::vector<ModelDef> correlation_models(Eigen::Index width) {
  return {binary_lmnl("lmnl", {"p", "a", "b"}, {"q", "c"}, width),
          binary_logit("logit_x1", {"p", "a", "b", "q", "c"}),
          binary_logit("logit_x2", {"p", "a", "b"})};
}

std::vector<ModelDef> guevara_models(Eigen::Index width) {
  return {binary_logit("mnl_true", {"p", "a", "b", "q"}),
          binary_lmnl("lmnl_true", {"p", "a", "b"}, {"q"}, width),
          binary_logit("mnl_endo", {"p", "a", "b"})};
}

UtilitySpec swissmetro_benchmark_spec() {
  UtilitySpec s({"Train", "SM", "Car"});
  s.intercept("ASC_CAR", kCar);
  s.intercept("ASC_SM", kSM);
  s.shared("B_TIME", {{kTrain, "TRAIN_TT"}, {kSM, "SM_TT"}, {kCar, "CAR_TT"}});
  s.shared("B_COST", {{kTrain, "TRAIN_CO"}, {kSM, "SM_CO"}, {kCar, "CAR_CO"}});
  s.shared("B_FREQ", {{kTrain, "TRAIN_HE"}, {kSM, "SM_HE"}});
  s.shared("B_GA", "GA", {kTrain, kSM});
  s.shared("B_AGE", "AGE", {kTrain});
  s.shared("B_LUGGAGE", "LUGGAGE", {kCar});
  s.shared("B_SEATS", "SM_SEATS", {kSM});
  return s;
}

UtilitySpec swissmetro_vot_spec() {
  UtilitySpec s({"Train", "SM", "Car"});
  s.shared("B_TIME", {{kTrain, "TRAIN_TT"}, {kSM, "SM_TT"}, {kCar, "CAR_TT"}});
  s.shared("B_COST", {{kTrain, "TRAIN_CO"}, {kSM, "SM_CO"}, {kCar, "CAR_CO"}});
  s.shared("B_FREQ", {{kTrain, "TRAIN_HE"}, {kSM, "SM_HE"}});
  return s;
}

std::vector<std::string> swissmetro_q0() { return {"PURPOSE", "FIRST", "MALE", "INCOME"}; }

NestStructure swissmetro_nests() { return NestStructure::make({{kCar, kTrain}, {kSM}}, 3); }

ModelDef swissmetro_model(const std::string& which, Eigen::Index width) {
  ModelDef d;
  d.name = which;
  d.net.hidden = {width};
  if (which == "mnl" || which == "nl") {
    d.kind = ModelKind::Logit;
    d.spec = swissmetro_benchmark_spec();
    if (which == "nl") d.nests = swissmetro_nests();
  } else if (which == "lmnl_x1_q0" || which == "lnl_x1_q0") {
    d.kind = which[1] == 'n' ? ModelKind::LNL : ModelKind::LMNL;
    d.spec = swissmetro_benchmark_spec();
    d.partition.q = swissmetro_q0();
  } else if (which == "lmnl_x1_q1" || which == "lnl_x1_q1") {
    d.kind = which[1] == 'n' ? ModelKind::LNL : ModelKind::LMNL;
    d.spec = swissmetro_benchmark_spec();
    d.partition.q = SwissmetroColumns::unused();
  } else if (which == "lmnl_x2_q2" || which == "lnl_x2_q2") {
    d.kind = which[1] == 'n' ? ModelKind::LNL : ModelKind::LMNL;
    d.spec = swissmetro_vot_spec();
    d.partition.q = SwissmetroColumns::representation();
  } else if (which == "dnn_l_x1") {
    d.kind = ModelKind::DNN_L;
    d.spec = swissmetro_benchmark_spec();
    d.partition.x = d.spec.columns();
    d.partition.q = d.partition.x;
  } else if (which == "dummy_x2_q2") {
    d.kind = ModelKind::DummyLogit;
    d.spec = swissmetro_vot_spec();
    d.spec.intercept("ASC_CAR", kCar);
    d.spec.intercept("ASC_SM", kSM);
    d.partition.q = SwissmetroColumns::representation();
  } else if (which == "dnn") {
    d.kind = ModelKind::DNN;
    d.spec = UtilitySpec({"Train", "SM", "Car"});
    d.partition.q = swissmetro_vot_spec().columns();
    for (const auto& c : SwissmetroColumns::representation()) d.partition.q.push_back(c);
  } else {
    throw ConfigError("unknown Swissmetro model '" + which + "'");
  }
  if (d.kind == ModelKind::LNL) d.nests = swissmetro_nests();
  return d;
}

UtilitySpec optima_base_spec() {
  UtilitySpec s({"PT", "Car", "Slow"});
  s.intercept("ASC_PT", kPT);
  s.intercept("ASC_CAR", kCarO);
  s.shared("B_TIME_PT", "TimePT", {kPT});
  s.shared("B_TIME_CAR", "TimeCar", {kCarO});
  s.shared("B_MCOST_PT", "MCost_PT", {kPT});
  s.shared("B_MCOST_CAR", "MCost_CAR", {kCarO});
  s.shared("B_DIST", "distance_km", {kSlow});
  s.shared("B_WORK", "Work", {kCarO});
  s.shared("B_FRENCH", "French", {kCarO});
  s.shared("B_STUDENT", "Student", {kPT});
  s.shared("B_URBAN", "Urban", {kPT});
  s.shared("B_NBCHILD", "NbChild", {kCarO});
  s.shared("B_NBCAR", "NbCar", {kCarO});
  s.shared("B_NBBICY", "NbBicy", {kSlow});
  return s;
}

UtilitySpec optima_minimal_spec() {
  UtilitySpec s({"PT", "Car", "Slow"});
  s.shared("B_TIME_PT", "TimePT", {kPT});
  s.shared("B_TIME_CAR", "TimeCar", {kCarO});
  s.shared("B_MCOST_PT", "MCost_PT", {kPT});
  s.shared("B_MCOST_CAR", "MCost_CAR", {kCarO});
  s.shared("B_DIST", "distance_km", {kSlow});
  return s;
}

ModelDef optima_model(const std::string& which, Eigen::Index width) {
  ModelDef d;
  d.name = which;
  d.net.hidden = {width};
  const std::vector<std::string> removed = {"Work", "French", "Student", "Urban",
                                            "NbChild", "NbCar", "NbBicy"};
  if (which == "mnl") {
    d.kind = ModelKind::Logit;
    d.spec = optima_base_spec();
  } else if (which == "lmnl_x1_q1") {
    d.kind = ModelKind::LMNL;
    d.spec = optima_base_spec();
    d.partition.q = OptimaColumns::extra();
  } else if (which == "lmnl_x2_q2") {
    d.kind = ModelKind::LMNL;
    d.spec = optima_minimal_spec();
    d.partition.q = OptimaColumns::extra();
    d.partition.q.insert(d.partition.q.end(), removed.begin(), removed.end());
  } else if (which == "dnn") {
    d.kind = ModelKind::DNN;
    d.spec = UtilitySpec({"PT", "Car", "Slow"});
    d.partition.q = optima_base_spec().columns();
    for (const auto& c : OptimaColumns::extra()) d.partition.q.push_back(c);
  } else {
    throw ConfigError("unknown Optima model '" + which + "'");
  }
  return d;
}

ModelDef semi_synthetic_model(const std::string& which, Eigen::Index width) {
  ModelDef d;
  d.name = which;
  d.net.hidden = {width};
  UtilitySpec s({"Train", "SM", "Car"});
  if (which == "logit_xa" || which == "logit_xb") {
    d.kind = ModelKind::Logit;
    s.intercept("ASC_TRAIN", kTrain);
    s.intercept("ASC_SM", kSM);
  } else if (which == "lmnl") {
    d.kind = ModelKind::LMNL;
    d.partition.q = {"AGE", "DEST", "ORIGIN", "INCOME", "PURPOSE"};
  } else {
    throw ConfigError("unknown semi-synthetic model '" + which + "'");
  }
  s.shared("B_TT", {{kTrain, "TT_TRAIN"}, {kSM, "TT_SM"}, {kCar, "TT_CAR"}});
  s.shared("B_TC", {{kTrain, "TC_TRAIN"}, {kSM, "TC_SM"}, {kCar, "TC_CAR"}});
  if (which == "logit_xa") {
    // person-level variables need a reference alternative, so each one enters
    // every listed utility except the last (Car where present)
    s.specific("B_AGE", "AGE", {kTrain, kSM});
    s.specific("B_DEST", "DEST", {kTrain, kSM});
    s.specific("B_ORIGIN", "ORIGIN", {kTrain});
    s.specific("B_INCOME", "INCOME", {kSM});
    s.specific("B_PURPOSE", "PURPOSE", {kSM});
  }
  d.spec = std::move(s);
  return d;
}

}  // namespace lmnl
