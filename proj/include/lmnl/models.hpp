#pragma once

// Choice model assembly: linear-in-parameter utility specification, the
// representation network over the Q features, optional nests, and the
// forward/backward evaluation of the choice probabilities and loss.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmnl/dataio.hpp"
#include "lmnl/numcore.hpp"

namespace lmnl {

enum class ModelKind { Logit, DNN, DNN_L, LMNL, LNL, DummyLogit };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

enum class Sharing { Shared, AlternativeSpecific };

/// One (parameter, alternative, column) entry of the linear utility. An empty
/// column denotes an alternative-specific constant.
struct UtilityTerm {
  std::size_t parameter = 0;
  std::size_t alternative = 0;
  std::string column;
  Sharing sharing = Sharing::Shared;
};

/// Declarative linear-in-parameter utility f_i(X; beta).
class UtilitySpec {
 public:
  UtilitySpec() = default;
  explicit UtilitySpec(std::vector<std::string> alternatives);

  /// ASC for one alternative.
  UtilitySpec& intercept(std::string parameter, std::size_t alternative);
  /// One coefficient shared by every listed (alternative, column) pair.
  UtilitySpec& shared(std::string parameter,
                      const std::vector<std::pair<std::size_t, std::string>>& entries);
  /// Same column, same coefficient, in every listed alternative.
  UtilitySpec& shared(std::string parameter, const std::string& column,
                      const std::vector<std::size_t>& alternatives);
  /// One coefficient per listed alternative, named `<prefix>_<alternative>`.
  UtilitySpec& specific(const std::string& prefix, const std::string& column,
                        const std::vector<std::size_t>& alternatives);

  const std::vector<std::string>& alternatives() const { return alternatives_; }
  const std::vector<std::string>& parameters() const { return parameters_; }
  const std::vector<UtilityTerm>& terms() const { return terms_; }
  std::size_t parameter_count() const { return parameters_.size(); }
  std::size_t parameter_index(std::string_view name) const;  // throws ConfigError
  bool empty() const { return parameters_.empty(); }

  /// Distinct data columns referenced, in first-use order.
  std::vector<std::string> columns() const;

  /// Throws ConfigError / DataError when an invariant fails.
  void validate(const ChoiceDataset* data = nullptr) const;

  /// Low-level append used by deserialisation.
  void add_term(std::string_view parameter, UtilityTerm term);

 private:
  std::size_t add_parameter(std::string name);

  std::vector<std::string> alternatives_;
  std::vector<std::string> parameters_;
  std::vector<UtilityTerm> terms_;
};

/// X: columns read by the linear part; Q: columns read by the network.
struct FeaturePartition {
  std::vector<std::string> x;
  std::vector<std::string> q;
};

struct PartitionCheck {
  std::vector<std::string> violations;
  std::vector<std::string> advisories;
  bool ok() const { return violations.empty(); }
};

/// Kind constraints on X/Q (Logit: Q empty; DNN: X empty; DNN_L: X == Q;
/// L-MNL / L-NL / dummy Logit: X and Q disjoint). With data, every X-Q pair
/// whose |Pearson r| exceeds `correlation_threshold` yields an advisory.
PartitionCheck validate_partition(const FeaturePartition& partition, ModelKind kind,
                                  const ChoiceDataset* data = nullptr,
                                  double correlation_threshold = 0.8);

/// Partition of alternatives into nests with scale factors mu_m >= 1.
struct NestStructure {
  std::vector<std::vector<std::size_t>> nests;
  Vector mu;
  std::vector<bool> fixed;

  /// Singleton nests are fixed at mu = 1.
  static NestStructure make(std::vector<std::vector<std::size_t>> groups, std::size_t alternatives);
  void validate(std::size_t alternatives) const;
  std::size_t nest_of(std::size_t alternative) const;
  /// Clamp free factors at 1 and reset fixed ones.
  void project();
};

struct NetConfig {
  std::vector<Eigen::Index> hidden = {100};
};

/// Linear utility + optional representation net + optional nests.
struct HybridChoiceModel {
  ModelKind kind = ModelKind::Logit;
  UtilitySpec spec;
  Vector beta;
  std::optional<RepresentationNet> net;
  std::optional<NestStructure> nests;
  FeaturePartition partition;

  std::size_t alternative_count() const { return spec.alternatives().size(); }
  std::size_t interpretable_parameter_count() const { return spec.parameter_count(); }
  std::size_t network_weight_count() const { return net ? net->weight_count() : 0; }
  std::size_t network_bias_count() const { return net ? net->bias_count() : 0; }
  std::size_t free_nest_count() const;
  std::size_t trainable_count() const;
};

/// Assemble a model of the given kind; the network (if any) reads
/// partition.q and is Glorot-initialised from `seed`; beta starts at 0.
/// For DummyLogit every partition.q column becomes an alternative-specific
/// coefficient (last alternative is the reference). Throws ConfigError when
/// the partition violates the kind's constraint.
HybridChoiceModel build_model(ModelKind kind, const UtilitySpec& spec,
                              const FeaturePartition& partition, const NetConfig& net_config,
                              std::optional<NestStructure> nests, std::uint64_t seed);

/// Dataset bound to a model: resolved linear design and network inputs.
struct ModelInputs {
  Eigen::Index rows = 0;
  Eigen::Index alternatives = 0;
  Matrix linear;  // [(rows * alternatives) x parameters], row n*C + i
  Matrix net_in;  // [rows x |Q|]
  AvailabilityMatrix available;
  std::vector<int> choice;
  std::vector<Eigen::Index> q_columns;  // dataset column index of each Q input
};

ModelInputs bind_inputs(const HybridChoiceModel& model, const ChoiceDataset& data);

/// Which trainable blocks receive gradients / are active.
struct BlockMask {
  bool beta = true;
  bool net = true;
  bool mu = true;
  bool net_active = true;  // false => r == 0 (network bypassed)
};

struct Gradients {
  Vector beta;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Vector mu;
};

/// Systematic utilities V = f(X; beta) + r(Q; w) for the given rows.
Matrix systematic_utility(const HybridChoiceModel& model, const ModelInputs& inputs,
                          std::span<const std::size_t> rows, Mode mode = Mode::Eval,
                          double dropout = 0.0, Rng* rng = nullptr, NetCache* cache = nullptr,
                          bool net_active = true);

/// Utilities of a single observation (row of `data`).
Vector systematic_utility(const HybridChoiceModel& model, const ChoiceDataset& data,
                          Eigen::Index row);

Vector mnl_probabilities(const Vector& utilities, const Availability& available);
Vector nested_probabilities(const Vector& utilities, const Availability& available,
                            const NestStructure& nests);

/// Probabilities for each requested row ([rows x alternatives]), MNL or nested.
Matrix choice_probabilities(const HybridChoiceModel& model, const ModelInputs& inputs,
                            std::span<const std::size_t> rows, bool net_active = true);
Matrix choice_probabilities(const HybridChoiceModel& model, const ChoiceDataset& data);

/// d(-ln P(chosen))/dV and d/dmu for the nested formula with overall scale 1.
struct NestedLossGradient {
  double loss = 0.0;
  Vector d_utilities;
  Vector d_mu;
};
NestedLossGradient nested_loss_gradient(const Vector& utilities, const Availability& available,
                                        const NestStructure& nests, int chosen);

/// Mean cross-entropy over `rows` plus l2 * sum ||W||^2 over network weights.
/// Fills `grads` (when non-null) with exact gradients of that objective.
double loss_and_gradient(const HybridChoiceModel& model, const ModelInputs& inputs,
                         std::span<const std::size_t> rows, Mode mode, double dropout, double l2,
                         Rng* rng, const BlockMask& blocks, Gradients* grads);

/// Gradient of the summed log-likelihood w.r.t. beta only (eval mode).
Vector beta_loglik_gradient(const HybridChoiceModel& model, const ModelInputs& inputs);

/// d r_k / d q for every network input, with alternative k given per row
/// (eval mode). Result: [rows x |Q|]; zero when the model has no network.
Matrix utility_input_gradient(const HybridChoiceModel& model, const ModelInputs& inputs,
                              std::span<const int> alternative_per_row);

}  // namespace lmnl
