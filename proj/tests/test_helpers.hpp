#pragma once

#include <cmath>
#include <vector>

#include "lmnl/dataio.hpp"
#include "lmnl/random.hpp"
#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace lmnl::testing {

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Uniform random features and labels; only shapes and valid choices matter.
inline ChoiceDataset random_dataset(Eigen::Index rows, std::vector<std::string> columns,
                                    std::vector<std::string> alternatives, std::uint64_t seed) {
  ChoiceDataset d;
  d.columns = std::move(columns);
  d.alternatives = std::move(alternatives);
  Rng rng(seed);
  d.values.resize(rows, static_cast<Eigen::Index>(d.columns.size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < d.values.cols(); ++c) d.values(r, c) = rng.uniform(-1.0, 1.0);
  }
  d.available = AvailabilityMatrix::Constant(rows, d.alternative_count(), true);
  d.choice.resize(static_cast<std::size_t>(rows));
  for (auto& c : d.choice) c = static_cast<int>(rng.below(d.alternatives.size()));
  return d;
}

// Binary logit MLE by Newton-Raphson on the utility differences, written
// from scratch so it shares nothing with the library's trainer.
struct NewtonFit {
  Vector beta;
  Vector std_errors;
};

inline NewtonFit newton_logit(const ChoiceDataset& d, const std::vector<std::string>& vars) {
  const auto n = d.rows();
  const auto k = static_cast<Eigen::Index>(vars.size());
  Matrix diff(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& v = vars[static_cast<std::size_t>(j)];
    diff.col(j) = d.column(v + "_1") - d.column(v + "_2");
  }
  Vector y(n);
  for (Eigen::Index r = 0; r < n; ++r) y[r] = d.choice[static_cast<std::size_t>(r)] == 0 ? 1.0 : 0.0;
  Vector beta = Vector::Zero(k);
  Matrix info(k, k);
  for (int it = 0; it < 100; ++it) {
    const Vector p = ((-(diff * beta).array()).exp() + 1.0).inverse().matrix();
    const Vector grad = diff.transpose() * (y - p);
    const Vector w = (p.array() * (1.0 - p.array())).matrix();
    info = diff.transpose() * w.asDiagonal() * diff;
    const Vector step = info.ldlt().solve(grad);
    beta += step;
    if (step.norm() < 1e-13) break;
  }
  return {beta, info.inverse().diagonal().cwiseSqrt()};
}

}  // namespace lmnl::testing
