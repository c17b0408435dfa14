#include <doctest.h>

#include <cmath>

#include "lmnl/error.hpp"
#include "lmnl/numcore.hpp"
#include "test_helpers.hpp"

using namespace lmnl;
using lmnl::testing::rel_diff;

TEST_CASE("dense_forward on hand examples") {
  DenseLayer id{Matrix::Identity(2, 2), Vector::Zero(2), Activation::Identity};
  Vector x(2);
  x << 1, 2;
  CHECK(dense_forward(id, x).isApprox(x));

  DenseLayer relu{Matrix(2, 1), Vector::Zero(2), Activation::ReLU};
  relu.weights << 1, -1;
  Vector three(1);
  three << 3;
  const Vector r = dense_forward(relu, three);
  CHECK(r[0] == 3.0);
  CHECK(r[1] == 0.0);

  DenseLayer single{Matrix(1, 2), Vector::Ones(1), Activation::Identity};
  single.weights << 2, 0.5;
  CHECK(dense_forward(single, x)[0] == doctest::Approx(4.0));

  Matrix batch(2, 2);
  batch << 1, 2, -1, 0;
  const Matrix out = dense_forward(single, batch);
  CHECK(out(0, 0) == doctest::Approx(4.0));
  CHECK(out(1, 0) == doctest::Approx(-1.0));
}

TEST_CASE("masked softmax") {
  Vector v = Vector::Zero(3);
  Availability all = Availability::Constant(3, true);
  CHECK(softmax(v, all).isApprox(Vector::Constant(3, 1.0 / 3.0)));

  Vector two(2);
  two << std::log(2.0), 0.0;
  const Vector p = softmax(two, Availability::Constant(2, true));
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0));

  Vector five = Vector::Constant(3, 5.0);
  Availability mask(3);
  mask << true, false, true;
  const Vector m = softmax(five, mask);
  CHECK(m[0] == doctest::Approx(0.5));
  CHECK(m[1] == 0.0);
  CHECK(m[2] == doctest::Approx(0.5));

  Vector big(2);
  big << 1000.0, 999.0;
  const Vector b = softmax(big, Availability::Constant(2, true));
  CHECK(std::isfinite(b[0]));
  CHECK(b[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("cross entropy") {
  Vector p(3), y(3);
  p << 1, 0, 0;
  y << 1, 0, 0;
  CHECK(cross_entropy(p, y) == doctest::Approx(0.0));
  p << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  y << 0, 1, 0;
  CHECK(cross_entropy(p, y) == doctest::Approx(std::log(3.0)));
  Vector p2(2), y2(2);
  p2 << 2.0 / 3, 1.0 / 3;
  y2 << 0, 1;
  CHECK(cross_entropy(p2, y2) == doctest::Approx(1.0986).epsilon(1e-4));
  // floor keeps the loss finite
  p2 << 1.0, 0.0;
  CHECK(cross_entropy(p2, y2) == doctest::Approx(-std::log(kProbabilityFloor)));
}

TEST_CASE("glorot uniform respects its limit and is seeded") {
  Rng a(3), b(3);
  const Matrix w = glorot_uniform(40, 60, a);
  const double limit = std::sqrt(6.0 / 100.0);
  CHECK(w.maxCoeff() <= limit);
  CHECK(w.minCoeff() >= -limit);
  CHECK(w == glorot_uniform(40, 60, b));
}

TEST_CASE("dropout mask") {
  Rng rng(11);
  CHECK(dropout_mask(50, 0.0, rng).isApprox(Vector::Ones(50)));
  CHECK(dropout_mask(50, 0.7, rng, Mode::Eval).isApprox(Vector::Ones(50)));
  const Vector m = dropout_mask(100000, 0.2, rng);
  CHECK(std::abs(m.mean() - 1.0) < 0.01);
  for (Eigen::Index k = 0; k < 20; ++k) CHECK((m[k] == 0.0 || std::abs(m[k] - 1.25) < 1e-12));
}

TEST_CASE("adam first step") {
  SUBCASE("zero gradient leaves parameters, counts the step") {
    AdamState s;
    std::vector<double> x = {1.0, -2.0};
    std::vector<double> g = {0.0, 0.0};
    std::span<double> xs(x);
    std::span<const double> gs(g);
    adam_step(s, std::span<const std::span<double>>(&xs, 1), std::span<const std::span<const double>>(&gs, 1));
    CHECK(x[0] == 1.0);
    CHECK(x[1] == -2.0);
    CHECK(s.step == 1);
  }
  SUBCASE("update magnitude is the learning rate, per coordinate") {
    AdamState s;
    const double g0 = 0.3;
    std::vector<double> x = {0.0, 0.0};
    std::vector<double> g = {g0, 2 * g0};
    std::span<double> xs(x);
    std::span<const double> gs(g);
    adam_step(s, std::span<const std::span<double>>(&xs, 1), std::span<const std::span<const double>>(&gs, 1));
    CHECK(x[0] == doctest::Approx(-s.learning_rate * g0 / (g0 + s.epsilon)));
    CHECK(x[1] == doctest::Approx(-s.learning_rate * 2 * g0 / (2 * g0 + s.epsilon)));
  }
  SUBCASE("non-finite gradient throws") {
    AdamState s;
    std::vector<double> x = {0.0};
    std::vector<double> g = {std::nan("")};
    std::span<double> xs(x);
    std::span<const double> gs(g);
    CHECK_THROWS_AS(adam_step(s, std::span<const std::span<double>>(&xs, 1),
                              std::span<const std::span<const double>>(&gs, 1)),
                    TrainingError);
  }
}

TEST_CASE("network backward matches central differences") {
  Rng rng(5);
  RepresentationNet net(4, {6, 5}, 3, rng);
  for (auto& layer : net.layers()) layer.biases.setRandom();
  Matrix x(10, 4);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.uniform(-1.0, 1.0);
  }
  Matrix seed(10, 3);
  for (Eigen::Index r = 0; r < seed.rows(); ++r) {
    for (Eigen::Index c = 0; c < seed.cols(); ++c) seed(r, c) = rng.uniform(-1.0, 1.0);
  }
  const auto objective = [&](const RepresentationNet& n, const Matrix& in) {
    return (n.forward(in, Mode::Eval, 0.0, nullptr, nullptr).array() * seed.array()).sum();
  };
  NetCache cache;
  net.forward(x, Mode::Eval, 0.0, nullptr, &cache);
  const auto g = net.backward(cache, seed, true);

  const double h = 1e-6;
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    auto& W = net.layers()[k].weights;
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) {
        const double keep = W(r, c);
        W(r, c) = keep + h;
        const double up = objective(net, x);
        W(r, c) = keep - h;
        const double down = objective(net, x);
        W(r, c) = keep;
        CHECK(rel_diff(g.weights[k](r, c), (up - down) / (2 * h)) < 1e-5);
      }
    }
    auto& b = net.layers()[k].biases;
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      const double keep = b[r];
      b[r] = keep + h;
      const double up = objective(net, x);
      b[r] = keep - h;
      const double down = objective(net, x);
      b[r] = keep;
      CHECK(rel_diff(g.biases[k][r], (up - down) / (2 * h)) < 1e-5);
    }
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Matrix xp = x, xm = x;
      xp(r, c) += h;
      xm(r, c) -= h;
      CHECK(rel_diff(g.inputs(r, c), (objective(net, xp) - objective(net, xm)) / (2 * h)) < 1e-5);
    }
  }
}

TEST_CASE("network counts and structure") {
  Rng rng(1);
  RepresentationNet net(14, {100}, 3, rng);
  CHECK(net.weight_count() == 100 * (14 + 3));
  CHECK(net.bias_count() == 103);
  CHECK(net.layers().front().activation == Activation::ReLU);
  CHECK(net.layers().back().activation == Activation::Identity);
  CHECK(net.layers().front().biases.isZero());
  net.zero();
  CHECK(net.squared_weight_norm() == 0.0);
  CHECK(net.forward(Matrix::Random(4, 14), Mode::Eval, 0.0, nullptr, nullptr).isZero());
}
