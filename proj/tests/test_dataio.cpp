#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lmnl/dataio.hpp"
#include "lmnl/error.hpp"
#include "test_helpers.hpp"

using namespace lmnl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lmnl_unit";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

const fs::path kData = LMNL_DATA_DIR;

}  // namespace

TEST_CASE("csv round trip") {
  const auto p = write_text("three.csv", "x_1,x_2,av_1,av_2,choice\n0.5,1,1,1,0\n-2,3.25,1,0,0\n7,8,0,1,1\n");
  const auto d = load_csv(p, default_schema({"1", "2"}));
  CHECK(d.rows() == 3);
  CHECK(d.columns == std::vector<std::string>{"x_1", "x_2"});
  CHECK(d.values(1, 1) == 3.25);
  CHECK(d.choice == std::vector<int>{0, 0, 1});
  CHECK(!d.available(1, 1));
  CHECK(!d.available(2, 0));

  const auto out = scratch("three_again.csv");
  write_csv(d, out);
  const auto back = load_csv(out, default_schema({"1", "2"}));
  CHECK(back.values == d.values);
  CHECK((back.available == d.available).all());
  CHECK(back.choice == d.choice);
}

TEST_CASE("tab separated files and missing availability columns") {
  const auto p = write_text("tabs.dat", "a\tb\tchoice\n1\t2\t1\n3\t4\t0\n");
  const auto d = load_csv(p, default_schema({"x", "y"}));
  CHECK(d.rows() == 2);
  CHECK(d.available.all());
}

TEST_CASE("malformed input is reported with its location") {
  const auto bad = write_text("bad.csv", "x,choice\n1,0\nabc,1\n");
  try {
    load_table(bad);
    FAIL("parsed a non-numeric cell");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'x'") != std::string::npos);
  }
  CHECK_THROWS_AS(load_table(write_text("empty.csv", "")), DataError);
  CHECK_THROWS_AS(load_table(write_text("header_only.csv", "x,choice\n")), DataError);
  CHECK_THROWS_AS(load_table(write_text("ragged.csv", "x,choice\n1\n")), DataError);
  CHECK_THROWS_AS(load_table(scratch("does_not_exist.csv")), DataError);
  CHECK_THROWS_AS(load_csv(write_text("label.csv", "x,choice\n1,2\n"), default_schema({"a", "b"})), DataError);
  CHECK_THROWS_AS(load_csv(write_text("unavailable.csv", "x,av_a,av_b,choice\n1,0,1,0\n"),
                           default_schema({"a", "b"})),
                  InvalidRowError);
}

TEST_CASE("dataset helpers") {
  auto d = testing::random_dataset(10, {"u", "v"}, {"a", "b"}, 1);
  CHECK_THROWS_AS(d.column("w"), DataError);
  d.set_column("w", Vector::Constant(10, 2.0));
  CHECK(d.column("w").sum() == 20.0);
  CHECK_THROWS_AS(d.set_column("w", Vector::Zero(3)), ShapeError);
  const std::vector<std::size_t> rows = {3, 7};
  const auto s = d.subset(rows);
  CHECK(s.rows() == 2);
  CHECK(s.values.row(1) == d.values.row(7));
  CHECK(s.choice[0] == d.choice[3]);
}

TEST_CASE("split sizes and determinism") {
  const auto d = testing::random_dataset(101, {"u"}, {"a", "b"}, 2);
  const auto [train, test] = split(d, 0.8, 5);
  CHECK(train.rows() == 81);
  CHECK(test.rows() == 20);
  const auto again = split(d, 0.8, 5);
  CHECK(again.first.values == train.values);
  CHECK(!(split(d, 0.8, 6).first.values == train.values));
  CHECK_THROWS_AS(split(d, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(split(d, 0.0, 0), ConfigError);
}

TEST_CASE("correlation matrix") {
  auto d = testing::random_dataset(50, {"u"}, {"a", "b"}, 3);
  d.set_column("twice", d.column("u") * 2.0);
  d.set_column("flip", -d.column("u"));
  d.set_column("flat", Vector::Constant(50, 4.0));
  const auto c = correlation_matrix(d, {"u", "twice", "flip", "flat"});
  CHECK(c.values(0, 1) == doctest::Approx(1.0));
  CHECK(c.values(0, 2) == doctest::Approx(-1.0));
  CHECK(c.values(0, 3) == 0.0);
  CHECK(c.values(3, 3) == 1.0);
  CHECK(c.values.isApprox(c.values.transpose()));
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("flat") != std::string::npos);
}

TEST_CASE("Swissmetro preprocessing") {
  const auto path = kData / "swissmetro.dat";
  if (!fs::exists(path)) {
    MESSAGE("swissmetro.dat not present, skipped");
    return;
  }
  const auto raw = load_table(path);
  const auto plain = preprocess_swissmetro(raw);
  CHECK(plain.rows() == 9036);
  CHECK(plain.alternatives == std::vector<std::string>{"Train", "SM", "Car"});
  CHECK(plain.available.all());

  // first kept raw row: times and costs divided by 100
  Eigen::Index first = -1;
  for (Eigen::Index r = 0; r < raw.rows() && first < 0; ++r) {
    const bool known = raw.values(r, raw.column_index("CHOICE")) != 0;
    const bool all_av = raw.values(r, raw.column_index("TRAIN_AV")) == 1 &&
                        raw.values(r, raw.column_index("SM_AV")) == 1 &&
                        raw.values(r, raw.column_index("CAR_AV")) == 1;
    if (known && all_av) first = r;
  }
  REQUIRE(first >= 0);
  CHECK(plain.values(0, plain.column_index("TRAIN_TT")) ==
        doctest::Approx(raw.values(first, raw.column_index("TRAIN_TT")) / 100.0));
  CHECK(plain.values(0, plain.column_index("CAR_CO")) ==
        doctest::Approx(raw.values(first, raw.column_index("CAR_CO")) / 100.0));
  CHECK(plain.choice[0] == static_cast<int>(raw.values(first, raw.column_index("CHOICE"))) - 1);

  SwissmetroOptions ga;
  ga.ga_cost_adjust = true;
  const auto adjusted = preprocess_swissmetro(raw, ga);
  REQUIRE(adjusted.rows() == plain.rows());
  const auto ga_col = plain.column("GA");
  for (const auto& col : plain.columns) {
    CAPTURE(col);
    const Vector a = plain.column(col);
    const Vector b = adjusted.column(col);
    if (col == "TRAIN_CO" || col == "SM_CO") {
      for (Eigen::Index r = 0; r < a.size(); ++r) {
        if (ga_col[r] == 1.0) {
          CHECK(b[r] == 0.0);
        } else {
          CHECK(b[r] == a[r]);
        }
      }
    } else {
      CHECK(a == b);
    }
  }
}

TEST_CASE("Optima preprocessing") {
  const auto path = kData / "optima.dat";
  if (!fs::exists(path)) {
    MESSAGE("optima.dat not present, skipped");
    return;
  }
  const auto raw = load_table(path);
  const auto d = preprocess_optima(raw);
  CHECK(d.rows() < raw.rows());
  for (const auto& col : OptimaColumns::required()) CHECK(d.column(col).minCoeff() != -1.0);
  CHECK(d.column("ScaledIncome").minCoeff() > 0.0);
  const Vector mcost = d.column("MCost_PT");
  CHECK(mcost[0] == doctest::Approx(d.column("MarginalCostPT")[0] / d.column("ScaledIncome")[0]));
  CHECK(d.column("Work").maxCoeff() <= 1.0);
  MESSAGE("Optima rows after filtering: " << d.rows());
}

TEST_CASE("Optima row count after filtering is 1376" * doctest::may_fail()) {
  const auto path = kData / "optima.dat";
  if (!fs::exists(path)) return;
  CHECK(preprocess_optima(load_table(path)).rows() == 1376);
}
