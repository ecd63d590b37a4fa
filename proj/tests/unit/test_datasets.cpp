#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fairkm/io.hpp"
#include "helpers.hpp"

using namespace fairkm;
using testutil::dataset_with_group_sizes;

namespace {

Dataset parse(const std::string& text, const std::vector<std::string>& features = {},
              const std::string& group = "group") {
  std::istringstream in(text);
  return load_csv(in, features, group);
}

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("load_csv reads features and assigns groups by first appearance") {
  const auto ds = parse("x,y,group\n1,2,a\n3,4,a\n5,6,b\n7,8,b\n", {"x", "y"});
  CHECK(ds.size() == 4);
  CHECK(ds.dim() == 2);
  CHECK(ds.groups() == 2);
  CHECK(ds.group_of == std::vector<int>{0, 0, 1, 1});
  CHECK(ds.points(2, 1) == 6.0);

  const auto flipped = parse("group,v\nm,1\nf,2\nm,3\n");
  CHECK(flipped.group_names == std::vector<std::string>{"m", "f"});
  CHECK(flipped.group_of == std::vector<int>{0, 1, 0});
  CHECK(flipped.dim() == 1);
}

TEST_CASE("load_csv handles quoting, whitespace, blank lines and a BOM") {
  const auto ds = parse("\xEF\xBB\xBF\"x\", \"sex\"\r\n 1.5 ,\"F\"\r\n\r\n-2e1,M\r\n", {"x"}, "sex");
  CHECK(ds.size() == 2);
  CHECK(ds.points(0, 0) == 1.5);
  CHECK(ds.points(1, 0) == -20.0);
  CHECK(ds.group_names == std::vector<std::string>{"F", "M"});
}

TEST_CASE("load_csv reports bad input precisely") {
  const std::string missing = error_of([] { parse("x,group\n1,a\n2,b\n", {"age"}); });
  CHECK(missing.find("age") != std::string::npos);
  CHECK_THROWS_AS(parse("x,group\n1,a\n2,b\n", {"age"}), ConfigError);
  CHECK_THROWS_AS(parse("x,y\n1,a\n2,b\n", {}, "sex"), ConfigError);

  const std::string bad = error_of([] { parse("x,group\n1,a\nabc,b\n"); });
  CHECK(bad.find("row 2") != std::string::npos);
  CHECK(bad.find("'x'") != std::string::npos);
  CHECK_THROWS_AS(parse("x,group\n1,a\nabc,b\n"), DataError);
  CHECK_THROWS_AS(parse("x,group\n1,a\n2,\n"), DataError);
  CHECK_THROWS_AS(parse("x,group\n1,a,3\n"), DataError);

  const std::string single = error_of([] { parse("x,group\n1,a\n2,a\n"); });
  CHECK(single.find("J must be >= 2") != std::string::npos);
  CHECK_THROWS_AS(parse("x,group\n1,a\n2,a\n"), DataError);
}

TEST_CASE("dataset_balance from group proportions") {
  CHECK(dataset_balance(dataset_with_group_sizes({67, 33})) == doctest::Approx(0.4925).epsilon(1e-4));
  CHECK(dataset_balance(dataset_with_group_sizes({50, 50})) == 1.0);

  // Adult gender counts (male, female).
  CHECK(dataset_balance(dataset_with_group_sizes({21790, 10771})) == doctest::Approx(0.49).epsilon(0.01 / 0.49));

  // Bank marital counts (divorced, single, married); rounded proportions give ~0.18.
  const auto bank = dataset_with_group_sizes({4612, 11568, 24928});
  CHECK(std::abs(dataset_balance(bank) - 0.185) <= 0.005);
  CHECK(dataset_balance(dataset_with_group_sizes({11, 28, 61})) == doctest::Approx(11.0 / 61.0));
}

TEST_CASE("dataset_balance is invariant under permutation and group relabelling") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto ds = testutil::random_dataset(rng, 50, 2, 3);
    const double b = dataset_balance(ds);

    auto permuted = ds;
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    order = rng.sample(order, order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      permuted.points.row(i) = ds.points.row(order[i]);
      permuted.group_of[i] = ds.group_of[order[i]];
    }
    CHECK(dataset_balance(permuted) == b);

    auto relabelled = ds;
    for (auto& g : relabelled.group_of) g = (g + 1) % 3;
    CHECK(dataset_balance(relabelled) == b);
  }
}

TEST_CASE("generate_gaussian_mixture is deterministic and matches the requested counts") {
  SyntheticSpec spec;
  spec.group_names = {"a", "b"};
  spec.seed = 7;
  GaussianComponent<double> c1{Vector<double>::Constant(2, -3.0), Vector<double>::Ones(2), {100, 100}};
  GaussianComponent<double> c2{Vector<double>::Constant(2, 3.0), Vector<double>::Ones(2), {100, 100}};
  spec.components = {c1, c2};

  const auto a = generate_gaussian_mixture(spec);
  const auto b = generate_gaussian_mixture(spec);
  CHECK(a.points == b.points);
  CHECK(a.group_of == b.group_of);
  CHECK(a.size() == 400);
  CHECK(a.group_sizes() == std::vector<std::int64_t>{200, 200});
  CHECK(dataset_balance(a) == 1.0);

  spec.seed = 8;
  CHECK(generate_gaussian_mixture(spec).points != a.points);

  spec.components = {GaussianComponent<double>{Vector<double>::Zero(2), Vector<double>::Ones(2), {100, 300}}};
  CHECK(dataset_balance(generate_gaussian_mixture(spec)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("generate_gaussian_mixture rejects invalid specs") {
  SyntheticSpec spec;
  spec.group_names = {"a", "b"};
  spec.components = {GaussianComponent<double>{Vector<double>::Zero(2), Vector<double>::Ones(2), {0, 0}}};
  CHECK_THROWS_AS(generate_gaussian_mixture(spec), ConfigError);
  spec.components[0].counts = {5, 5};
  spec.components[0].variance[1] = 0.0;
  CHECK_THROWS_AS(generate_gaussian_mixture(spec), ConfigError);
  spec.components[0].variance[1] = 1.0;
  spec.components[0].counts = {5, -1};
  CHECK_THROWS_AS(generate_gaussian_mixture(spec), ConfigError);
}

TEST_CASE("a 10^4-point component has its sample mean within 5 standard errors") {
  SyntheticSpec spec;
  spec.group_names = {"a", "b"};
  spec.seed = 3;
  Vector<double> mean(3), var(3);
  mean << 1.0, -2.0, 0.5;
  var << 0.25, 4.0, 1.0;
  spec.components = {GaussianComponent<double>{mean, var, {5000, 5000}}};
  const auto ds = generate_gaussian_mixture(spec);
  const Vector<double> sample_mean = ds.points.colwise().mean().transpose();
  for (Eigen::Index k = 0; k < 3; ++k) {
    const double se = std::sqrt(var[k] / 1e4);
    CHECK(std::abs(sample_mean[k] - mean[k]) < 5.0 * se);
  }
}

TEST_CASE("csv round trip is exact") {
  const auto ds = generate_gaussian_mixture(preset_spec("syn_unequal_ds1", 4));
  const std::string once = to_csv(ds);
  const auto back = parse(once);
  CHECK(back.points == ds.points);
  CHECK(back.group_of == ds.group_of);
  CHECK(to_csv(back) == once);
}

TEST_CASE("built-in presets") {
  const auto names = preset_names();
  CHECK(names == std::vector<std::string>{"syn_equal_ds1", "syn_equal_ds2", "syn_unequal_ds1", "syn_unequal_ds2"});
  for (const auto& name : names) {
    const auto ds = generate_gaussian_mixture(preset_spec(name, 1));
    CHECK(ds.size() == 400);
    CHECK(ds.dim() == 2);
    CHECK(ds.groups() == 2);
    const double expected = name.find("unequal") != std::string::npos ? 1.0 / 3.0 : 1.0;
    CHECK(dataset_balance(ds) == doctest::Approx(expected));
  }
  const std::string msg = error_of([] { preset_spec("nope", 1); });
  CHECK(msg.find("syn_equal_ds1") != std::string::npos);
  CHECK_THROWS_AS(preset_spec("nope", 1), ConfigError);
}

TEST_CASE("parse_synthetic_spec reads the documented JSON shape") {
  const auto spec = parse_synthetic_spec(
      R"({"groups": ["u", "v"], "components": [{"mean": [0, 1], "variance": [1, 2], "counts": [3, 4]}]})", 9);
  CHECK(spec.seed == 9);
  CHECK(spec.group_names == std::vector<std::string>{"u", "v"});
  REQUIRE(spec.components.size() == 1);
  CHECK(spec.components[0].variance[1] == 2.0);
  CHECK(generate_gaussian_mixture(spec).size() == 7);
  CHECK_THROWS_AS(parse_synthetic_spec("{\"groups\": [\"u\"]}", 1), ConfigError);
  CHECK_THROWS_AS(parse_synthetic_spec("not json", 1), ConfigError);
}

TEST_CASE("standardized and subsample") {
  const auto ds = generate_gaussian_mixture(preset_spec("syn_equal_ds1", 2));
  const auto z = standardized(ds);
  for (Eigen::Index k = 0; k < z.points.cols(); ++k) {
    CHECK(std::abs(z.points.col(k).mean()) < 1e-12);
    CHECK(z.points.col(k).squaredNorm() / 400.0 == doctest::Approx(1.0));
  }

  const auto s1 = subsample(ds, 50, 5);
  const auto s2 = subsample(ds, 50, 5);
  CHECK(s1.size() == 50);
  CHECK(s1.points == s2.points);
  CHECK(subsample(ds, 50, 6).points != s1.points);
  CHECK(subsample(ds, 1000, 5).size() == 400);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
