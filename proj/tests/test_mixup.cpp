#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "neraug/mixup.hpp"

using namespace neraug;
using namespace neraug::testing;
using Eigen::MatrixXd;

namespace {

struct Moments {
  double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(xs.size() - 1);
  return m;
}

std::vector<double> draws(const MixupConfig& cfg, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample_lambda(cfg, rng);
  return xs;
}

AugmentedSample sample(std::string id, std::string parent, Strategy s) {
  AugmentedSample a;
  a.id = std::move(id);
  a.parent_id = std::move(parent);
  a.strategy = s;
  return a;
}

Dataset originals(std::initializer_list<std::string> ids) {
  Dataset d;
  d.schema = conll_schema();
  for (const auto& id : ids) d.sentences.push_back({id, {"x"}, {}});
  return d;
}

}  // namespace

TEST_CASE("Beta(130,5) moments match the analytic values") {
  const auto xs = draws(MixupConfig{}, 100000, 7);
  const auto m = moments(xs);
  const double a = 130, b = 5;
  const double mean = a / (a + b);
  const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
  CHECK(var == doctest::Approx(2.625e-4).epsilon(0.01));
  CHECK(std::abs(m.mean - mean) < 0.005);
  CHECK(std::abs(m.var - var) < 0.2 * var);
  CHECK(std::all_of(xs.begin(), xs.end(), [](double x) { return x > 0 && x < 1; }));
}

TEST_CASE("Beta(1,1) is uniform by the Kolmogorov-Smirnov statistic") {
  auto xs = draws(MixupConfig{1, 1, {0}}, 100000, 11);
  std::sort(xs.begin(), xs.end());
  double ks = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - xs[i]));
    ks = std::max(ks, std::abs(xs[i] - static_cast<double>(i) / n));
  }
  CHECK(ks < 0.02);
}

TEST_CASE("mixup config validation") {
  CHECK_THROWS_AS(MixupConfig({0, 5, {8}}).validate(), Error);
  CHECK_THROWS_AS(MixupConfig({130, 5, {}}).validate(), Error);
  CHECK_NOTHROW(MixupConfig{}.validate());
}

TEST_CASE("interpolation endpoints and hand arithmetic") {
  MatrixXd hf(1, 2), ho(1, 2);
  hf << 2, 0;
  ho << 0, 2;
  MatrixXd expect(1, 2);
  expect << 0.5, 1.5;
  CHECK(interpolate_states(hf, ho, 0.25).isApprox(expect, 1e-15));

  Rng rng(3);
  const MatrixXd a = MatrixXd::Random(7, 5), b = MatrixXd::Random(7, 5);
  CHECK((interpolate_states(a, b, 1.0).array() == a.array()).all());
  CHECK((interpolate_states(a, b, 0.0).array() == b.array()).all());
  CHECK_THROWS_AS(interpolate_states(a, MatrixXd::Zero(7, 4), 0.5), Error);
}

TEST_CASE("interpolation is linear in lambda and convex") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = static_cast<Eigen::Index>(uniform_index(rng, 1, 9));
    const MatrixXd a = MatrixXd::Random(rows, 4), b = MatrixXd::Random(rows, 4);
    const double l1 = uniform_unit(rng), l2 = uniform_unit(rng);
    const MatrixXd lhs = interpolate_states(a, b, l1) + interpolate_states(a, b, l2);
    const MatrixXd rhs = 2 * interpolate_states(a, b, (l1 + l2) / 2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    const MatrixXd mid = interpolate_states(a, b, l1);
    CHECK((mid.array() >= a.cwiseMin(b).array() - 1e-12).all());
    CHECK((mid.array() <= a.cwiseMax(b).array() + 1e-12).all());
  }
}

TEST_CASE("float sequences interpolate in their own scalar") {
  Eigen::MatrixXf a = Eigen::MatrixXf::Ones(2, 3), b = Eigen::MatrixXf::Zero(2, 3);
  const Eigen::MatrixXf out = interpolate_states(a, b, 0.5f);
  CHECK(out(1, 2) == 0.5f);
}

TEST_CASE("length mismatch pads with zeros and outside labels, or truncates") {
  const MatrixXd a = MatrixXd::Ones(3, 2), b = MatrixXd::Ones(5, 2);
  const MatrixXd padded = interpolate_states(a, b, 0.5);
  CHECK(padded.rows() == 5);
  CHECK(padded(4, 0) == doctest::Approx(0.5));
  CHECK(interpolate_states(a, b, 0.5, AlignMode::Truncate).rows() == 3);

  MatrixXd ya = MatrixXd::Zero(2, 3), yb = MatrixXd::Zero(4, 3);
  ya.col(1).setOnes();
  yb.col(2).setOnes();
  const MatrixXd mixed = mix_labels(ya, yb, 0.75, 0);
  REQUIRE(mixed.rows() == 4);
  CHECK(mixed(3, 0) == doctest::Approx(0.75));
  CHECK(mixed(3, 2) == doctest::Approx(0.25));
  CHECK(is_distribution_sequence(mixed));
  CHECK(mix_labels(ya, yb, 0.75, 0, AlignMode::Truncate).rows() == 2);
  CHECK_THROWS_AS(mix_labels(ya, MatrixXd::Zero(2, 4), 0.5), Error);
}

TEST_CASE("mix_labels hand example and fixed point") {
  MatrixXd a = MatrixXd::Zero(1, 2), b = MatrixXd::Zero(1, 2);
  a(0, 0) = 1;
  b(0, 1) = 1;
  const MatrixXd m = mix_labels(a, b, 0.963);
  CHECK(m(0, 0) == doctest::Approx(0.963));
  CHECK(m(0, 1) == doctest::Approx(0.037));
  CHECK(mix_labels(a, a, 0.3).isApprox(a));
}

TEST_CASE("mixed labels stay on the simplex over fuzzed inputs") {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    auto random_dist = [&](Eigen::Index rows) {
      MatrixXd y = (MatrixXd::Random(rows, 9).array() + 1.0).matrix();
      y.array().colwise() /= y.rowwise().sum().array();
      return y;
    };
    const auto ya = random_dist(static_cast<Eigen::Index>(uniform_index(rng, 1, 12)));
    const auto yb = random_dist(static_cast<Eigen::Index>(uniform_index(rng, 1, 12)));
    CHECK(is_distribution_sequence(mix_labels(ya, yb, uniform_unit(rng))));
  }
}

TEST_CASE("one-hot BIO labels") {
  const auto schema = conll_schema();
  const auto y = one_hot_labels(bonds_sentence(), schema);
  CHECK(y.rows() == 21);
  CHECK(y.cols() == bio_tag_count(schema));
  CHECK(is_distribution_sequence(y));
  CHECK(y(0, bio_column(TypeId{0}, true)) == 1);
  CHECK(y(8, bio_column(TypeId{1}, true)) == 1);
  CHECK(y(9, bio_column(TypeId{1}, false)) == 1);
  CHECK(y(1, 0) == 1);
}

TEST_CASE("pairs cover exactly the label-flipping samples") {
  const auto d = originals({"a", "b"});
  std::vector<AugmentedSample> augmented{sample("a#sa-0", "a", Strategy::SA), sample("a#elc-0", "a", Strategy::ELC),
                                         sample("b#ea-0", "b", Strategy::EA), sample("b#er-0", "b", Strategy::ER),
                                         sample("b#sa-0", "b", Strategy::SA)};
  const auto pairs = build_pairs(augmented, d, MixupConfig{}, 1);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].flipped_id == "a#elc-0");
  CHECK(pairs[0].original_id == "a");
  CHECK(pairs[2].original_id == "b");

  CHECK(build_pairs({augmented[0], augmented[4]}, d, MixupConfig{}, 1).empty());
  CHECK_THROWS_AS(build_pairs({sample("z#elc-0", "z", Strategy::ELC)}, d, MixupConfig{}, 1), Error);

  // A pair does not depend on which other samples are present.
  const auto alone = build_pairs({augmented[3]}, d, MixupConfig{}, 1);
  CHECK(alone[0] == pairs[2]);
}

TEST_CASE("pair layers are uniform over the choices") {
  const auto d = originals({"p"});
  std::vector<AugmentedSample> augmented;
  for (int i = 0; i < 30000; ++i) augmented.push_back(sample("p#elc-" + std::to_string(i), "p", Strategy::ELC));
  const auto pairs = build_pairs(augmented, d, MixupConfig{}, 2);
  std::map<int, double> freq;
  for (const auto& p : pairs) freq[p.layer] += 1.0 / 30000;
  CHECK(freq.size() == 3);
  for (int layer : {8, 9, 10}) CHECK(std::abs(freq[layer] - 1.0 / 3) < 0.01);
}

TEST_CASE("pairs round-trip through JSON lines") {
  const auto d = originals({"a"});
  const auto pairs = build_pairs({sample("a#er-0", "a", Strategy::ER), sample("a#er-1", "a", Strategy::ER)}, d,
                                 MixupConfig{}, 9);
  std::stringstream io;
  write_pairs(io, pairs);
  CHECK(read_pairs(io) == pairs);
  std::istringstream bad("{\"flipped_id\": 3}\n");
  CHECK_THROWS_AS(read_pairs(bad), Error);
}
