#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "gtopt/core.hpp"
#include "gtopt/dataset.hpp"
#include "gtopt/objectives.hpp"
#include "gtopt/reference_opt.hpp"
#include "oracles.hpp"

using namespace gtopt;

namespace {

Vector random_vector(std::size_t p, Rng& rng, double scale = 1.0) {
  Vector v(p);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

LogisticObjective small_logistic(PartitionMode mode, std::size_t n = 4, std::size_t m = 5, std::size_t d = 3) {
  const auto data = synthetic_two_gaussian(n * m, d, 2.0, 17);
  return make_logistic(data, n, m, mode, 3, 0.05);
}

}  // namespace

TEST_CASE("quadratic gradient on a trivial component") {
  const Matrix eye = Matrix::Identity(3, 3);
  QuadraticObjective q({{{eye, Vector::Zero(3)}}});
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  CHECK(q.component_gradient(0, 0, v) == v);
  CHECK(q.local_batch_gradient(0, v) == v);
  CHECK(q.value(v) == doctest::Approx(0.5 * v.squaredNorm()));
}

TEST_CASE("logistic gradient at the origin") {
  const auto obj = small_logistic(PartitionMode::iid_shuffle);
  const Vector zero = Vector::Zero(4);
  for (std::size_t i = 0; i < obj.nodes(); ++i)
    for (std::size_t j = 0; j < obj.components(i); ++j) {
      const auto& sh = obj.shard(i);
      Vector expect(4);
      expect.head(3) = -0.5 * sh.labels[j] * sh.features.row(static_cast<Eigen::Index>(j)).transpose();
      expect(3) = -0.5 * sh.labels[j];
      CHECK((obj.component_gradient(i, j, zero) - expect).norm() <= 1e-15);
      CHECK(obj.component_value(i, j, zero) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    }
}

TEST_CASE("gradients match finite differences") {
  Rng rng(5, 0);
  const auto logistic = small_logistic(PartitionMode::one_class_per_node);
  QuadraticFixtureSpec spec;
  spec.nodes = 3;
  spec.per_node = 4;
  spec.dim = 4;
  const auto quad = make_quadratic_fixture(spec);
  for (int point = 0; point < 10; ++point) {
    const Vector tl = random_vector(logistic.dim(), rng, 2.0);
    for (std::size_t i = 0; i < logistic.nodes(); ++i)
      for (std::size_t j = 0; j < logistic.components(i); ++j) {
        auto f = [&](const Vector& t) { return logistic.component_value(i, j, t); };
        CHECK(oracle::rel_error(logistic.component_gradient(i, j, tl), oracle::finite_difference(f, tl)) <= 1e-5);
      }
    const Vector tq = random_vector(quad.dim(), rng, 2.0);
    for (std::size_t i = 0; i < quad.nodes(); ++i)
      for (std::size_t j = 0; j < quad.components(i); ++j) {
        auto f = [&](const Vector& t) { return quad.component_value(i, j, t); };
        CHECK(oracle::rel_error(quad.component_gradient(i, j, tq), oracle::finite_difference(f, tq)) <= 1e-5);
      }
  }
}

TEST_CASE("logistic is numerically stable at large margins") {
  const auto obj = small_logistic(PartitionMode::iid_shuffle);
  Vector big = Vector::Constant(4, 1e4);
  for (std::size_t j = 0; j < obj.components(0); ++j) {
    CHECK(std::isfinite(obj.component_value(0, j, big)));
    CHECK(obj.component_gradient(0, j, big).allFinite());
    CHECK(std::isfinite(obj.component_value(0, j, -big)));
  }
}

TEST_CASE("averaging structure") {
  Rng rng(8, 0);
  const auto obj = small_logistic(PartitionMode::iid_shuffle, 5, 6, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector t = random_vector(obj.dim(), rng);
    Vector global = Vector::Zero(obj.dim());
    for (std::size_t i = 0; i < obj.nodes(); ++i) {
      Vector local = Vector::Zero(obj.dim());
      for (std::size_t j = 0; j < obj.components(i); ++j) local += obj.component_gradient(i, j, t);
      local /= static_cast<double>(obj.components(i));
      CHECK((obj.local_batch_gradient(i, t) - local).norm() <= 1e-12);
      global += local;
    }
    global /= static_cast<double>(obj.nodes());
    CHECK((obj.global_gradient(t) - global).norm() <= 1e-12);
    // plain N-term average of sample gradients equals the global gradient
    Vector avg = Vector::Zero(obj.dim());
    for (std::size_t s = 0; s < obj.total_components(); ++s) avg += obj.sample_gradient(s, t);
    avg /= static_cast<double>(obj.total_components());
    CHECK((avg - global).norm() <= 1e-12);
  }

  const auto one = small_logistic(PartitionMode::iid_shuffle, 3, 1, 2);
  const Vector t = Vector::Constant(3, 0.3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(one.local_batch_gradient(i, t) == one.component_gradient(i, 0, t));
}

TEST_CASE("component indexing") {
  const auto obj = small_logistic(PartitionMode::iid_shuffle, 3, 4, 2);
  const auto loc = obj.locate(9);
  CHECK(loc.node == 2);
  CHECK(loc.component == 1);
  CHECK_THROWS_AS(obj.component_gradient(3, 0, Vector::Zero(3)), ParameterError);
  CHECK_THROWS_AS(obj.component_gradient(0, 4, Vector::Zero(3)), ParameterError);
  CHECK_THROWS_AS(obj.component_gradient(0, 0, Vector::Zero(2)), DimensionError);
  CHECK_THROWS_AS(obj.locate(12), ParameterError);
}

TEST_CASE("quadratic closed form and curvature") {
  Matrix a(2, 2);
  a << 1.0, 0.0, 0.0, 2.0;
  Vector b1(2), b2(2);
  b1 << 1.0, 2.0;
  b2 << -3.0, 4.0;
  // A^T A = diag(1, 4)
  QuadraticObjective q({{{a, b1}}, {{a, b2}}});
  const auto c = q.curvature();
  CHECK(c.mu == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.L == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(c.exact);
  const Vector star = *q.closed_form_minimizer();
  // minimizer solves diag(1,4) x = A^T mean(b) = (-1, 6)
  CHECK(star(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(star(1) == doctest::Approx(1.5).epsilon(1e-14));

  const auto fixture = make_quadratic_fixture({});
  const Vector fstar = *fixture.closed_form_minimizer();
  CHECK(fixture.global_gradient(fstar).norm() <= 1e-10);

  const auto stats = estimate_stats(q, star, star);
  CHECK(stats.mu == doctest::Approx(1.0));
  CHECK(stats.L == doctest::Approx(4.0));
  CHECK(stats.kappa == doctest::Approx(4.0));
}

TEST_CASE("heterogeneity statistic") {
  SUBCASE("identical node data gives zero") {
    const auto data = synthetic_two_gaussian(8, 3, 2.0, 4);
    std::vector<Dataset> shards(4, data);
    LogisticObjective obj(shards, 0.1);
    const Vector star = solve_reference(obj);
    CHECK(estimate_stats(obj, star, star).b <= 1e-20);
  }
  SUBCASE("one-class shards are more heterogeneous than iid shards") {
    const auto data = synthetic_two_gaussian(200, 5, 2.0, 21);
    const auto skew = make_logistic(data, 20, 10, PartitionMode::one_class_per_node, 2, 0.0);
    const auto mixed = make_logistic(data, 20, 10, PartitionMode::iid_shuffle, 2, 0.0);
    const auto s1 = estimate_stats(skew, solve_reference(skew), Vector::Zero(6));
    const auto s2 = estimate_stats(mixed, solve_reference(mixed), Vector::Zero(6));
    CHECK(s1.b > 0.0);
    CHECK(s1.b > s2.b);
    CHECK_FALSE(s1.exact_curvature);
    CHECK(s1.mu == doctest::Approx(1.0 / 200.0));
  }
}

TEST_CASE("synthetic data and partitioning") {
  const auto data = synthetic_two_gaussian(1000, 10, 2.0, 1);
  CHECK(data.size() == 1000);
  CHECK(data.count(-1) == 500);
  CHECK(data.count(1) == 500);
  CHECK(synthetic_two_gaussian(7, 2, 1.0, 1).count(1) == 4);

  const auto shards = partition_dataset(data, 100, 10, PartitionMode::one_class_per_node, 9);
  CHECK(shards.size() == 100);
  std::size_t neg_nodes = 0;
  std::set<std::vector<double>> seen;
  for (const auto& s : shards) {
    CHECK(s.size() == 10);
    const bool neg = s.count(-1) == 10;
    CHECK((neg || s.count(1) == 10));
    neg_nodes += neg;
    for (Eigen::Index r = 0; r < s.features.rows(); ++r) {
      const Vector row = s.features.row(r).transpose();
      seen.insert(std::vector<double>(row.begin(), row.end()));
    }
  }
  CHECK(neg_nodes == 50);
  CHECK(seen.size() == 1000);  // shards are disjoint

  const auto whole = partition_dataset(data, 1, 10, PartitionMode::one_class_per_node, 9);
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].size() == 1000);

  // iid: per-node class counts follow a hypergeometric law; 10 samples, p = 1/2
  const auto iid = partition_dataset(data, 100, 10, PartitionMode::iid_shuffle, 9);
  double mean_pos = 0.0;
  for (const auto& s : iid) mean_pos += static_cast<double>(s.count(1)) / 100.0;
  CHECK(std::abs(mean_pos - 5.0) <= 3.0 * std::sqrt(2.5 / 100.0) + 1e-12);

  CHECK_THROWS_AS(partition_dataset(data, 100, 11, PartitionMode::one_class_per_node, 9), PartitionError);
  CHECK_THROWS_AS(partition_dataset(data, 100, 11, PartitionMode::iid_shuffle, 9), PartitionError);
}

TEST_CASE("standardize") {
  Dataset d;
  d.features.resize(4, 2);
  d.features << 1, 5, 2, 5, 3, 5, 4, 5;
  d.labels = {1, -1, 1, -1};
  standardize(d);
  CHECK(std::abs(d.features.col(0).mean()) <= 1e-15);
  const double var = d.features.col(0).squaredNorm() / 4.0;
  CHECK(var == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.features.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dataset ingestion") {
  SUBCASE("label map") {
    const auto map = parse_label_map("3:-1,8:1");
    CHECK(map.at("3") == -1);
    std::istringstream two("3,1.0,2.0\n8,0.5,0.25\n");
    CHECK(ingest_dataset(two, map, false).labels == std::vector<int>{-1, 1});
    std::istringstream in("3,1.0,2.0\n8,0.5,0.25\n3,-1,0\n5,0,0\n");
    CHECK_THROWS_AS(ingest_dataset(in, map, false), IoError);  // label 5 unmapped
  }
  SUBCASE("raw labels") {
    std::istringstream in("1,1.0,2.0\n-1,0.5,0.25\n");
    const auto d = ingest_dataset(in, {}, false);
    CHECK(d.size() == 2);
    CHECK(d.labels == std::vector<int>{1, -1});
    CHECK(d.features(1, 1) == 0.25);
  }
  SUBCASE("ragged rows") {
    std::istringstream in("1,1.0,2.0\n-1,0.5\n");
    CHECK_THROWS_AS(ingest_dataset(in, {}, false), IoError);
  }
  SUBCASE("single sample normalizes without NaN") {
    std::istringstream in("1,3.0,4.0\n");
    const auto d = ingest_dataset(in, {}, true);
    CHECK(d.features.allFinite());
    CHECK(d.features.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("round trip") {
    const auto data = synthetic_two_gaussian(20, 3, 1.5, 6);
    std::stringstream ss;
    write_dataset_csv(ss, data);
    const auto back = ingest_dataset(ss, {}, false);
    CHECK(back.features == data.features);
    CHECK(back.labels == data.labels);
  }
  CHECK_THROWS_AS(ingest_dataset(std::string("/nonexistent/data.csv"), {}, false), IoError);
  CHECK_THROWS_AS(parse_label_map("3-1"), ConfigError);
}
