#include <doctest.h>

#include <cmath>

#include "gtopt/core.hpp"
#include "gtopt/objectives.hpp"
#include "gtopt/reference_opt.hpp"
#include "oracles.hpp"

using namespace gtopt;

namespace {

QuadraticObjective fixture(std::size_t nodes = 4, std::size_t per_node = 3, double spread = 0.3) {
  QuadraticFixtureSpec spec;
  spec.nodes = nodes;
  spec.per_node = per_node;
  spec.dim = 3;
  spec.hessian_spread = spread;
  spec.seed = 12;
  return make_quadratic_fixture(spec);
}

// Deterministic replay of the index a generator would draw next.
std::size_t peek_index(const Rng& rng, std::size_t n) {
  Rng copy = rng;
  return copy.index(n);
}

}  // namespace

TEST_CASE("gradient table running average") {
  Rng rng(3, 0);
  auto table = GradientTable::build(7, [&](std::size_t) {
    Vector v(4);
    for (auto& x : v) x = rng.normal();
    return v;
  });
  CHECK((table.average() - table.direct_average()).norm() <= 1e-14);
  for (int k = 0; k < 500; ++k) {
    Vector v(4);
    for (auto& x : v) x = rng.normal();
    table.replace(rng.index(7), v);
    CHECK((table.average() - table.direct_average()).norm() <= 1e-12);
  }
}

TEST_CASE("step schedules") {
  const auto c = StepSchedule::constant(0.1);
  CHECK(c(0) == 0.1);
  CHECK(c(1000) == 0.1);
  const auto h = StepSchedule::harmonic(2.0, 1.0);
  CHECK(h(0) == 2.0);
  CHECK(h(3) == 0.5);
  CHECK_THROWS_AS(StepSchedule::constant(0.0), ParameterError);
  CHECK_THROWS_AS(StepSchedule::harmonic(1.0, 0.0), ParameterError);
  CHECK(parse_svrg_option("a") == SvrgOption::last);
  CHECK(parse_svrg_option("average") == SvrgOption::average);
  CHECK_THROWS_AS(parse_svrg_option("d"), ConfigError);
}

TEST_CASE("gradient descent") {
  SUBCASE("one step to the minimizer in one dimension") {
    Matrix one = Matrix::Identity(1, 1);
    Vector target(1);
    target << 3.0;
    QuadraticObjective q({{{one, target}}});
    const auto path = gd_run(q, Vector::Zero(1), StepSchedule::constant(1.0), 1);
    CHECK(path.back()(0) == 3.0);
  }
  SUBCASE("monotone decrease at step 1/L") {
    const auto q = fixture();
    const auto path = gd_run(q, Vector::Zero(3), StepSchedule::constant(1.0 / q.curvature().L), 50);
    for (std::size_t k = 1; k < path.size(); ++k) CHECK(q.value(path[k]) <= q.value(path[k - 1]) * (1.0 + 1e-14));
  }
  SUBCASE("divergence guard") {
    const auto q = fixture();
    CHECK_THROWS_AS(gd_run(q, Vector::Ones(3), StepSchedule::constant(10.0 / q.curvature().L), 2000),
                    DivergenceError);
  }
}

TEST_CASE("stochastic gradient step") {
  const auto q = fixture();
  const Vector theta = Vector::Constant(3, 0.7);
  const double alpha = 0.05;

  // one component: identical to a gradient step
  const auto single = fixture(1, 1);
  Rng r1(1, 0);
  const Vector expect = theta - alpha * single.global_gradient(theta);
  CHECK((sgd_step(single, theta, alpha, r1) - expect).norm() <= 1e-15);

  // enumeration: the mean over all N draws is the gradient step
  Vector mean = Vector::Zero(3);
  for (std::size_t s = 0; s < q.total_components(); ++s) mean += theta - alpha * q.sample_gradient(s, theta);
  mean /= static_cast<double>(q.total_components());
  CHECK((mean - (theta - alpha * q.global_gradient(theta))).norm() <= 1e-12);

  // the step uses the component the generator draws
  Rng rng(4, 0);
  const std::size_t s = peek_index(rng, q.total_components());
  CHECK((sgd_step(q, theta, alpha, rng) - (theta - alpha * q.sample_gradient(s, theta))).norm() <= 1e-15);
}

TEST_CASE("SGD constant step plateau shrinks with the step") {
  const auto q = fixture(4, 5, 0.3);
  const Vector star = solve_reference(q);
  const double L = q.curvature().L;
  auto plateau = [&](double alpha) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed, 0);
      Vector t = Vector::Zero(3);
      for (int k = 0; k < 3000; ++k) {
        t = sgd_step(q, t, alpha, rng);
        if (k >= 2000) total += (t - star).squaredNorm();
      }
    }
    return total / (20.0 * 1000.0);
  };
  const double full = plateau(0.5 / L);
  const double half = plateau(0.25 / L);
  CHECK(half < full);
  CHECK(full > 0.0);
}

TEST_CASE("SAGA") {
  const auto q = fixture();
  const Vector theta = Vector::Constant(3, -0.4);
  auto table = saga_table(q, theta);
  CHECK((table.average() - q.global_gradient(theta)).norm() <= 1e-12);

  // fresh table: the estimator equals the full gradient for every s
  for (std::size_t s = 0; s < q.total_components(); ++s)
    CHECK((saga_estimate(q.sample_gradient(s, theta), table, s) - q.global_gradient(theta)).norm() <= 1e-12);

  // stale table: enumeration over s still gives the full gradient
  const Vector other = Vector::Constant(3, 1.1);
  Vector mean = Vector::Zero(3);
  for (std::size_t s = 0; s < q.total_components(); ++s) mean += saga_estimate(q.sample_gradient(s, other), table, s);
  mean /= static_cast<double>(q.total_components());
  CHECK((mean - q.global_gradient(other)).norm() <= 1e-12);

  // linear convergence at alpha = 1/(3L)
  const Vector star = solve_reference(q);
  Rng rng(2, 0);
  Vector t = Vector::Zero(3);
  auto tab = saga_table(q, t);
  const double alpha = 1.0 / (3.0 * q.curvature().L);
  for (int k = 0; k < 4000; ++k) t = saga_step(q, t, tab, alpha, rng);
  CHECK((t - star).squaredNorm() <= 1e-10);
}

TEST_CASE("SVRG") {
  const auto q = fixture();
  const Vector anchor = Vector::Constant(3, 0.2);
  const Vector batch = q.global_gradient(anchor);
  // at the anchor the estimator is the batch gradient
  for (std::size_t s = 0; s < q.total_components(); ++s)
    CHECK((svrg_estimate(q.sample_gradient(s, anchor), q.sample_gradient(s, anchor), batch) - batch).norm() <=
          1e-12);
  // unbiased elsewhere
  const Vector x = Vector::Constant(3, -0.9);
  Vector mean = Vector::Zero(3);
  for (std::size_t s = 0; s < q.total_components(); ++s)
    mean += svrg_estimate(q.sample_gradient(s, x), q.sample_gradient(s, anchor), batch);
  mean /= static_cast<double>(q.total_components());
  CHECK((mean - q.global_gradient(x)).norm() <= 1e-12);

  const Vector star = solve_reference(q);
  const double alpha = 1.0 / (10.0 * q.curvature().L);
  for (auto option : {SvrgOption::last, SvrgOption::average, SvrgOption::random}) {
    Rng rng(6, 0);
    const auto path = svrg_run(q, Vector::Zero(3), alpha, 20, 60, option, rng);
    std::vector<double> ks, logs;
    for (std::size_t k = 0; k < path.size(); ++k) {
      ks.push_back(static_cast<double>(k));
      logs.push_back(std::log((path[k] - star).squaredNorm() + 1e-300));
    }
    CHECK(oracle::slope(ks, logs) < -0.1);
    CHECK((path.back() - star).squaredNorm() <= 1e-10);
  }
}

TEST_CASE("reference solver") {
  SUBCASE("identity Hessians give the mean target") {
    const auto q = fixture(4, 3, 0.0);
    Vector mean = Vector::Zero(3);
    for (std::size_t i = 0; i < q.nodes(); ++i)
      for (std::size_t j = 0; j < q.components(i); ++j) mean += q.component(i, j).b;
    mean /= static_cast<double>(q.total_components());
    CHECK((solve_reference(q) - mean).norm() <= 1e-12);
  }
  SUBCASE("logistic stationarity") {
    const auto data = synthetic_two_gaussian(200, 5, 2.0, 21);
    const auto obj = make_logistic(data, 20, 10, PartitionMode::one_class_per_node, 2, 0.0);
    const Vector star = solve_reference(obj);
    CHECK(obj.global_gradient(star).norm() <= kReferenceTolerance);
    CHECK_THROWS_AS(solve_reference(obj, 1e-12, 3), SolverError);
  }
}
