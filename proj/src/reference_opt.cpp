#include "gtopt/reference_opt.hpp"

#include <cmath>

namespace gtopt {

void GradientTable::replace(std::size_t j, Vector value) {
  auto& slot = entries_.at(j);
  average_ += (value - slot) / static_cast<double>(entries_.size());
  slot = std::move(value);
}

Vector GradientTable::direct_average() const {
  Vector avg = Vector::Zero(entries_.empty() ? 0 : entries_.front().size());
  for (const auto& e : entries_) avg += e;
  return avg / static_cast<double>(entries_.size());
}

void GradientTable::recompute_average() {
  if (entries_.empty()) throw ParameterError("gradient table needs at least one entry");
  average_ = direct_average();
}

StepSchedule StepSchedule::constant(double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("step size must be positive");
  return StepSchedule(true, alpha, 0.0);
}

StepSchedule StepSchedule::harmonic(double a, double k0) {
  if (!(a > 0.0)) throw ParameterError("harmonic step scale must be positive");
  if (!(k0 > 0.0)) throw ParameterError("harmonic step offset must be positive");
  return StepSchedule(false, a, k0);
}

double StepSchedule::operator()(std::size_t k) const {
  return constant_ ? scale_ : scale_ / (static_cast<double>(k) + offset_);
}

SvrgOption parse_svrg_option(const std::string& s) {
  if (s == "last" || s == "a") return SvrgOption::last;
  if (s == "average" || s == "b") return SvrgOption::average;
  if (s == "random" || s == "c") return SvrgOption::random;
  throw ConfigError("unknown SVRG option '" + s + "'");
}

std::string to_string(SvrgOption option) {
  switch (option) {
    case SvrgOption::last: return "last";
    case SvrgOption::average: return "average";
    case SvrgOption::random: return "random";
  }
  return "?";
}

void check_divergence(const Vector& theta, std::size_t round) {
  if (!theta.allFinite() || theta.norm() > kDivergenceThreshold)
    throw DivergenceError("iterate diverged", round);
}

void check_divergence(const Matrix& stacked, std::size_t round) {
  if (!stacked.allFinite()) throw DivergenceError("iterate diverged", round);
  for (Eigen::Index i = 0; i < stacked.rows(); ++i)
    if (stacked.row(i).norm() > kDivergenceThreshold) throw DivergenceError("iterate diverged", round);
}

Vector saga_estimate(const Vector& fresh, const GradientTable& table, std::size_t s) {
  return fresh - table.entry(s) + table.average();
}

Vector svrg_estimate(const Vector& fresh, const Vector& at_anchor, const Vector& anchor_batch) {
  return fresh - at_anchor + anchor_batch;
}

std::vector<Vector> gd_run(const FiniteSumObjective& obj, const Vector& theta0, const StepSchedule& schedule,
                           std::size_t iters) {
  if (iters == 0) throw ParameterError("gd_run needs at least one iteration");
  std::vector<Vector> trace{theta0};
  trace.reserve(iters + 1);
  Vector theta = theta0;
  for (std::size_t k = 0; k < iters; ++k) {
    theta -= schedule(k) * obj.global_gradient(theta);
    check_divergence(theta, k + 1);
    trace.push_back(theta);
  }
  return trace;
}

Vector sgd_step(const FiniteSumObjective& obj, const Vector& theta, double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw ParameterError("step size must be positive");
  const auto s = rng.index(obj.total_components());
  return theta - alpha * obj.sample_gradient(s, theta);
}

GradientTable saga_table(const FiniteSumObjective& obj, const Vector& theta) {
  return GradientTable::build(obj.total_components(), [&](std::size_t s) { return obj.sample_gradient(s, theta); });
}

Vector saga_step(const FiniteSumObjective& obj, const Vector& theta, GradientTable& table, double alpha,
                 Rng& rng) {
  const auto s = rng.index(table.size());
  Vector fresh = obj.sample_gradient(s, theta);
  const Vector g = saga_estimate(fresh, table, s);
  table.replace(s, std::move(fresh));
  return theta - alpha * g;
}

Vector svrg_outer(const FiniteSumObjective& obj, const Vector& theta, double alpha, std::size_t T,
                  SvrgOption option, Rng& rng) {
  if (T == 0) throw ParameterError("SVRG inner loop length must be positive");
  const std::size_t N = obj.total_components();
  const Vector anchor_batch = obj.global_gradient(theta);
  // The random option's inner index is drawn up front so no iterate history
  // has to be kept.
  const std::size_t pick = option == SvrgOption::random ? rng.index(T) : T;
  Vector inner = theta;
  Vector kept = Vector::Zero(theta.size());
  for (std::size_t t = 0; t < T; ++t) {
    if (option == SvrgOption::average) kept += inner;
    if (t == pick) kept = inner;
    const auto s = rng.index(N);
    const Vector v = svrg_estimate(obj.sample_gradient(s, inner), obj.sample_gradient(s, theta), anchor_batch);
    inner -= alpha * v;
  }
  switch (option) {
    case SvrgOption::last: return inner;
    case SvrgOption::average: return kept / static_cast<double>(T);
    case SvrgOption::random: return kept;
  }
  return inner;
}

std::vector<Vector> svrg_run(const FiniteSumObjective& obj, const Vector& theta0, double alpha, std::size_t T,
                             std::size_t outer_iters, SvrgOption option, Rng& rng) {
  std::vector<Vector> trace{theta0};
  Vector theta = theta0;
  for (std::size_t k = 0; k < outer_iters; ++k) {
    theta = svrg_outer(obj, theta, alpha, T, option, rng);
    check_divergence(theta, k + 1);
    trace.push_back(theta);
  }
  return trace;
}

Vector solve_reference(const FiniteSumObjective& obj, double tol, std::size_t max_iters) {
  if (auto closed = obj.closed_form_minimizer()) return *closed;

  // Armijo backtracking with a trial step that doubles after every accepted
  // step. Close to the optimum the predicted decrease drops below the
  // rounding noise of F; there a step is accepted when it shrinks ||grad F||.
  Vector theta = Vector::Zero(static_cast<Eigen::Index>(obj.dim()));
  const double safe_step = 1.0 / obj.curvature().L;
  double step = safe_step;
  double f = obj.value(theta);
  Vector g = obj.global_gradient(theta);
  for (std::size_t it = 0; it < max_iters; ++it) {
    const double gnorm_sq = g.squaredNorm();
    if (std::sqrt(gnorm_sq) <= tol) return theta;
    Vector trial;
    Vector g_trial;
    double f_trial = 0.0;
    for (;;) {
      trial = theta - step * g;
      f_trial = obj.value(trial);
      const double predicted = 0.5 * step * gnorm_sq;
      if (predicted > 1e-13 * std::max(1.0, std::abs(f))) {
        if (f_trial <= f - predicted) break;
      } else {
        g_trial = obj.global_gradient(trial);
        if (g_trial.squaredNorm() < gnorm_sq) break;
        g_trial.resize(0);
      }
      step *= 0.5;
      if (step < safe_step) {
        step = safe_step;
        trial = theta - step * g;
        f_trial = obj.value(trial);
        g_trial.resize(0);
        break;
      }
    }
    theta = std::move(trial);
    f = f_trial;
    g = g_trial.size() ? std::move(g_trial) : obj.global_gradient(theta);
    step *= 2.0;
  }
  throw SolverError("reference solver did not reach ||grad F|| <= " + std::to_string(tol) + " in " +
                    std::to_string(max_iters) + " iterations");
}

}  // namespace gtopt
