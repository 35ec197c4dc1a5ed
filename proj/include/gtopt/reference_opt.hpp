#pragma once

#include <string>
#include <vector>

#include "gtopt/core.hpp"
#include "gtopt/objectives.hpp"

namespace gtopt {

/// Stored component gradients with an incrementally maintained mean.
class GradientTable {
 public:
  GradientTable() = default;

  /// Fills every entry by evaluating `grad(j)` for j in [0, count).
  template <typename Fn>
  static GradientTable build(std::size_t count, Fn&& grad) {
    GradientTable t;
    t.entries_.reserve(count);
    for (std::size_t j = 0; j < count; ++j) t.entries_.push_back(grad(j));
    t.recompute_average();
    return t;
  }

  std::size_t size() const { return entries_.size(); }
  const Vector& entry(std::size_t j) const { return entries_.at(j); }
  const Vector& average() const { return average_; }

  /// avg <- avg + (value - old) / N, then stores value.
  void replace(std::size_t j, Vector value);

  /// Direct mean of the entries (for checking the running average).
  Vector direct_average() const;

 private:
  void recompute_average();

  std::vector<Vector> entries_;
  Vector average_;
};

/// Constant alpha, or harmonic a / (k + k0).
class StepSchedule {
 public:
  static StepSchedule constant(double alpha);
  static StepSchedule harmonic(double a, double k0);

  double operator()(std::size_t k) const;
  bool is_constant() const { return constant_; }
  double scale() const { return scale_; }
  double offset() const { return offset_; }

 private:
  StepSchedule(bool constant, double scale, double offset)
      : constant_(constant), scale_(scale), offset_(offset) {}

  bool constant_;
  double scale_;
  double offset_;
};

enum class SvrgOption { last, average, random };

SvrgOption parse_svrg_option(const std::string& s);
std::string to_string(SvrgOption option);

/// Throws DivergenceError when any coordinate is non-finite or the norm
/// exceeds kDivergenceThreshold.
void check_divergence(const Vector& theta, std::size_t round);
void check_divergence(const Matrix& stacked, std::size_t round);

/// SAGA estimator: fresh - table[s] + mean(table).
Vector saga_estimate(const Vector& fresh, const GradientTable& table, std::size_t s);

/// SVRG estimator: fresh - at_anchor + anchor_batch.
Vector svrg_estimate(const Vector& fresh, const Vector& at_anchor, const Vector& anchor_batch);

/// Batch gradient descent. Returns theta_0 .. theta_iters.
std::vector<Vector> gd_run(const FiniteSumObjective& obj, const Vector& theta0,
                           const StepSchedule& schedule, std::size_t iters);

/// theta - alpha * F_s'(theta) with s uniform over all N components.
Vector sgd_step(const FiniteSumObjective& obj, const Vector& theta, double alpha, Rng& rng);

/// Table over all N components (in sample_gradient scaling) at theta.
GradientTable saga_table(const FiniteSumObjective& obj, const Vector& theta);

/// One SAGA step; updates the table entry of the drawn component.
Vector saga_step(const FiniteSumObjective& obj, const Vector& theta, GradientTable& table, double alpha,
                 Rng& rng);

/// One SVRG outer iteration (batch gradient at the anchor plus T inner
/// steps), returning the next outer iterate per `option`.
Vector svrg_outer(const FiniteSumObjective& obj, const Vector& theta, double alpha, std::size_t T,
                  SvrgOption option, Rng& rng);

/// Outer iterates theta_0 .. theta_outer_iters.
std::vector<Vector> svrg_run(const FiniteSumObjective& obj, const Vector& theta0, double alpha, std::size_t T,
                             std::size_t outer_iters, SvrgOption option, Rng& rng);

inline constexpr double kReferenceTolerance = 1e-12;

/// High-accuracy minimizer: closed form when available, otherwise
/// gradient descent with backtracking until ||grad F|| <= tol. Throws
/// SolverError when the iteration cap is hit first.
Vector solve_reference(const FiniteSumObjective& obj, double tol = kReferenceTolerance,
                       std::size_t max_iters = 2'000'000);

}  // namespace gtopt
