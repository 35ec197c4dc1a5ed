#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gtopt/core.hpp"
#include "gtopt/mixing.hpp"
#include "gtopt/objectives.hpp"
#include "gtopt/reference_opt.hpp"

namespace gtopt {

enum class Method { dgd, dsgd, gt_dgd, gt_dsgd, gt_saga, gt_svrg };

Method parse_method(const std::string& s);
std::string to_string(Method m);
bool uses_tracking(Method m);

/// How GT-SVRG treats the carried estimator when a new anchor is taken.
///
/// carry: d and v are carried across outer loops unchanged, exactly as the
/// double-loop pseudocode reads.
/// refresh: the estimator is re-evaluated at the new anchor (where it equals
/// the anchor batch gradient) and the tracker absorbs the difference, so the
/// tracker mean still equals the estimator mean. With one node this is
/// centralized SVRG.
enum class SvrgAnchor { refresh, carry };

SvrgAnchor parse_svrg_anchor(const std::string& s);
std::string to_string(SvrgAnchor a);

/// Per-node view of the network state.
struct NodeState {
  Vector theta;
  Vector tracker;    ///< empty for methods without tracking
  Vector estimate;   ///< last local gradient estimate (g or v)
  const GradientTable* table = nullptr;  ///< GT-SAGA only
  Vector anchor;       ///< GT-SVRG only
  Vector anchor_grad;  ///< GT-SVRG only
  std::size_t evals = 0;
};

/// Stacked state of all nodes; row i of each matrix belongs to node i.
///
/// Every round reads only the previous-round rows of neighbors (a product
/// with W), so the update is synchronous by construction. Each node owns an
/// RNG stream derived from the master seed and its index.
struct NetworkState {
  Method method = Method::dgd;
  SvrgAnchor svrg_anchor = SvrgAnchor::refresh;
  Matrix theta;
  Matrix tracker;
  Matrix estimate;
  std::vector<GradientTable> tables;
  Matrix anchor;
  Matrix anchor_grad;
  std::vector<Rng> rngs;
  std::vector<std::size_t> evals;  ///< cumulative component-gradient evaluations
  std::size_t round = 0;           ///< iterations (outer iterations for GT-SVRG)
  std::size_t exchanges = 0;       ///< neighbor communication rounds

  std::size_t nodes() const { return static_cast<std::size_t>(theta.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(theta.cols()); }
  NodeState node(std::size_t i) const;
  std::size_t total_evals() const;
};

/// Builds the initial state: theta0 (n x p) as given, trackers primed per
/// method (batch gradient for GT-DGD, one sampled gradient for GT-DSGD, the
/// SAGA estimator over a fresh table for GT-SAGA, zero for GT-SVRG).
NetworkState initialize(Method method, const FiniteSumObjective& obj, const Matrix& theta0,
                        std::uint64_t master_seed, SvrgAnchor anchor = SvrgAnchor::refresh);

void dgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha);
void dsgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha);
void gt_dgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha);
void gt_dsgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha);
void gt_saga_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha);

/// One outer loop of GT-SVRG: anchor batch gradients (m_i evaluations per
/// node), T tracked inner rounds (2 evaluations per estimator), then the
/// next outer iterate per `option`. `on_inner`, if set, sees the tracker and
/// estimator state after every inner round.
using InnerObserver = std::function<void(const NetworkState&)>;
void gt_svrg_outer(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha,
                   std::size_t T, SvrgOption option, const InnerObserver& on_inner = {});

/// SAGA estimator node i would form for local sample j at theta_i.
Vector node_saga_estimate(const FiniteSumObjective& obj, std::size_t i, std::size_t j, const Vector& theta_i,
                          const GradientTable& table);

/// SVRG estimator node i would form for local sample j at theta_i.
Vector node_svrg_estimate(const FiniteSumObjective& obj, std::size_t i, std::size_t j, const Vector& theta_i,
                          const Vector& anchor_i, const Vector& anchor_grad_i);

/// (1/n) sum_i ||theta_i - mean(theta)||^2.
double consensus_error(const NetworkState& net);

/// (1/n) sum_i ||d_i - mean(estimate)||^2; empty for methods without tracking.
std::optional<double> tracking_error(const NetworkState& net);

/// ||mean(tracker) - mean(estimate)||; zero up to rounding for every GT method.
std::optional<double> tracking_gap(const NetworkState& net);

/// Component-gradient evaluations one iteration of `method` costs at node i.
double evals_per_iteration(Method method, std::size_t m_i, std::size_t T);

}  // namespace gtopt
