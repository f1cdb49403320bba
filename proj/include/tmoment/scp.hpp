#ifndef TMOMENT_SCP_HPP
#define TMOMENT_SCP_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmoment/flat_extension.hpp"

namespace tmoment {

// Index of a weight in the two-variable shift diagram.
using ShiftIndex = std::pair<int, int>; // (k1, k2)

enum class TailKind { Constant, Geometric };

// Closed-form tail for an infinite row (alpha) or column (beta) of weights.
struct WeightTail {
  bool is_alpha = true;    // alpha tails extend rows, beta tails extend columns
  int line = 0;            // row index k2 (alpha) or column index k1 (beta)
  TailKind kind = TailKind::Constant;
  double ratio = 1.0;      // geometric only
};

// Finitely many weights alpha_k (shift in the first variable) and beta_k
// (second variable), all in (0,1]. Commutativity
// beta_{k+e1} alpha_k = alpha_{k+e2} beta_k is the data invariant wherever
// all four weights exist.
class WeightFamily {
public:
  WeightFamily(std::map<ShiftIndex, double> alpha, std::map<ShiftIndex, double> beta,
               std::vector<WeightTail> tails = {});

  const std::map<ShiftIndex, double>& alpha() const { return alpha_; }
  const std::map<ShiftIndex, double>& beta() const { return beta_; }
  const std::vector<WeightTail>& tails() const { return tails_; }
  std::string extent() const;

  // Copy with tails expanded so every described row/column reaches k = upto.
  WeightFamily expanded(int upto) const;

  std::optional<double> alpha_at(int k1, int k2) const;
  std::optional<double> beta_at(int k1, int k2) const;

  double sup_alpha() const;
  double sup_beta() const;

private:
  std::map<ShiftIndex, double> alpha_, beta_;
  std::vector<WeightTail> tails_;
};

struct CommutativityReport {
  bool ok = true;
  std::vector<ShiftIndex> violations;
};

CommutativityReport commutativity_check(const WeightFamily& w, double tol = 1e-10);

// gamma_0 = 1 and gamma_k = alpha_{(0,0)}^2...alpha_{(k1-1,0)}^2 *
// beta_{(k1,0)}^2...beta_{(k1,k2-1)}^2 for all |k| <= kmax, with the
// convention gamma_{(1,0)} = alpha_{(0,0)}^2. Every requested path must
// exist; partial data is an error.
MomentSequence moments_from_weights(const WeightFamily& w, int kmax);

// Same moments, but only the indices reachable through some monotone path of
// available weights; partial families (single rows, truncated diagrams)
// yield a sparse support instead of an error.
MomentSequence sparse_moments_from_weights(const WeightFamily& w, int kmax);

struct BergerReport {
  bool subnormal_consistent = true;
  std::string failing_name;       // which matrix failed, when any
  double failing_min_eigenvalue = 0.0;
  Eigen::MatrixXd failing_matrix; // empty when consistent
};

// Necessary subnormality condition for a one-variable weight sequence at
// truncation kmax: the Hankel matrix of gamma_k(omega), the shifted Hankel,
// and the localizing matrix of norm_bound - t must all be PSD. The default
// norm_bound is max omega^2; that is only a lower estimate of ||W||^2 when
// the supremum is not attained among the supplied weights, so callers that
// know a true bound (the unit-square SCP setting has ||W||^2 <= 1) should
// pass it explicitly.
BergerReport berger_check(const std::vector<double>& omega, int kmax, double tol = 1e-9,
                          std::optional<double> norm_bound = std::nullopt);

struct ScpOptions {
  SolveOptions solve;
  int kmax = -1;          // moment truncation order; default: weight extent + 1
  double overlap_tol = 1e-8;
  double weight_floor = 1e-9;
};

struct ScpResult {
  SolveCertificate certificate;
  std::optional<WeightFamily> completed_weights;
  // lower estimates of (||T1||^2, ||T2||^2) from the supplied weights
  std::pair<double, double> norms{0.0, 0.0};
  std::vector<std::string> refusals;         // violated preconditions
  std::vector<std::string> degenerate;       // indices with vanishing mass

  bool solved() const { return refusals.empty() && certificate.representable(); }
};

// Subnormal completion via the moment pipeline: commutativity and per-line
// Berger checks first, then solve_tmp on the unit square (the sound support
// box under the bounded-by-1 weight convention), and completion weights
// alpha_k^2 = gamma_{k+e1}/gamma_k read off the measure.
ScpResult scp_solve(const WeightFamily& w, const ScpOptions& opts = {});

} // namespace tmoment

#endif
