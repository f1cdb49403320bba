#ifndef TMOMENT_MOMENT_SEQUENCE_HPP
#define TMOMENT_MOMENT_SEQUENCE_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmoment/monomial_set.hpp"
#include "tmoment/polynomial.hpp"

namespace tmoment {

// Raised when a moment gamma_alpha required by an operation is absent.
// Carries every offending index so callers can suggest the completion set.
class MissingMomentError : public std::runtime_error {
public:
  MissingMomentError(std::string context, std::vector<MultiIndex> missing);
  const std::vector<MultiIndex>& missing() const { return missing_; }

private:
  std::vector<MultiIndex> missing_;
};

// Map from monomials in a set C to moment values gamma_alpha.
// The zero index must be present with gamma_0 > 0 (positive total mass).
class MomentSequence {
public:
  MomentSequence(int nvars, std::map<MultiIndex, double> values);

  int nvars() const { return nvars_; }
  const MonomialSet& support() const { return support_; }
  const std::map<MultiIndex, double>& values() const { return values_; }

  bool has(const MultiIndex& alpha) const { return values_.count(alpha) > 0; }
  double at(const MultiIndex& alpha) const; // throws MissingMomentError
  double mass() const { return at(MultiIndex::zero(nvars_)); }

  // Copy with every value divided by gamma_0.
  MomentSequence rescaled_to_probability() const;
  // Copy extended by `extra` values; overlapping indices must agree to 1e-12.
  MomentSequence merged_with(const std::map<MultiIndex, double>& extra) const;
  // Copy restricted to the indices in `keep` (all must be present).
  MomentSequence restricted_to(const MonomialSet& keep) const;

private:
  int nvars_;
  MonomialSet support_;
  std::map<MultiIndex, double> values_;
};

// Atoms x_i with strictly positive weights lambda_i.
// Construction merges atoms closer than cluster_tolerance (weights summed)
// and rejects non-positive weights.
class AtomicMeasure {
public:
  static constexpr double cluster_tolerance = 1e-7;

  AtomicMeasure(std::vector<std::vector<double>> atoms, std::vector<double> weights);

  int nvars() const;
  std::size_t size() const { return atoms_.size(); }
  const std::vector<std::vector<double>>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  double total_mass() const;

private:
  std::vector<std::vector<double>> atoms_;
  std::vector<double> weights_;
};

// gamma_alpha = sum_i lambda_i * x_i^alpha for alpha in C; the brute-force
// integration oracle behind all round-trip verification.
MomentSequence moments_of_atomic(const AtomicMeasure& mu, const MonomialSet& C);

// Riesz functional: sum_alpha p_alpha gamma_alpha.
// Every monomial of p must carry a moment; no imputation of zeros.
double riesz_eval(const MomentSequence& gamma, const Polynomial& p);

} // namespace tmoment

#endif
