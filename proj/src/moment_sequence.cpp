#include "tmoment/moment_sequence.hpp"

#include <cmath>
#include <sstream>

namespace tmoment {

namespace {

std::string join_indices(const std::vector<MultiIndex>& indices) {
  std::ostringstream out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out << ", ";
    out << indices[i].to_string();
  }
  return out.str();
}

} // namespace

MissingMomentError::MissingMomentError(std::string context, std::vector<MultiIndex> missing)
    : std::runtime_error(context + ": missing moment(s) " + join_indices(missing)),
      missing_(std::move(missing)) {}

MomentSequence::MomentSequence(int nvars, std::map<MultiIndex, double> values)
    : nvars_(nvars), support_(nvars), values_(std::move(values)) {
  std::vector<MultiIndex> indices;
  indices.reserve(values_.size());
  for (const auto& [alpha, v] : values_) {
    (void)v;
    if (alpha.nvars() != nvars_)
      throw std::invalid_argument("MomentSequence: index has wrong nvars");
    indices.push_back(alpha);
  }
  support_ = MonomialSet(nvars_, std::move(indices));
  const MultiIndex one = MultiIndex::zero(nvars_);
  auto it = values_.find(one);
  if (it == values_.end())
    throw MissingMomentError("MomentSequence", {one});
  if (!(it->second > 0.0))
    throw std::invalid_argument("MomentSequence: gamma_0 must be positive");
}

double MomentSequence::at(const MultiIndex& alpha) const {
  auto it = values_.find(alpha);
  if (it == values_.end()) throw MissingMomentError("riesz functional", {alpha});
  return it->second;
}

MomentSequence MomentSequence::rescaled_to_probability() const {
  const double g0 = mass();
  std::map<MultiIndex, double> scaled;
  for (const auto& [alpha, v] : values_) scaled.emplace(alpha, v / g0);
  return MomentSequence(nvars_, std::move(scaled));
}

MomentSequence MomentSequence::merged_with(const std::map<MultiIndex, double>& extra) const {
  std::map<MultiIndex, double> merged = values_;
  for (const auto& [alpha, v] : extra) {
    auto [it, inserted] = merged.emplace(alpha, v);
    if (!inserted && std::abs(it->second - v) > 1e-12 * std::max(1.0, std::abs(it->second)))
      throw std::invalid_argument("MomentSequence: conflicting value for " + alpha.to_string());
  }
  return MomentSequence(nvars_, std::move(merged));
}

MomentSequence MomentSequence::restricted_to(const MonomialSet& keep) const {
  std::map<MultiIndex, double> kept;
  std::vector<MultiIndex> missing;
  for (const auto& alpha : keep) {
    auto it = values_.find(alpha);
    if (it == values_.end())
      missing.push_back(alpha);
    else
      kept.emplace(alpha, it->second);
  }
  if (!missing.empty()) throw MissingMomentError("restriction", std::move(missing));
  return MomentSequence(nvars_, std::move(kept));
}

AtomicMeasure::AtomicMeasure(std::vector<std::vector<double>> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size())
    throw std::invalid_argument("AtomicMeasure: atoms/weights length mismatch");
  for (const auto& x : atoms)
    if (x.size() != atoms.front().size())
      throw std::invalid_argument("AtomicMeasure: atoms of unequal dimension");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("AtomicMeasure: weights must be positive");

  // merge near-duplicates produced by eigenvalue clustering
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    bool merged = false;
    for (std::size_t j = 0; j < atoms_.size(); ++j) {
      double dist2 = 0.0;
      for (std::size_t k = 0; k < atoms[i].size(); ++k) {
        const double d = atoms[i][k] - atoms_[j][k];
        dist2 += d * d;
      }
      if (std::sqrt(dist2) <= cluster_tolerance) {
        weights_[j] += weights[i];
        merged = true;
        break;
      }
    }
    if (!merged) {
      atoms_.push_back(atoms[i]);
      weights_.push_back(weights[i]);
    }
  }
}

int AtomicMeasure::nvars() const {
  return atoms_.empty() ? 0 : static_cast<int>(atoms_.front().size());
}

double AtomicMeasure::total_mass() const {
  double m = 0.0;
  for (double w : weights_) m += w;
  return m;
}

MomentSequence moments_of_atomic(const AtomicMeasure& mu, const MonomialSet& C) {
  if (mu.size() > 0 && mu.nvars() != C.nvars())
    throw std::invalid_argument("moments_of_atomic: dimension mismatch");
  std::map<MultiIndex, double> values;
  for (const auto& alpha : C) {
    double g = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      g += mu.weights()[i] * eval_monomial(alpha, mu.atoms()[i]);
    values.emplace(alpha, g);
  }
  return MomentSequence(C.nvars(), std::move(values));
}

double riesz_eval(const MomentSequence& gamma, const Polynomial& p) {
  if (p.nvars() != gamma.nvars())
    throw std::invalid_argument("riesz_eval: nvars mismatch");
  double sum = 0.0;
  for (const auto& [alpha, c] : p.terms()) sum += c * gamma.at(alpha);
  return sum;
}

} // namespace tmoment
