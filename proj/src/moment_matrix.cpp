#include "tmoment/moment_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tmoment {

Constraint::Constraint(Polynomial poly, std::string label)
    : g(std::move(poly)), name(std::move(label)) {
  if (g.is_zero()) throw std::invalid_argument("Constraint: zero polynomial");
}

namespace {

std::vector<MultiIndex> unique_sorted(std::vector<MultiIndex> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

} // namespace

MomentMatrix moment_matrix(const MomentSequence& gamma, const MonomialSet& basis) {
  const auto n = basis.size();
  Eigen::MatrixXd M(n, n);
  std::vector<MultiIndex> missing;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const MultiIndex sum = basis[i] + basis[j];
      if (!gamma.has(sum)) {
        missing.push_back(sum);
        continue;
      }
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gamma.at(sum);
      M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = gamma.at(sum);
    }
  if (!missing.empty())
    throw MissingMomentError("moment_matrix", unique_sorted(std::move(missing)));
  return MomentMatrix{basis, std::move(M), gamma};
}

MomentMatrix localizing_matrix(const MomentSequence& gamma, const Constraint& g,
                               const MonomialSet& basis) {
  const auto n = basis.size();
  Eigen::MatrixXd M(n, n);
  std::vector<MultiIndex> missing;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const MultiIndex sum = basis[i] + basis[j];
      double v = 0.0;
      bool complete = true;
      for (const auto& [delta, c] : g.g.terms()) {
        const MultiIndex idx = sum + delta;
        if (!gamma.has(idx)) {
          missing.push_back(idx);
          complete = false;
          continue;
        }
        v += c * gamma.at(idx);
      }
      if (!complete) continue;
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  if (!missing.empty())
    throw MissingMomentError("localizing_matrix(" + g.name + ")", unique_sorted(std::move(missing)));
  return MomentMatrix{basis, std::move(M), gamma};
}

PsdReport psd_rank(const MomentMatrix& M, double psd_tol, double rank_tol) {
  PsdReport report;
  const Eigen::Index n = M.entries.rows();
  if (n == 0) return report; // 0x0: psd, rank 0

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M.entries);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const Eigen::MatrixXd& vecs = eig.eigenvectors();

  report.min_eigenvalue = vals.minCoeff();
  report.scale = vals.cwiseAbs().maxCoeff();
  report.is_psd = report.min_eigenvalue >= -psd_tol * std::max(1.0, report.scale);

  const double rank_threshold = rank_tol * report.scale;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(vals(k)) > rank_threshold) {
      ++report.rank;
      continue;
    }
    // null vector -> polynomial over the basis labels
    std::map<MultiIndex, double> terms;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = vecs(i, k);
      if (std::abs(c) >= 1e-10) terms.emplace(M.basis[static_cast<std::size_t>(i)], c);
    }
    report.kernel_basis.emplace_back(M.basis.nvars(), std::move(terms));
  }
  return report;
}

ConsistencyReport recursive_consistency(const MomentMatrix& M, const MomentSequence& gamma,
                                        double tol, const Tolerances& tols) {
  ConsistencyReport report;
  const PsdReport psd = psd_rank(M, tols.psd_tol, tols.rank_tol);
  const double scale = std::max(1.0, psd.scale);
  const int nvars = gamma.nvars();
  for (std::size_t k = 0; k < psd.kernel_basis.size(); ++k) {
    const Polynomial& p = psd.kernel_basis[k];
    for (int var = 0; var < nvars; ++var) {
      const Polynomial shifted = p * Polynomial::variable(nvars, var);
      for (const auto& beta : M.basis) {
        // Lambda(x_var * p * x^beta), skipped when a moment is unavailable
        double value = 0.0;
        bool available = true;
        for (const auto& [alpha, c] : shifted.terms()) {
          const MultiIndex idx = alpha + beta;
          if (!gamma.has(idx)) {
            available = false;
            break;
          }
          value += c * gamma.at(idx);
        }
        if (!available) {
          ++report.untested;
          continue;
        }
        if (std::abs(value) > tol * scale) {
          report.consistent = false;
          report.violations.push_back({k, var, beta, value});
        }
      }
    }
  }
  return report;
}

bool smulyan_check(const MomentMatrix& M_big, int split, double tol) {
  const Eigen::Index n = M_big.entries.rows();
  if (split < 0 || split > n) throw std::invalid_argument("smulyan_check: bad split");
  const Eigen::Index r = split, c = n - split;
  if (c == 0) return true; // no tail blocks, conditions hold vacuously
  const Eigen::MatrixXd A = M_big.entries.topLeftCorner(r, r);
  const Eigen::MatrixXd B = M_big.entries.topRightCorner(r, c);
  const Eigen::MatrixXd C = M_big.entries.bottomRightCorner(c, c);

  const double scale = std::max(1.0, M_big.entries.cwiseAbs().maxCoeff());
  Eigen::MatrixXd W;
  if (r == 0) {
    W = Eigen::MatrixXd::Zero(0, c);
  } else {
    W = A.completeOrthogonalDecomposition().solve(B); // minimum-norm
    if ((A * W - B).cwiseAbs().maxCoeff() > tol * scale) return false;
  }
  const Eigen::MatrixXd schur = C - W.transpose() * A * W;
  if (schur.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur);
  return eig.eigenvalues().minCoeff() >= -tol * scale;
}

namespace {

// Greedy growth of a downward-closed basis keeping `usable` satisfied.
MonomialSet grow_basis(const MomentSequence& gamma,
                       const std::function<bool(const MultiIndex&)>& usable) {
  const int nvars = gamma.nvars();
  std::vector<MultiIndex> basis{MultiIndex::zero(nvars)};
  if (!usable(basis.front() + basis.front())) return MonomialSet(nvars, {});
  bool grew = true;
  while (grew) {
    grew = false;
    MonomialSet current(nvars, basis);
    for (const auto& cand : border(current)) {
      bool closed = true;
      for (int i = 0; i < nvars && closed; ++i)
        if (cand[i] > 0 && !current.contains(cand.predecessor(i))) closed = false;
      if (!closed) continue;
      bool sums_ok = usable(cand + cand);
      for (const auto& alpha : current)
        if (!(sums_ok = sums_ok && usable(alpha + cand))) break;
      if (!sums_ok) continue;
      basis.push_back(cand);
      grew = true;
      break; // restart the scan from the enlarged set
    }
  }
  return MonomialSet(nvars, std::move(basis));
}

} // namespace

MonomialSet max_matrix_basis(const MomentSequence& gamma) {
  return grow_basis(gamma, [&](const MultiIndex& idx) { return gamma.has(idx); });
}

MonomialSet max_localizing_basis(const MomentSequence& gamma, const Constraint& g) {
  return grow_basis(gamma, [&](const MultiIndex& idx) {
    for (const auto& [delta, c] : g.g.terms()) {
      (void)c;
      if (!gamma.has(idx + delta)) return false;
    }
    return true;
  });
}

} // namespace tmoment
