#include "tmoment/flat_extension.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "tmoment/dominating.hpp"

namespace tmoment {

namespace {

std::string format_value(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

} // namespace

bool is_flat(const MomentMatrix& M_small, const MomentMatrix& M_big, double rank_tol) {
  if (!M_small.basis.is_prefix_of(M_big.basis))
    throw std::invalid_argument("is_flat: bases are not nested as a prefix");
  const PsdReport small = psd_rank(M_small, Tolerances{}.psd_tol, rank_tol);
  const PsdReport big = psd_rank(M_big, Tolerances{}.psd_tol, rank_tol);
  return small.rank == big.rank;
}

std::string to_string(ExtensionStage stage) {
  switch (stage) {
    case ExtensionStage::None: return "none";
    case ExtensionStage::RangeCondition: return "range condition";
    case ExtensionStage::StructureDrift: return "structure projection drift";
    case ExtensionStage::PsdLost: return "extension not PSD";
    case ExtensionStage::FlatnessLost: return "flatness lost";
    case ExtensionStage::ConsistencyLost: return "extension inconsistent";
  }
  return "unknown";
}

std::string to_string(SolveVerdict verdict) {
  switch (verdict) {
    case SolveVerdict::Representable: return "Representable";
    case SolveVerdict::PsdFailure: return "PsdFailure";
    case SolveVerdict::LocalizingFailure: return "LocalizingFailure";
    case SolveVerdict::ConsistencyFailure: return "ConsistencyFailure";
    case SolveVerdict::DepthExhausted: return "DepthExhausted";
  }
  return "unknown";
}

namespace {

struct Cell {
  Eigen::Index i, j;
};

// Flat completion over extended = principal u new_monomials: unknown moments
// x must put the new columns in range(M) and close the Smul'jan tail,
//   (I - P) B(x) = 0   and   C(x) - B(x)^T M^+ B(x) = 0,
// with every moment index a single unknown shared across matrix cells.
class CompletionAttempt {
public:
  CompletionAttempt(const MomentSequence& gamma, const MonomialSet& principal,
                    const MonomialSet& extended, const Tolerances& tols)
      : gamma_(gamma), principal_(principal), extended_(extended) {
    for (const auto& alpha : extended_)
      if (!principal_.contains(alpha)) new_monomials_.push_back(alpha);
    nc_ = static_cast<Eigen::Index>(principal_.size());
    nd_ = static_cast<Eigen::Index>(new_monomials_.size());

    M_ = moment_matrix(gamma_, principal_).entries;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M_);
    scale_ = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    const double rank_threshold = tols.rank_tol * eig.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < nc_; ++k)
      if (std::abs(eig.eigenvalues()(k)) > rank_threshold) kept.push_back(k);
    rank_ = static_cast<int>(kept.size());
    Eigen::MatrixXd Vr(nc_, static_cast<Eigen::Index>(kept.size()));
    Eigen::VectorXd inv_vals(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
      Vr.col(static_cast<Eigen::Index>(k)) = eig.eigenvectors().col(kept[k]);
      inv_vals(static_cast<Eigen::Index>(k)) = 1.0 / eig.eigenvalues()(kept[k]);
    }
    range_projector_ = Vr * Vr.transpose();
    pinv_ = Vr * inv_vals.asDiagonal() * Vr.transpose();

    // collect unknown indices and their matrix cells
    B_known_ = Eigen::MatrixXd::Zero(nc_, nd_);
    C_known_ = Eigen::MatrixXd::Zero(nd_, nd_);
    std::map<MultiIndex, std::size_t> unknown_pos;
    auto unknown_id = [&](const MultiIndex& idx) {
      auto [it, inserted] = unknown_pos.emplace(idx, unknowns_.size());
      if (inserted) {
        unknowns_.push_back(idx);
        b_cells_.emplace_back();
        c_cells_.emplace_back();
      }
      return it->second;
    };
    for (Eigen::Index i = 0; i < nc_; ++i)
      for (Eigen::Index j = 0; j < nd_; ++j) {
        const MultiIndex idx = principal_[static_cast<std::size_t>(i)] +
                               new_monomials_[static_cast<std::size_t>(j)];
        if (gamma_.has(idx))
          B_known_(i, j) = gamma_.at(idx);
        else
          b_cells_[unknown_id(idx)].push_back({i, j});
      }
    for (Eigen::Index i = 0; i < nd_; ++i)
      for (Eigen::Index j = i; j < nd_; ++j) {
        const MultiIndex idx = new_monomials_[static_cast<std::size_t>(i)] +
                               new_monomials_[static_cast<std::size_t>(j)];
        if (gamma_.has(idx)) {
          C_known_(i, j) = gamma_.at(idx);
          C_known_(j, i) = gamma_.at(idx);
        } else {
          c_cells_[unknown_id(idx)].push_back({i, j});
        }
      }
  }

  Eigen::Index unknown_count() const { return static_cast<Eigen::Index>(unknowns_.size()); }
  double scale() const { return scale_; }
  int rank() const { return rank_; }

  Eigen::MatrixXd assemble_B(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd B = B_known_;
    for (std::size_t u = 0; u < unknowns_.size(); ++u)
      for (const Cell& cell : b_cells_[u]) B(cell.i, cell.j) = x(static_cast<Eigen::Index>(u));
    return B;
  }

  Eigen::MatrixXd assemble_C(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd C = C_known_;
    for (std::size_t u = 0; u < unknowns_.size(); ++u)
      for (const Cell& cell : c_cells_[u]) {
        C(cell.i, cell.j) = x(static_cast<Eigen::Index>(u));
        C(cell.j, cell.i) = x(static_cast<Eigen::Index>(u));
      }
    return C;
  }

  // residual layout: [vec range | upper-triangular Schur]
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd B = assemble_B(x);
    const Eigen::MatrixXd C = assemble_C(x);
    const Eigen::MatrixXd G = B - range_projector_ * B;
    const Eigen::MatrixXd S = C - B.transpose() * pinv_ * B;
    Eigen::VectorXd r(residual_size());
    Eigen::Index at = 0;
    for (Eigen::Index j = 0; j < nd_; ++j)
      for (Eigen::Index i = 0; i < nc_; ++i) r(at++) = G(i, j);
    for (Eigen::Index i = 0; i < nd_; ++i)
      for (Eigen::Index j = i; j < nd_; ++j) r(at++) = S(i, j);
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd B = assemble_B(x);
    const Eigen::MatrixXd W = pinv_ * B;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(residual_size(), unknown_count());
    for (std::size_t u = 0; u < unknowns_.size(); ++u) {
      Eigen::MatrixXd dG = Eigen::MatrixXd::Zero(nc_, nd_);
      Eigen::MatrixXd dS = Eigen::MatrixXd::Zero(nd_, nd_);
      for (const Cell& cell : b_cells_[u]) {
        dG.col(cell.j) += Eigen::MatrixXd::Identity(nc_, nc_).col(cell.i) -
                          range_projector_.col(cell.i);
        // d(B^T M^+ B) for a unit bump at (i,j): e_j W.row(i) + its transpose
        dS.row(cell.j) -= W.row(cell.i);
        dS.col(cell.j) -= W.row(cell.i).transpose();
      }
      for (const Cell& cell : c_cells_[u]) {
        dS(cell.i, cell.j) += 1.0;
        if (cell.i != cell.j) dS(cell.j, cell.i) += 1.0;
      }
      Eigen::Index at = 0;
      for (Eigen::Index j = 0; j < nd_; ++j)
        for (Eigen::Index i = 0; i < nc_; ++i) J(at++, static_cast<Eigen::Index>(u)) = dG(i, j);
      for (Eigen::Index i = 0; i < nd_; ++i)
        for (Eigen::Index j = i; j < nd_; ++j) J(at++, static_cast<Eigen::Index>(u)) = dS(i, j);
    }
    return J;
  }

  // Gauss-Newton with backtracking; returns the final residual norm.
  double gauss_newton(Eigen::VectorXd& x, int max_iters) const {
    double norm = residual(x).norm();
    for (int iter = 0; iter < max_iters; ++iter) {
      if (norm <= 1e-13 * scale_) break;
      const Eigen::VectorXd r = residual(x);
      const Eigen::MatrixXd J = jacobian(x);
      const Eigen::VectorXd dx = J.completeOrthogonalDecomposition().solve(-r);
      double t = 1.0;
      bool stepped = false;
      while (t >= 1e-7) {
        const double cand = residual(x + t * dx).norm();
        if (cand < norm * (1.0 - 1e-4 * t) || cand < 1e-14 * scale_) {
          x += t * dx;
          norm = cand;
          stepped = true;
          break;
        }
        t /= 2.0;
      }
      if (!stepped) break;
    }
    return norm;
  }

  // seed: B-block unknowns from the linear range condition, then the
  // Schur values for the C-block cells
  Eigen::VectorXd seed() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(unknown_count());
    // linear least squares on the range rows only
    std::vector<std::size_t> b_unknowns;
    for (std::size_t u = 0; u < unknowns_.size(); ++u)
      if (!b_cells_[u].empty()) b_unknowns.push_back(u);
    if (!b_unknowns.empty()) {
      const Eigen::Index rows = nc_ * nd_;
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(b_unknowns.size()));
      const Eigen::MatrixXd G0 = B_known_ - range_projector_ * B_known_;
      Eigen::VectorXd rhs(rows);
      Eigen::Index at = 0;
      for (Eigen::Index j = 0; j < nd_; ++j)
        for (Eigen::Index i = 0; i < nc_; ++i) rhs(at++) = -G0(i, j);
      for (std::size_t k = 0; k < b_unknowns.size(); ++k) {
        Eigen::MatrixXd dG = Eigen::MatrixXd::Zero(nc_, nd_);
        for (const Cell& cell : b_cells_[b_unknowns[k]])
          dG.col(cell.j) += Eigen::MatrixXd::Identity(nc_, nc_).col(cell.i) -
                            range_projector_.col(cell.i);
        at = 0;
        for (Eigen::Index j = 0; j < nd_; ++j)
          for (Eigen::Index i = 0; i < nc_; ++i) A(at++, static_cast<Eigen::Index>(k)) = dG(i, j);
      }
      const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(rhs);
      for (std::size_t k = 0; k < b_unknowns.size(); ++k)
        x(static_cast<Eigen::Index>(b_unknowns[k])) = sol(static_cast<Eigen::Index>(k));
    }
    // fill C-block unknowns from the Schur product of the seeded B
    const Eigen::MatrixXd B = assemble_B(x);
    const Eigen::MatrixXd S = B.transpose() * pinv_ * B;
    for (std::size_t u = 0; u < unknowns_.size(); ++u) {
      if (c_cells_[u].empty() || !b_cells_[u].empty()) continue;
      double mean = 0.0;
      for (const Cell& cell : c_cells_[u]) mean += S(cell.i, cell.j);
      x(static_cast<Eigen::Index>(u)) = mean / static_cast<double>(c_cells_[u].size());
    }
    return x;
  }

  // orthonormal basis of the Jacobian's null space at x (the local degrees
  // of freedom of the completion manifold)
  Eigen::MatrixXd null_basis(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd J = jacobian(x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    const Eigen::Index nu = unknown_count();
    const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    const double threshold = std::max(1e-12, 1e-8 * smax);
    std::vector<Eigen::Index> dirs;
    for (Eigen::Index k = 0; k < nu; ++k) {
      const double sv = k < svd.singularValues().size() ? svd.singularValues()(k) : 0.0;
      if (sv <= threshold) dirs.push_back(k);
    }
    Eigen::MatrixXd N(nu, static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t k = 0; k < dirs.size(); ++k)
      N.col(static_cast<Eigen::Index>(k)) = svd.matrixV().col(dirs[k]);
    return N;
  }

  // The minimum-norm-W member of the completion family: W depends only on
  // the B-block unknowns and linearly so, hence an exact least-squares
  // problem over the free B directions (null space of the range condition).
  // C-block-only unknowns are refilled from the Smul'jan product afterwards.
  Eigen::VectorXd minimize_w(Eigen::VectorXd x) const {
    std::vector<std::size_t> b_idx;
    for (std::size_t u = 0; u < unknowns_.size(); ++u)
      if (!b_cells_[u].empty()) b_idx.push_back(u);
    if (b_idx.empty()) return x;

    const Eigen::Index rows = nc_ * nd_;
    Eigen::MatrixXd R(rows, static_cast<Eigen::Index>(b_idx.size()));
    for (std::size_t k = 0; k < b_idx.size(); ++k) {
      Eigen::MatrixXd dG = Eigen::MatrixXd::Zero(nc_, nd_);
      for (const Cell& cell : b_cells_[b_idx[k]])
        dG.col(cell.j) += Eigen::MatrixXd::Identity(nc_, nc_).col(cell.i) -
                          range_projector_.col(cell.i);
      R.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(dG.data(), dG.size());
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullV);
    const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    const double threshold = std::max(1e-12, 1e-8 * smax);
    std::vector<Eigen::Index> free_dirs;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(b_idx.size()); ++k) {
      const double sv = k < svd.singularValues().size() ? svd.singularValues()(k) : 0.0;
      if (sv <= threshold) free_dirs.push_back(k);
    }
    if (!free_dirs.empty()) {
      const Eigen::MatrixXd W0 = pinv_ * assemble_B(x);
      Eigen::MatrixXd A(W0.size(), static_cast<Eigen::Index>(free_dirs.size()));
      for (std::size_t d = 0; d < free_dirs.size(); ++d) {
        Eigen::MatrixXd dB = Eigen::MatrixXd::Zero(nc_, nd_);
        for (std::size_t k = 0; k < b_idx.size(); ++k)
          for (const Cell& cell : b_cells_[b_idx[k]])
            dB(cell.i, cell.j) += svd.matrixV()(static_cast<Eigen::Index>(k), free_dirs[d]);
        const Eigen::MatrixXd dW = pinv_ * dB;
        A.col(static_cast<Eigen::Index>(d)) =
            Eigen::Map<const Eigen::VectorXd>(dW.data(), dW.size());
      }
      const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(W0.data(), W0.size());
      const Eigen::VectorXd z = A.completeOrthogonalDecomposition().solve(rhs);
      for (std::size_t d = 0; d < free_dirs.size(); ++d)
        for (std::size_t k = 0; k < b_idx.size(); ++k)
          x(static_cast<Eigen::Index>(b_idx[k])) +=
              svd.matrixV()(static_cast<Eigen::Index>(k), free_dirs[d]) *
              z(static_cast<Eigen::Index>(d));
    }

    // refill pure C-block unknowns from the Smul'jan tail of the new B
    const Eigen::MatrixXd B = assemble_B(x);
    const Eigen::MatrixXd S = B.transpose() * pinv_ * B;
    for (std::size_t u = 0; u < unknowns_.size(); ++u) {
      if (c_cells_[u].empty() || !b_cells_[u].empty()) continue;
      double mean = 0.0;
      for (const Cell& cell : c_cells_[u]) mean += S(cell.i, cell.j);
      x(static_cast<Eigen::Index>(u)) = mean / static_cast<double>(c_cells_[u].size());
    }
    return x;
  }

  std::pair<double, double> block_residuals(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd B = assemble_B(x);
    const Eigen::MatrixXd C = assemble_C(x);
    const double range = nd_ == 0 ? 0.0 : (B - range_projector_ * B).cwiseAbs().maxCoeff();
    const double schur =
        nd_ == 0 ? 0.0 : (C - B.transpose() * pinv_ * B).cwiseAbs().maxCoeff();
    return {range, schur};
  }

  std::optional<std::size_t> unknown_position(const MultiIndex& index) const {
    // encounter order, not sorted
    auto it = std::find(unknowns_.begin(), unknowns_.end(), index);
    if (it == unknowns_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - unknowns_.begin());
  }

  std::map<MultiIndex, double> solution_values(const Eigen::VectorXd& x) const {
    std::map<MultiIndex, double> values;
    for (std::size_t u = 0; u < unknowns_.size(); ++u)
      values.emplace(unknowns_[u], x(static_cast<Eigen::Index>(u)));
    return values;
  }

private:
  Eigen::Index residual_size() const { return nc_ * nd_ + nd_ * (nd_ + 1) / 2; }

  const MomentSequence& gamma_;
  MonomialSet principal_;
  MonomialSet extended_;
  std::vector<MultiIndex> new_monomials_;
  Eigen::Index nc_ = 0, nd_ = 0;
  Eigen::MatrixXd M_, range_projector_, pinv_;
  Eigen::MatrixXd B_known_, C_known_;
  double scale_ = 1.0;
  int rank_ = 0;
  std::vector<MultiIndex> unknowns_;
  std::vector<std::vector<Cell>> b_cells_, c_cells_;
};

// Smallest localizing margin of the completed data; used to steer
// underdetermined completions toward solutions supported in K_S.
double constraint_margin(const MomentSequence& gamma_ext,
                         const std::vector<Constraint>& constraints, const Tolerances& tols) {
  double margin = 0.0;
  bool any = false;
  for (const auto& g : constraints) {
    const MonomialSet basis = max_localizing_basis(gamma_ext, g);
    if (basis.empty()) continue;
    const MomentMatrix L = localizing_matrix(gamma_ext, g, basis);
    const PsdReport rep = psd_rank(L, tols.psd_tol, tols.rank_tol);
    const double m = rep.min_eigenvalue / std::max(1.0, rep.scale);
    margin = any ? std::min(margin, m) : m;
    any = true;
  }
  return any ? margin : 0.0;
}

ExtensionResult attempt_completion(const MomentSequence& gamma, const MonomialSet& principal,
                                   const MonomialSet& extended, const FlatExtensionOptions& opts,
                                   int step) {
  ExtensionResult result;
  result.principal = principal;
  result.steps_used = step;

  CompletionAttempt attempt(gamma, principal, extended, opts.tols);
  Eigen::VectorXd x = attempt.seed();
  attempt.gauss_newton(x, 80);

  // underdetermined completions form a family; take its minimum-norm-W
  // member as the canonical representative (far-flung spurious atoms come
  // from large W)
  if (attempt.unknown_count() > 0) {
    const double residual_cap = opts.tol * attempt.scale();
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd cand = attempt.minimize_w(x);
      attempt.gauss_newton(cand, 60);
      auto [range, schur] = attempt.block_residuals(cand);
      if (std::max(range, schur) > residual_cap) break;
      if ((cand - x).cwiseAbs().maxCoeff() < 1e-14) {
        x = cand;
        break;
      }
      x = cand;
    }
  }

  // steer remaining freedom toward positive localizing margins
  if (!opts.margin_constraints.empty() && attempt.unknown_count() > 0) {
    const double residual_cap = opts.tol * attempt.scale();
    auto margin_of = [&](const Eigen::VectorXd& cand) {
      auto [range, schur] = attempt.block_residuals(cand);
      if (std::max(range, schur) > residual_cap) return -1e100;
      try {
        const MomentSequence cand_ext = gamma.merged_with(attempt.solution_values(cand));
        const MomentMatrix m_ext = moment_matrix(cand_ext, extended);
        const PsdReport rep = psd_rank(m_ext, opts.tols.psd_tol, opts.tols.rank_tol);
        if (rep.min_eigenvalue < -opts.tols.psd_tol * std::max(1.0, rep.scale)) return -1e100;
        return constraint_margin(cand_ext, opts.margin_constraints, opts.tols);
      } catch (const std::exception&) {
        return -1e100;
      }
    };

    // ascent direction for the worst localizing margin: the eigenvector v of
    // its smallest eigenvalue gives d lambda_min / d gamma_u = v^T dL v
    auto margin_gradient = [&](const Eigen::VectorXd& cand) -> Eigen::VectorXd {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(attempt.unknown_count());
      try {
        const MomentSequence cand_ext = gamma.merged_with(attempt.solution_values(cand));
        double worst = 1e100;
        for (const auto& g : opts.margin_constraints) {
          const MonomialSet basis = max_localizing_basis(cand_ext, g);
          if (basis.empty()) continue;
          const MomentMatrix L = localizing_matrix(cand_ext, g, basis);
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L.entries);
          const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
          const double margin = eig.eigenvalues()(0) / scale;
          if (margin >= worst) continue;
          worst = margin;
          grad.setZero();
          const Eigen::VectorXd v = eig.eigenvectors().col(0);
          for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j)
              for (const auto& [delta, c] : g.g.terms()) {
                const auto u = attempt.unknown_position(basis[i] + basis[j] + delta);
                if (u) grad(static_cast<Eigen::Index>(*u)) +=
                    v(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(j)) * c / scale;
              }
        }
      } catch (const std::exception&) {
        grad.setZero();
      }
      return grad;
    };

    // hill climb on the completion manifold: projected subgradient steps for
    // the active constraint, with a compass sweep as fallback; the margin is
    // a min of concave spectral functions, so climbing finds its maximizer
    double best = margin_of(x);
    double stride = 0.5 * std::max(1.0, x.cwiseAbs().maxCoeff());
    int evals_left = 700;
    while (stride > 1e-10 && evals_left > 0 && best < 0.0) {
      const Eigen::MatrixXd N = attempt.null_basis(x);
      if (N.cols() == 0) break;
      bool improved = false;

      const Eigen::VectorXd raw = margin_gradient(x);
      if (raw.norm() > 1e-14) {
        Eigen::VectorXd d = N * (N.transpose() * raw);
        if (d.norm() > 1e-14) {
          d.normalize();
          for (double t = stride; t > stride * 1e-4; t /= 4.0) {
            if (--evals_left <= 0) break;
            Eigen::VectorXd cand = x + t * d;
            attempt.gauss_newton(cand, 10); // back onto the manifold
            const double m = margin_of(cand);
            if (m > best + 1e-15) {
              x = cand;
              best = m;
              improved = true;
              break;
            }
          }
        }
      }

      if (!improved) {
        for (Eigen::Index dir = 0; dir < N.cols() && !improved; ++dir)
          for (double sign : {1.0, -1.0}) {
            if (--evals_left <= 0) break;
            Eigen::VectorXd cand = x + sign * stride * N.col(dir);
            attempt.gauss_newton(cand, 10);
            const double m = margin_of(cand);
            if (m > best + 1e-15) {
              x = cand;
              best = m;
              improved = true;
              break;
            }
          }
      }
      if (!improved) stride /= 2.0;
    }
  }

  const auto [range_residual, schur_residual] = attempt.block_residuals(x);
  const double bound = opts.tol * attempt.scale();
  if (range_residual > bound) {
    result.failed_stage = ExtensionStage::RangeCondition;
    result.message = "range residual " + format_value(range_residual) + " exceeds " +
                     format_value(bound);
    return result;
  }
  if (schur_residual > bound) {
    result.failed_stage = ExtensionStage::StructureDrift;
    result.message = "structure residual " + format_value(schur_residual) + " exceeds " +
                     format_value(bound);
    return result;
  }

  MomentSequence gamma_ext = gamma.merged_with(attempt.solution_values(x));
  MomentMatrix m_ext = moment_matrix(gamma_ext, extended);
  const PsdReport rep = psd_rank(m_ext, opts.tols.psd_tol, opts.tols.rank_tol);
  if (!rep.is_psd) {
    result.failed_stage = ExtensionStage::PsdLost;
    result.message = "extended matrix min eigenvalue " + format_value(rep.min_eigenvalue);
    return result;
  }
  if (rep.rank != attempt.rank()) {
    result.failed_stage = ExtensionStage::FlatnessLost;
    result.message = "rank grew from " + std::to_string(attempt.rank()) + " to " +
                     std::to_string(rep.rank);
    return result;
  }
  const ConsistencyReport cons =
      recursive_consistency(m_ext, gamma_ext, opts.consistency_tol, opts.tols);
  if (!cons.consistent) {
    const auto& v = cons.violations.front();
    result.failed_stage = ExtensionStage::ConsistencyLost;
    result.message = "kernel relation fails to propagate: Lambda(x_" +
                     std::to_string(v.variable + 1) + " * p_" + std::to_string(v.kernel_index) +
                     " * " + v.shift.to_string() + ") = " + format_value(v.value);
    return result;
  }

  result.ok = true;
  result.rank = rep.rank;
  result.extended = std::move(gamma_ext);
  result.m_ext = std::move(m_ext);
  return result;
}

} // namespace

ExtensionResult build_flat_extension(const MomentSequence& gamma, const MonomialSet& basis,
                                     const FlatExtensionOptions& opts) {
  if (basis.empty()) throw std::invalid_argument("build_flat_extension: empty basis");
  ExtensionResult last;
  MonomialSet extended = basis;
  for (int step = 1; step <= std::max(1, opts.depth); ++step) {
    extended = closure(extended);
    last = attempt_completion(gamma, basis, extended, opts, step);
    if (last.ok) return last;
  }
  return last;
}

ExtensionResult build_flat_extension(const MomentSequence& gamma, const MonomialSet& basis,
                                     int depth, double tol) {
  FlatExtensionOptions opts;
  opts.depth = depth;
  opts.tol = tol;
  return build_flat_extension(gamma, basis, opts);
}

SolveCertificate solve_tmp(const MomentSequence& gamma, const MonomialSet& C,
                           const std::vector<Constraint>& constraints,
                           const SolveOptions& opts) {
  if (C.empty()) throw std::invalid_argument("solve_tmp: empty monomial set");
  if (C.nvars() != gamma.nvars()) throw std::invalid_argument("solve_tmp: nvars mismatch");
  {
    std::vector<MultiIndex> missing;
    for (const auto& alpha : C)
      if (!gamma.has(alpha)) missing.push_back(alpha);
    if (!missing.empty()) throw MissingMomentError("solve_tmp", std::move(missing));
  }

  SolveCertificate cert;
  const int nvars = gamma.nvars();
  if (!C.contains(MultiIndex::zero(nvars)))
    cert.warnings.push_back("the monomial 1 is not in the data set");
  else if (!is_connected(C))
    cert.warnings.push_back("the monomial set is not connected");
  cert.notes.push_back(
      "whether the extension space generates the full polynomial algebra cannot be "
      "checked from finite data");

  int max_degree = 1;
  for (const auto& alpha : C) max_degree = std::max(max_degree, alpha.degree());
  cert.dominating_poly = dominate_space(max_degree, nvars);

  const double g0 = gamma.mass();
  const MomentSequence work = opts.probability ? gamma.rescaled_to_probability() : gamma;

  const MonomialSet basis = max_matrix_basis(work);
  cert.matrix_basis = basis;
  const MomentMatrix M = moment_matrix(work, basis);
  const PsdReport psd = psd_rank(M, opts.tols.psd_tol, opts.tols.rank_tol);
  cert.rank = psd.rank;
  if (!psd.is_psd) {
    cert.verdict = SolveVerdict::PsdFailure;
    cert.witness = "moment matrix min eigenvalue " + format_value(psd.min_eigenvalue);
    return cert;
  }

  for (const auto& g : constraints) {
    const MonomialSet lbasis = max_localizing_basis(work, g);
    if (lbasis.empty()) {
      cert.notes.push_back("constraint " + g.name + " untested: no moments for its localizing matrix");
      continue;
    }
    const MomentMatrix L = localizing_matrix(work, g, lbasis);
    const PsdReport lpsd = psd_rank(L, opts.tols.psd_tol, opts.tols.rank_tol);
    if (!lpsd.is_psd) {
      cert.verdict = SolveVerdict::LocalizingFailure;
      cert.witness = "localizing matrix for " + g.name + " has min eigenvalue " +
                     format_value(lpsd.min_eigenvalue);
      return cert;
    }
  }

  const ConsistencyReport cons = recursive_consistency(M, work, opts.consistency_tol, opts.tols);
  if (!cons.consistent) {
    const auto& v = cons.violations.front();
    cert.verdict = SolveVerdict::ConsistencyFailure;
    cert.witness = "kernel relation fails to propagate: Lambda(x_" + std::to_string(v.variable + 1) +
                   " * p_" + std::to_string(v.kernel_index) + " * " + v.shift.to_string() +
                   ") = " + format_value(v.value);
    return cert;
  }

  FlatExtensionOptions fopts;
  fopts.depth = opts.depth;
  fopts.tol = opts.extension_tol;
  fopts.tols = opts.tols;
  fopts.consistency_tol = opts.consistency_tol;
  fopts.margin_constraints = constraints;
  const ExtensionResult ext = build_flat_extension(work, basis, fopts);
  if (!ext.ok) {
    cert.verdict = SolveVerdict::DepthExhausted;
    cert.witness = "no flat extension within depth " + std::to_string(opts.depth) + " (" +
                   to_string(ext.failed_stage) + ": " + ext.message + ")";
    return cert;
  }

  AtomicMeasure measure({}, {});
  try {
    const MultiplicationSystem sys =
        build_multiplication_system(*ext.m_ext, basis, opts.tols.rank_tol);
    measure = extract_atoms(sys, *ext.extended, opts.extraction);
  } catch (const ExtractionError& err) {
    cert.verdict = SolveVerdict::DepthExhausted;
    cert.witness = std::string("extraction failed: ") + err.what();
    return cert;
  }

  if (opts.probability && g0 != 1.0) {
    std::vector<double> weights = measure.weights();
    for (double& w : weights) w *= g0;
    measure = AtomicMeasure(measure.atoms(), std::move(weights));
  }

  for (std::size_t i = 0; i < measure.size(); ++i)
    for (const auto& g : constraints) {
      const double value = g.g.eval(measure.atoms()[i]);
      if (value < -opts.extraction.point_tol) {
        cert.verdict = SolveVerdict::LocalizingFailure;
        std::ostringstream w;
        w << "extracted atom " << i << " violates " << g.name << ": g(atom) = "
          << format_value(value);
        cert.witness = w.str();
        return cert;
      }
    }

  const RepresentationCheck check = verify_representation(gamma, measure, C, opts.residual_tol);
  cert.residual = check.max_residual;
  if (!check.ok) {
    cert.verdict = SolveVerdict::DepthExhausted;
    cert.witness =
        "recovered measure misses the data: max residual " + format_value(check.max_residual);
    return cert;
  }

  cert.verdict = SolveVerdict::Representable;
  cert.measure = std::move(measure);
  if (opts.probability && g0 != 1.0) {
    std::map<MultiIndex, double> rescaled;
    for (const auto& [alpha, v] : ext.extended->values()) rescaled.emplace(alpha, v * g0);
    cert.extended_moments = MomentSequence(nvars, std::move(rescaled));
  } else {
    cert.extended_moments = ext.extended;
  }
  return cert;
}

FrameReport frame_consistency(const std::vector<MomentSequence>& gammas,
                              const std::vector<Constraint>& constraints,
                              const SolveOptions& opts) {
  if (gammas.empty()) throw std::invalid_argument("frame_consistency: no levels");
  for (std::size_t i = 0; i + 1 < gammas.size(); ++i)
    for (const auto& alpha : gammas[i].support())
      if (!gammas[i + 1].support().contains(alpha))
        throw std::invalid_argument("frame_consistency: level " + std::to_string(i + 1) +
                                    " does not contain level " + std::to_string(i));

  FrameReport report;
  std::vector<std::optional<AtomicMeasure>> measures;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    std::ostringstream what;
    int max_degree = 0;
    for (const auto& alpha : gammas[i].support())
      max_degree = std::max(max_degree, alpha.degree());
    what << "level " << i << ": " << gammas[i].support().size() << " monomials, degree <= "
         << max_degree;
    report.levels.push_back(what.str());
    report.masses.push_back(gammas[i].mass());
    report.certificates.push_back(solve_tmp(gammas[i], gammas[i].support(), constraints, opts));
    measures.push_back(report.certificates.back().measure);
  }
  report.all_solvable = true;
  for (const auto& cert : report.certificates)
    if (!cert.representable()) report.all_solvable = false;

  for (std::size_t i = 0; i < gammas.size(); ++i)
    for (std::size_t j = i + 1; j < gammas.size(); ++j) {
      if (!measures[i] || !measures[j]) continue;
      std::vector<MultiIndex> shared;
      for (const auto& alpha : gammas[i].support())
        if (gammas[j].support().contains(alpha)) shared.push_back(alpha);
      const MonomialSet shared_set(gammas[i].nvars(), std::move(shared));
      const MomentSequence mi = moments_of_atomic(*measures[i], shared_set);
      const MomentSequence mj = moments_of_atomic(*measures[j], shared_set);
      for (const auto& alpha : shared_set)
        report.shared_moment_max_discrepancy = std::max(
            report.shared_moment_max_discrepancy, std::abs(mi.at(alpha) - mj.at(alpha)));
    }
  return report;
}

} // namespace tmoment
