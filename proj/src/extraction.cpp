#include "tmoment/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace tmoment {

MultiplicationSystem build_multiplication_system(const MomentMatrix& M_ext,
                                                 const MonomialSet& principal,
                                                 double rank_tol) {
  const int nvars = M_ext.basis.nvars();
  // positions of the degree-bounded principal block inside the extended basis
  std::vector<Eigen::Index> ppos;
  ppos.reserve(principal.size());
  for (const auto& alpha : principal) {
    auto pos = M_ext.basis.position(alpha);
    if (!pos)
      throw std::invalid_argument("build_multiplication_system: principal block not contained "
                                  "in the extended basis");
    ppos.push_back(static_cast<Eigen::Index>(*pos));
  }

  const auto np = static_cast<Eigen::Index>(principal.size());
  Eigen::MatrixXd principal_block(np, np);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < np; ++j)
      principal_block(i, j) = M_ext.entries(ppos[static_cast<std::size_t>(i)],
                                            ppos[static_cast<std::size_t>(j)]);

  // greedy pivot columns within the principal block
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(principal_block);
  qr.setThreshold(rank_tol);
  const auto r = static_cast<std::size_t>(qr.rank());
  std::vector<std::size_t> pivot_cols(r);
  for (std::size_t k = 0; k < r; ++k)
    pivot_cols[k] = static_cast<std::size_t>(qr.colsPermutation().indices()(static_cast<Eigen::Index>(k)));
  std::sort(pivot_cols.begin(), pivot_cols.end());

  std::vector<MultiIndex> pivots;
  pivots.reserve(r);
  for (std::size_t c : pivot_cols) pivots.push_back(principal[c]);
  MonomialSet pivot_basis(nvars, pivots);

  // P: full columns of M_ext at the pivot monomials
  const Eigen::Index nrows = M_ext.entries.rows();
  Eigen::MatrixXd P(nrows, static_cast<Eigen::Index>(r));
  for (std::size_t k = 0; k < r; ++k)
    P.col(static_cast<Eigen::Index>(k)) =
        M_ext.entries.col(ppos[pivot_cols[k]]);

  const auto P_dec = P.completeOrthogonalDecomposition();
  const double scale = std::max(1.0, M_ext.entries.cwiseAbs().maxCoeff());

  auto expand_column = [&](const MultiIndex& monomial) {
    auto pos = M_ext.basis.position(monomial);
    if (!pos)
      throw ExtractionError("flatness violated: column " + monomial.to_string() +
                            " absent from the extended matrix");
    const Eigen::VectorXd col = M_ext.entries.col(static_cast<Eigen::Index>(*pos));
    const Eigen::VectorXd coeffs = P_dec.solve(col);
    if ((P * coeffs - col).cwiseAbs().maxCoeff() > 1e-6 * scale)
      throw ExtractionError("flatness violated: column " + monomial.to_string() +
                            " leaves the pivot span");
    return coeffs;
  };

  MultiplicationSystem sys{std::move(pivot_basis), {}};
  for (int var = 0; var < nvars; ++var) {
    Eigen::MatrixXd N(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k < r; ++k)
      N.col(static_cast<Eigen::Index>(k)) =
          expand_column(sys.pivot_basis[k] + MultiIndex::unit(nvars, var));
    sys.shift_matrices.push_back(std::move(N));
  }
  return sys;
}

namespace {

void require_commuting(const MultiplicationSystem& sys, double commute_tol) {
  for (std::size_t i = 0; i < sys.shift_matrices.size(); ++i)
    for (std::size_t j = i + 1; j < sys.shift_matrices.size(); ++j) {
      const Eigen::MatrixXd& A = sys.shift_matrices[i];
      const Eigen::MatrixXd& B = sys.shift_matrices[j];
      const double bound = commute_tol * std::max(1.0, A.norm() * B.norm());
      if ((A * B - B * A).norm() > bound) {
        std::ostringstream msg;
        msg << "shift matrices for variables " << i << " and " << j
            << " do not commute (||[N_i,N_j]|| = " << (A * B - B * A).norm() << ")";
        throw ExtractionError(msg.str());
      }
    }
}

} // namespace

AtomicMeasure extract_atoms(const MultiplicationSystem& sys, const MomentSequence& gamma,
                            const ExtractionOptions& opts) {
  const int nvars = static_cast<int>(sys.shift_matrices.size());
  const auto r = static_cast<Eigen::Index>(sys.pivot_basis.size());
  if (r == 0) throw ExtractionError("empty multiplication system");
  require_commuting(sys, opts.commute_tol);

  // random convex combination; the seed is an explicit input
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::vector<double> mix(static_cast<std::size_t>(nvars));
  double mix_sum = 0.0;
  for (double& m : mix) mix_sum += (m = unif(rng));
  Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(r, r);
  for (int v = 0; v < nvars; ++v)
    combo += (mix[static_cast<std::size_t>(v)] / mix_sum) * sys.shift_matrices[static_cast<std::size_t>(v)];

  Eigen::EigenSolver<Eigen::MatrixXd> eig(combo);
  if (eig.info() != Eigen::Success) throw ExtractionError("eigensolver failed on shift combination");
  const Eigen::VectorXcd vals = eig.eigenvalues();
  const Eigen::MatrixXcd vecs = eig.eigenvectors();
  for (Eigen::Index k = 0; k < r; ++k)
    if (std::abs(vals(k).imag()) > opts.imag_tol)
      throw ExtractionError("complex joint eigenvalue; only real atoms are supported");

  // refine per variable: evaluate each shift in the joint eigenbasis
  const Eigen::MatrixXcd vec_inv = vecs.inverse();
  std::vector<std::vector<double>> atoms;
  for (Eigen::Index k = 0; k < r; ++k) {
    std::vector<double> atom(static_cast<std::size_t>(nvars));
    for (int v = 0; v < nvars; ++v) {
      const std::complex<double> coord =
          (vec_inv.row(k) * sys.shift_matrices[static_cast<std::size_t>(v)] * vecs.col(k))(0);
      if (std::abs(coord.imag()) > opts.imag_tol)
        throw ExtractionError("complex atom coordinate; only real atoms are supported");
      atom[static_cast<std::size_t>(v)] = coord.real();
    }
    atoms.push_back(std::move(atom));
  }

  // cluster near-duplicate joint eigenvalues
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> multiplicity;
  for (const auto& a : atoms) {
    bool placed = false;
    for (std::size_t j = 0; j < centers.size() && !placed; ++j) {
      double d2 = 0.0;
      for (int v = 0; v < nvars; ++v) {
        const double d = a[static_cast<std::size_t>(v)] - centers[j][static_cast<std::size_t>(v)];
        d2 += d * d;
      }
      if (std::sqrt(d2) <= AtomicMeasure::cluster_tolerance) {
        for (int v = 0; v < nvars; ++v)
          centers[j][static_cast<std::size_t>(v)] =
              (centers[j][static_cast<std::size_t>(v)] * static_cast<double>(multiplicity[j]) +
               a[static_cast<std::size_t>(v)]) /
              static_cast<double>(multiplicity[j] + 1);
        ++multiplicity[j];
        placed = true;
      }
    }
    if (!placed) {
      centers.push_back(a);
      multiplicity.push_back(1);
    }
  }

  // weights from sum_i lambda_i x_i^alpha = gamma_alpha over pivot monomials
  const auto m = static_cast<Eigen::Index>(centers.size());
  Eigen::MatrixXd V(r, m);
  Eigen::VectorXd rhs(r);
  for (Eigen::Index row = 0; row < r; ++row) {
    const MultiIndex& alpha = sys.pivot_basis[static_cast<std::size_t>(row)];
    rhs(row) = gamma.at(alpha);
    for (Eigen::Index col = 0; col < m; ++col)
      V(row, col) = eval_monomial(alpha, centers[static_cast<std::size_t>(col)]);
  }
  const Eigen::VectorXd lambda = V.completeOrthogonalDecomposition().solve(rhs);

  std::vector<std::vector<double>> kept_atoms;
  std::vector<double> kept_weights;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = lambda(i);
    if (w < -opts.weight_tol) {
      std::ostringstream msg;
      msg << "extraction failure: negative weight " << w << " at atom " << i;
      throw ExtractionError(msg.str());
    }
    if (w < opts.weight_floor) continue; // drop numerically zero mass
    kept_atoms.push_back(centers[static_cast<std::size_t>(i)]);
    kept_weights.push_back(w);
  }
  if (kept_atoms.empty()) throw ExtractionError("extraction failure: no atom carries mass");

  AtomicMeasure mu(std::move(kept_atoms), std::move(kept_weights));
  // Tchakaloff invariant: never more atoms than the pivot space dimension
  if (mu.size() > sys.pivot_basis.size())
    throw ExtractionError("atom count exceeds the pivot space dimension");
  return mu;
}

RepresentationCheck verify_representation(const MomentSequence& gamma, const AtomicMeasure& mu,
                                          const MonomialSet& C, double tol) {
  RepresentationCheck check;
  for (const auto& alpha : C) {
    double integral = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      integral += mu.weights()[i] * eval_monomial(alpha, mu.atoms()[i]);
    const double g = gamma.at(alpha);
    const double residual = std::abs(g - integral) / std::max(1.0, std::abs(g));
    check.max_residual = std::max(check.max_residual, residual);
  }
  check.ok = check.max_residual <= tol;
  return check;
}

} // namespace tmoment
