#ifndef TMOMENT_EXTRACTION_HPP
#define TMOMENT_EXTRACTION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "tmoment/moment_matrix.hpp"

namespace tmoment {

// Commuting multiplication (shift) operators on the column space of a flat
// moment matrix, expressed over greedily chosen pivot monomials.
struct MultiplicationSystem {
  MonomialSet pivot_basis;                   // size r
  std::vector<Eigen::MatrixXd> shift_matrices; // one r x r matrix per variable
};

struct ExtractionOptions {
  std::uint64_t seed = 20240 /* fixed default; CLI-overridable */;
  double commute_tol = 1e-7;
  double weight_floor = 1e-9;
  double weight_tol = 1e-6;   // negative weights beyond this abort
  double imag_tol = 1e-7;     // complex eigenvalues beyond this abort
  double point_tol = 1e-6;    // constraint slack for support checks
};

// Raised when the flat structure or the commutation/real-spectrum
// assumptions behind extraction break down.
class ExtractionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Pivot columns from a pivoted factorization of the principal block; the
// shift matrix for variable i expands each column alpha+e_i in the pivots.
// `principal` is the degree-bounded block the extension was built over.
MultiplicationSystem build_multiplication_system(const MomentMatrix& M_ext,
                                                 const MonomialSet& principal,
                                                 double rank_tol = Tolerances{}.rank_tol);

// Atoms from clustered joint eigenvalues of a random convex combination of
// the shifts, refined per variable; weights from the pivot-monomial
// Vandermonde least squares. Atom count never exceeds the pivot count.
AtomicMeasure extract_atoms(const MultiplicationSystem& sys, const MomentSequence& gamma,
                            const ExtractionOptions& opts = {});

struct RepresentationCheck {
  double max_residual = 0.0;
  bool ok = true;
};

// max over alpha in C of |gamma_alpha - integral| / max(1, |gamma_alpha|).
RepresentationCheck verify_representation(const MomentSequence& gamma, const AtomicMeasure& mu,
                                          const MonomialSet& C, double tol);

} // namespace tmoment

#endif
