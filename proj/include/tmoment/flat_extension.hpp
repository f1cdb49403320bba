#ifndef TMOMENT_FLAT_EXTENSION_HPP
#define TMOMENT_FLAT_EXTENSION_HPP

#include <optional>
#include <string>
#include <vector>

#include "tmoment/extraction.hpp"
#include "tmoment/moment_matrix.hpp"

namespace tmoment {

// True iff the numerical ranks of nested moment matrices agree.
// M_small.basis must be a prefix of M_big.basis.
bool is_flat(const MomentMatrix& M_small, const MomentMatrix& M_big,
             double rank_tol = Tolerances{}.rank_tol);

enum class ExtensionStage {
  None,
  RangeCondition,   // border columns cannot be matched to the column space
  StructureDrift,   // flat completion misses known moments beyond tol
  PsdLost,          // extended matrix fails the PSD check
  FlatnessLost,     // extended rank exceeds the original rank
  ConsistencyLost,  // extended kernel relations fail to propagate
};

std::string to_string(ExtensionStage stage);

struct FlatExtensionOptions {
  int depth = 2;
  double tol = 1e-8; // range / structure residual bound, relative to ||M||
  Tolerances tols;
  double consistency_tol = 1e-8;
  // constraints used only to steer underdetermined completions toward
  // positively localized solutions; empty = no steering
  std::vector<Constraint> margin_constraints;
};

struct ExtensionResult {
  bool ok = false;
  ExtensionStage failed_stage = ExtensionStage::None;
  std::string message;
  int steps_used = 0;
  std::optional<MomentSequence> extended;
  std::optional<MomentMatrix> m_ext;
  MonomialSet principal; // the basis the extension is flat over
  int rank = 0;
};

// One-step flat extensions over border(basis), retried over wider borders up
// to `depth` steps. Unknown moments are solved so that the new columns lie in
// the range of M and the Smul'jan tail equals W^T M W; entries sharing a
// moment index are a single unknown by construction.
ExtensionResult build_flat_extension(const MomentSequence& gamma, const MonomialSet& basis,
                                     const FlatExtensionOptions& opts);
ExtensionResult build_flat_extension(const MomentSequence& gamma, const MonomialSet& basis,
                                     int depth, double tol);

enum class SolveVerdict {
  Representable,
  PsdFailure,
  LocalizingFailure,
  ConsistencyFailure,
  DepthExhausted,
};

std::string to_string(SolveVerdict verdict);

struct SolveOptions {
  Tolerances tols;
  double consistency_tol = 1e-8;
  double extension_tol = 1e-8;
  double residual_tol = 1e-8;
  int depth = 2;
  bool probability = false;
  ExtractionOptions extraction;
};

struct SolveCertificate {
  SolveVerdict verdict = SolveVerdict::DepthExhausted;
  std::optional<AtomicMeasure> measure;
  std::string witness;
  std::optional<MomentSequence> extended_moments;
  MonomialSet matrix_basis;
  int rank = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  // the explicit dominating polynomial for the data's degree span; the
  // one-dimensional extension datum this solve realizes computationally
  std::optional<Polynomial> dominating_poly;

  bool representable() const { return verdict == SolveVerdict::Representable; }
};

// Full decision pipeline: PSD, localizing PSD, recursive consistency, flat
// extension, atom extraction, and residual verification against gamma on C.
SolveCertificate solve_tmp(const MomentSequence& gamma, const MonomialSet& C,
                           const std::vector<Constraint>& constraints,
                           const SolveOptions& opts = {});

struct FrameReport {
  std::vector<std::string> levels;
  std::vector<double> masses; // Lambda(1) per level
  std::vector<SolveCertificate> certificates;
  double shared_moment_max_discrepancy = 0.0;
  bool all_solvable = false;
};

// Solves each truncation level and compares the recovered measures on the
// moments their supports share.
FrameReport frame_consistency(const std::vector<MomentSequence>& gammas,
                              const std::vector<Constraint>& constraints,
                              const SolveOptions& opts = {});

} // namespace tmoment

#endif
