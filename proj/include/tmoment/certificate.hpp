#ifndef TMOMENT_CERTIFICATE_HPP
#define TMOMENT_CERTIFICATE_HPP

#include <ostream>
#include <string>
#include <vector>

#include "tmoment/flat_extension.hpp"
#include "tmoment/scp.hpp"

namespace tmoment {

std::string tool_version();

// shortest round-trippable decimal form, stable across runs
std::string format_double(double v);

using OptionEcho = std::vector<std::pair<std::string, std::string>>;

void write_certificate_header(std::ostream& out, const std::string& command,
                              const OptionEcho& options);

void write_solve_certificate(std::ostream& out, const SolveCertificate& cert);

struct CheckResult {
  MonomialSet matrix_basis;
  PsdReport psd;
  std::vector<std::pair<std::string, PsdReport>> localizing; // constraint name -> report
  std::vector<std::string> untested_constraints;
  ConsistencyReport consistency;

  bool all_ok() const;
};

CheckResult run_check(const MomentSequence& gamma, const std::vector<Constraint>& constraints,
                      const SolveOptions& opts);

void write_check_certificate(std::ostream& out, const CheckResult& result);

void write_scp_certificate(std::ostream& out, const ScpResult& result, int diagram_extent);

void write_frame_certificate(std::ostream& out, const FrameReport& report);

void write_atoms_csv(std::ostream& out, const AtomicMeasure& mu);

} // namespace tmoment

#endif
