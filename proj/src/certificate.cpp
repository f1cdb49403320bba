#include "tmoment/certificate.hpp"

#include <cstdio>
#include <cstdlib>

namespace tmoment {

std::string tool_version() { return "tmoment 0.1.0"; }

std::string format_double(double v) {
  // shortest precision that still round-trips
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_certificate_header(std::ostream& out, const std::string& command,
                              const OptionEcho& options) {
  out << "tool: " << tool_version() << "\n";
  out << "command: " << command << "\n";
  out << "options:";
  for (const auto& [key, value] : options) out << ' ' << key << '=' << value;
  out << "\n";
}

namespace {

void write_measure(std::ostream& out, const AtomicMeasure& mu) {
  out << "atoms: " << mu.size() << "\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out << "  atom " << i << ": weight " << format_double(mu.weights()[i]) << " at";
    for (double c : mu.atoms()[i]) out << ' ' << format_double(c);
    out << "\n";
  }
}

void write_basis(std::ostream& out, const char* label, const MonomialSet& basis) {
  out << label << ":";
  for (const auto& alpha : basis) out << ' ' << alpha.to_string();
  out << "\n";
}

} // namespace

void write_solve_certificate(std::ostream& out, const SolveCertificate& cert) {
  out << "verdict: " << to_string(cert.verdict) << "\n";
  write_basis(out, "matrix basis", cert.matrix_basis);
  out << "rank: " << cert.rank << "\n";
  for (const auto& w : cert.warnings) out << "warning: " << w << "\n";
  for (const auto& n : cert.notes) out << "note: " << n << "\n";
  if (cert.dominating_poly)
    out << "dominating polynomial: " << cert.dominating_poly->to_string() << "\n";
  if (!cert.witness.empty()) out << "witness: " << cert.witness << "\n";
  if (cert.measure) {
    write_measure(out, *cert.measure);
    out << "residual: " << format_double(cert.residual) << "\n";
  }
  if (cert.extended_moments) {
    out << "extended moments: " << cert.extended_moments->values().size() << "\n";
    for (const auto& [alpha, v] : cert.extended_moments->values())
      out << "  gamma[" << alpha.to_string() << "] = " << format_double(v) << "\n";
  }
}

bool CheckResult::all_ok() const {
  if (!psd.is_psd || !consistency.consistent) return false;
  for (const auto& [name, report] : localizing) {
    (void)name;
    if (!report.is_psd) return false;
  }
  return true;
}

CheckResult run_check(const MomentSequence& gamma, const std::vector<Constraint>& constraints,
                      const SolveOptions& opts) {
  CheckResult result;
  result.matrix_basis = max_matrix_basis(gamma);
  const MomentMatrix M = moment_matrix(gamma, result.matrix_basis);
  result.psd = psd_rank(M, opts.tols.psd_tol, opts.tols.rank_tol);
  for (const auto& g : constraints) {
    const MonomialSet basis = max_localizing_basis(gamma, g);
    if (basis.empty()) {
      result.untested_constraints.push_back(g.name);
      continue;
    }
    result.localizing.emplace_back(
        g.name, psd_rank(localizing_matrix(gamma, g, basis), opts.tols.psd_tol,
                         opts.tols.rank_tol));
  }
  result.consistency = recursive_consistency(M, gamma, opts.consistency_tol, opts.tols);
  return result;
}

void write_check_certificate(std::ostream& out, const CheckResult& result) {
  write_basis(out, "matrix basis", result.matrix_basis);
  out << "psd: " << (result.psd.is_psd ? "yes" : "no") << "\n";
  out << "min eigenvalue: " << format_double(result.psd.min_eigenvalue) << "\n";
  out << "rank: " << result.psd.rank << "\n";
  for (std::size_t i = 0; i < result.psd.kernel_basis.size(); ++i)
    out << "kernel " << i << ": " << result.psd.kernel_basis[i].to_string() << "\n";
  for (const auto& [name, report] : result.localizing)
    out << "localizing " << name << ": " << (report.is_psd ? "psd" : "not psd")
        << ", min eigenvalue " << format_double(report.min_eigenvalue) << "\n";
  for (const auto& name : result.untested_constraints)
    out << "localizing " << name << ": untested (moments unavailable)\n";
  out << "consistent: " << (result.consistency.consistent ? "yes" : "no") << "\n";
  for (const auto& v : result.consistency.violations)
    out << "  violation: Lambda(x_" << (v.variable + 1) << " * p_" << v.kernel_index << " * "
        << v.shift.to_string() << ") = " << format_double(v.value) << "\n";
  if (result.consistency.untested > 0)
    out << "  untested products: " << result.consistency.untested << "\n";
  out << "check: " << (result.all_ok() ? "pass" : "fail") << "\n";
}

namespace {

std::string weight_label(const char* name, int k1, int k2, double v) {
  std::string out = name;
  out += "(" + std::to_string(k1) + "," + std::to_string(k2) + ")=";
  char buf[24];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return out + buf;
}

} // namespace

void write_scp_certificate(std::ostream& out, const ScpResult& result, int diagram_extent) {
  for (const auto& r : result.refusals) out << "refusal: " << r << "\n";
  if (!result.refusals.empty()) return;
  out << "norm bounds: ||T1||^2 <= " << format_double(result.norms.first) << ", ||T2||^2 <= "
      << format_double(result.norms.second) << "\n";
  write_solve_certificate(out, result.certificate);
  for (const auto& d : result.degenerate) out << "degenerate: " << d << "\n";
  if (!result.completed_weights) return;

  // weight diagram rows from the top; alpha weights sit on row lines,
  // beta weights between them
  const WeightFamily& w = *result.completed_weights;
  out << "completion weight diagram:\n";
  for (int k2 = diagram_extent; k2 >= 0; --k2) {
    std::string betas = "  ";
    for (int k1 = 0; k1 + k2 <= diagram_extent; ++k1) {
      const auto b = w.beta_at(k1, k2);
      if (b) {
        std::string cell = weight_label("b", k1, k2, *b);
        cell.resize(22, ' ');
        betas += cell;
      }
    }
    if (betas.find_first_not_of(' ') != std::string::npos) out << betas << "\n";
    std::string alphas = "  ";
    for (int k1 = 0; k1 + k2 <= diagram_extent; ++k1) {
      const auto a = w.alpha_at(k1, k2);
      if (a) {
        std::string cell = weight_label("a", k1, k2, *a);
        cell.resize(22, ' ');
        alphas += cell;
      }
    }
    if (alphas.find_first_not_of(' ') != std::string::npos) out << alphas << "\n";
  }
}

void write_frame_certificate(std::ostream& out, const FrameReport& report) {
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    out << report.levels[i] << "\n";
    out << "  mass: " << format_double(report.masses[i]) << "\n";
    out << "  verdict: " << to_string(report.certificates[i].verdict) << "\n";
    if (!report.certificates[i].witness.empty())
      out << "  witness: " << report.certificates[i].witness << "\n";
  }
  out << "shared moment max discrepancy: "
      << format_double(report.shared_moment_max_discrepancy) << "\n";
  out << "all levels solvable: " << (report.all_solvable ? "yes" : "no") << "\n";
}

void write_atoms_csv(std::ostream& out, const AtomicMeasure& mu) {
  const int n = mu.nvars();
  for (int i = 0; i < n; ++i) out << 'x' << (i + 1) << ',';
  out << "weight\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (double c : mu.atoms()[i]) out << format_double(c) << ',';
    out << format_double(mu.weights()[i]) << "\n";
  }
}

} // namespace tmoment
