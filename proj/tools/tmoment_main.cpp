// Command-line front end: check | solve | extract | dominate | scp | frame.
// Exit codes: 0 success, 2 mathematical failure verdict, 1 structural or
// parse error.

#include <fstream>
#include <limits>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tmoment/certificate.hpp"
#include "tmoment/dominating.hpp"
#include "tmoment/problem_file.hpp"

namespace {

using namespace tmoment;

struct CommonFlags {
  double psd_tol = Tolerances{}.psd_tol;
  double rank_tol = Tolerances{}.rank_tol;
  int depth = 2;
  std::uint64_t seed = ExtractionOptions{}.seed;
  bool probability = false;
  double residual_tol = 1e-8;
  double extension_tol = 1e-8;
  double consistency_tol = 1e-8;
  double point_tol = 1e-6;
  std::string atoms_csv;
  std::string grid_spec;
  int kmax = -1;

  CLI::Option* psd_opt = nullptr;
  CLI::Option* rank_opt = nullptr;
  CLI::Option* depth_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* prob_opt = nullptr;
  CLI::Option* kmax_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  flags.psd_opt = cmd->add_option("--psd-tol", flags.psd_tol, "PSD tolerance, relative to ||M||");
  flags.rank_opt = cmd->add_option("--rank-tol", flags.rank_tol,
                                   "numerical-rank tolerance, relative to the largest singular value");
  flags.depth_opt = cmd->add_option("--depth", flags.depth, "flat extension search depth");
  flags.seed_opt = cmd->add_option("--seed", flags.seed, "extraction RNG seed");
  flags.prob_opt = cmd->add_flag("--probability", flags.probability,
                                 "rescale gamma_0 to 1 before solving");
  cmd->add_option("--atoms-csv", flags.atoms_csv, "write the atom table to this CSV file");
}

// file `option` lines fill in whatever the command line left at its default
void apply_file_options(const ProblemFile& file, CommonFlags& flags) {
  for (const auto& [key, value] : file.options) {
    try {
      if (key == "psd_tol" && (!flags.psd_opt || flags.psd_opt->count() == 0))
        flags.psd_tol = std::stod(value);
      else if (key == "rank_tol" && (!flags.rank_opt || flags.rank_opt->count() == 0))
        flags.rank_tol = std::stod(value);
      else if (key == "depth" && (!flags.depth_opt || flags.depth_opt->count() == 0))
        flags.depth = std::stoi(value);
      else if (key == "seed" && (!flags.seed_opt || flags.seed_opt->count() == 0))
        flags.seed = static_cast<std::uint64_t>(std::stoull(value));
      else if (key == "probability" && (!flags.prob_opt || flags.prob_opt->count() == 0))
        flags.probability = (value == "true" || value == "1" || value == "yes");
      else if (key == "residual_tol")
        flags.residual_tol = std::stod(value);
      else if (key == "extension_tol")
        flags.extension_tol = std::stod(value);
      else if (key == "consistency_tol")
        flags.consistency_tol = std::stod(value);
      else if (key == "point_tol")
        flags.point_tol = std::stod(value);
      else if (key == "kmax" && (!flags.kmax_opt || flags.kmax_opt->count() == 0))
        flags.kmax = std::stoi(value);
      else if (key != "psd_tol" && key != "rank_tol" && key != "depth" && key != "seed" &&
               key != "probability" && key != "kmax")
        throw std::runtime_error("unknown option '" + key + "' in problem file");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("bad value for option '" + key + "': " + value);
    }
  }
}

SolveOptions to_solve_options(const CommonFlags& flags) {
  SolveOptions opts;
  opts.tols.psd_tol = flags.psd_tol;
  opts.tols.rank_tol = flags.rank_tol;
  opts.depth = flags.depth;
  opts.probability = flags.probability;
  opts.residual_tol = flags.residual_tol;
  opts.extension_tol = flags.extension_tol;
  opts.consistency_tol = flags.consistency_tol;
  opts.extraction.seed = flags.seed;
  opts.extraction.point_tol = flags.point_tol;
  return opts;
}

OptionEcho echo_options(const CommonFlags& flags) {
  OptionEcho echo;
  echo.emplace_back("psd_tol", format_double(flags.psd_tol));
  echo.emplace_back("rank_tol", format_double(flags.rank_tol));
  echo.emplace_back("depth", std::to_string(flags.depth));
  echo.emplace_back("seed", std::to_string(flags.seed));
  echo.emplace_back("probability", flags.probability ? "true" : "false");
  echo.emplace_back("residual_tol", format_double(flags.residual_tol));
  echo.emplace_back("extension_tol", format_double(flags.extension_tol));
  echo.emplace_back("consistency_tol", format_double(flags.consistency_tol));
  echo.emplace_back("point_tol", format_double(flags.point_tol));
  if (flags.kmax > 0) echo.emplace_back("kmax", std::to_string(flags.kmax));
  return echo;
}

void maybe_write_csv(const CommonFlags& flags, const SolveCertificate& cert) {
  if (flags.atoms_csv.empty() || !cert.measure) return;
  std::ofstream out(flags.atoms_csv);
  if (!out) throw std::runtime_error("cannot write atom table: " + flags.atoms_csv);
  write_atoms_csv(out, *cert.measure);
}

int cmd_solve(const std::string& path, CommonFlags& flags, bool emit_csv_to_stdout) {
  const ProblemFile file = parse_problem_file_at(path);
  if (file.is_scp) throw std::runtime_error("this is an scp problem file; use the scp command");
  apply_file_options(file, flags);
  write_certificate_header(std::cout, (emit_csv_to_stdout ? "extract " : "solve ") + path,
                           echo_options(flags));
  const SolveCertificate cert =
      solve_tmp(file.moment_sequence(), file.monomial_set(), file.constraints,
                to_solve_options(flags));
  write_solve_certificate(std::cout, cert);
  maybe_write_csv(flags, cert);
  if (emit_csv_to_stdout && flags.atoms_csv.empty() && cert.measure) {
    std::cout << "atom table:\n";
    write_atoms_csv(std::cout, *cert.measure);
  }
  return cert.representable() ? 0 : 2;
}

int cmd_check(const std::string& path, CommonFlags& flags) {
  const ProblemFile file = parse_problem_file_at(path);
  if (file.is_scp) throw std::runtime_error("this is an scp problem file; use the scp command");
  apply_file_options(file, flags);
  write_certificate_header(std::cout, "check " + path, echo_options(flags));
  const CheckResult result =
      run_check(file.moment_sequence(), file.constraints, to_solve_options(flags));
  write_check_certificate(std::cout, result);
  return result.all_ok() ? 0 : 2;
}

int cmd_scp(const std::string& path, CommonFlags& flags) {
  const ProblemFile file = parse_problem_file_at(path);
  if (!file.is_scp) throw std::runtime_error("scp requires a problem file with an scp header");
  apply_file_options(file, flags);
  write_certificate_header(std::cout, "scp " + path, echo_options(flags));
  const WeightFamily weights(file.alpha, file.beta, file.tails);
  ScpOptions opts;
  opts.solve = to_solve_options(flags);
  opts.kmax = flags.kmax;
  const ScpResult result = scp_solve(weights, opts);
  int extent = 1;
  if (result.completed_weights)
    for (const auto& [k, v] : result.completed_weights->alpha()) {
      (void)v;
      extent = std::max(extent, k.first + k.second);
    }
  write_scp_certificate(std::cout, result, extent);
  maybe_write_csv(flags, result.certificate);
  return result.solved() ? 0 : 2;
}

int cmd_frame(const std::string& path, CommonFlags& flags) {
  const ProblemFile file = parse_problem_file_at(path);
  apply_file_options(file, flags);
  if (file.levels.empty())
    throw std::runtime_error("frame requires at least one 'level ... end' block");
  write_certificate_header(std::cout, "frame " + path, echo_options(flags));
  std::vector<MomentSequence> levels;
  for (const auto& values : file.levels) levels.emplace_back(file.nvars, values);
  const FrameReport report = frame_consistency(levels, file.constraints, to_solve_options(flags));
  write_frame_certificate(std::cout, report);
  return report.all_solvable ? 0 : 2;
}

MultiIndex parse_alpha_flag(const std::string& spec) {
  std::vector<int> exps;
  std::istringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      exps.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw std::runtime_error("bad exponent '" + tok + "' in --alpha");
    }
  }
  if (exps.empty()) throw std::runtime_error("--alpha needs comma-separated exponents");
  return MultiIndex(std::move(exps));
}

GridK parse_grid_flag(const std::string& spec, int nvars) {
  if (spec.empty()) return box_grid(nvars, -10.0, 10.0, 41);
  double lo = 0, hi = 0;
  int steps = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> steps) || c1 != ',' || c2 != ',' || steps < 2)
    throw std::runtime_error("--grid expects lo,hi,steps");
  return box_grid(nvars, lo, hi, steps);
}

int cmd_dominate(const std::string& alpha_spec, int space_k, int space_nvars,
                 const std::string& grid_spec) {
  Polynomial p(1);
  std::vector<MultiIndex> covered;
  std::string what;
  if (!alpha_spec.empty()) {
    const MultiIndex alpha = parse_alpha_flag(alpha_spec);
    p = dominate_monomial(alpha);
    covered.push_back(alpha);
    what = "dominate --alpha " + alpha_spec;
  } else {
    if (space_k < 1) throw std::runtime_error("dominate needs --alpha or --space K");
    p = dominate_space(space_k, space_nvars);
    for (const auto& alpha : MonomialSet::full_degree(space_nvars, space_k))
      if (alpha.degree() >= 1) covered.push_back(alpha);
    what = "dominate --space " + std::to_string(space_k) + " --nvars " +
           std::to_string(space_nvars);
  }
  write_certificate_header(std::cout, what, {});
  std::cout << "p = " << p.to_string() << "\n";
  std::cout << "degree: " << p.degree() << "\n";

  const GridK grid = parse_grid_flag(grid_spec, p.nvars());
  std::cout << "verification over " << grid.description << ":\n";
  bool ok = true;
  double min_p = std::numeric_limits<double>::infinity();
  for (const auto& x : grid.points) min_p = std::min(min_p, p.eval(x));
  std::cout << "  min p on grid: " << format_double(min_p) << " (>= 1 expected)\n";
  if (min_p < 1.0 - 1e-9) ok = false;
  for (const auto& alpha : covered) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& x : grid.points)
      worst = std::max(worst, std::abs(eval_monomial(alpha, x)) - p.eval(x));
    std::cout << "  max |" << alpha.to_string() << "| - p: " << format_double(worst)
              << (worst <= 1e-9 ? " (ok)" : " (violated)") << "\n";
    if (worst > 1e-9) ok = false;
  }
  std::cout << "domination: " << (ok ? "verified on grid" : "VIOLATED") << "\n";
  return ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"truncated moment problems: certificates, flat extensions, atomic measures"};
  app.require_subcommand(1);

  std::string path;
  CommonFlags flags;

  auto* solve = app.add_subcommand("solve", "decide representability and extract a measure");
  solve->add_option("file", path, "problem file")->required();
  add_common_flags(solve, flags);

  auto* check = app.add_subcommand("check", "PSD, localizing and consistency reports only");
  check->add_option("file", path, "problem file")->required();
  add_common_flags(check, flags);

  auto* extract = app.add_subcommand("extract", "solve and emit the atom table as CSV");
  extract->add_option("file", path, "problem file")->required();
  add_common_flags(extract, flags);

  std::string alpha_spec, grid_spec;
  int space_k = 0, space_nvars = 1;
  auto* dominate = app.add_subcommand("dominate", "build an explicit dominating polynomial");
  dominate->add_option("--alpha", alpha_spec, "comma-separated exponents of the monomial");
  dominate->add_option("--space", space_k, "dominate every monomial of degree <= K");
  dominate->add_option("--nvars", space_nvars, "number of variables for --space");
  dominate->add_option("--grid", grid_spec, "verification grid lo,hi,steps (default -10,10,41)");

  auto* scp = app.add_subcommand("scp", "subnormal completion for 2-variable weighted shifts");
  scp->add_option("file", path, "weight family file")->required();
  add_common_flags(scp, flags);
  flags.kmax_opt = scp->add_option("--kmax", flags.kmax, "moment truncation order");

  auto* frame = app.add_subcommand("frame", "solve nested truncation levels and compare");
  frame->add_option("file", path, "multi-level problem file")->required();
  add_common_flags(frame, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(path, flags, false);
    if (check->parsed()) return cmd_check(path, flags);
    if (extract->parsed()) return cmd_solve(path, flags, true);
    if (dominate->parsed()) return cmd_dominate(alpha_spec, space_k, space_nvars, grid_spec);
    if (scp->parsed()) return cmd_scp(path, flags);
    if (frame->parsed()) return cmd_frame(path, flags);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
