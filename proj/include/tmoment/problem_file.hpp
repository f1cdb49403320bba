#ifndef TMOMENT_PROBLEM_FILE_HPP
#define TMOMENT_PROBLEM_FILE_HPP

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmoment/moment_matrix.hpp"
#include "tmoment/scp.hpp"

namespace tmoment {

// Parse failure with the offending line number.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

private:
  int line_;
};

// One structured-text problem: moments keyed by exponent vectors, named
// constraint polynomials, optional frame levels or SCP weights, and options.
struct ProblemFile {
  int nvars = 0;
  std::map<MultiIndex, double> moments;
  std::optional<MonomialSet> declared_support;
  std::vector<std::map<MultiIndex, double>> levels; // frame input
  std::vector<Constraint> constraints;

  bool is_scp = false;
  std::map<ShiftIndex, double> alpha, beta;
  std::vector<WeightTail> tails;

  std::vector<std::pair<std::string, std::string>> options; // raw key/value

  MomentSequence moment_sequence() const;
  MonomialSet monomial_set() const; // declared support, or the moment keys
};

ProblemFile parse_problem_file(std::istream& in);
ProblemFile parse_problem_file_at(const std::string& path);

} // namespace tmoment

#endif
