#include "tmoment/problem_file.hpp"

#include <fstream>
#include <sstream>

namespace tmoment {

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

int parse_int(const std::string& tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, std::string("expected an integer ") + what + ", got '" + tok + "'");
  }
}

double parse_double(const std::string& tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, std::string("expected a number ") + what + ", got '" + tok + "'");
  }
}

MultiIndex parse_exponents(const std::vector<std::string>& tokens, std::size_t from,
                           std::size_t count, int line) {
  std::vector<int> exps;
  for (std::size_t i = 0; i < count; ++i) {
    const int e = parse_int(tokens.at(from + i), line, "exponent");
    if (e < 0) throw ParseError(line, "exponents must be nonnegative");
    exps.push_back(e);
  }
  return MultiIndex(std::move(exps));
}

// terms separated by ';', each one `e_1 ... e_nvars coeff`
Polynomial parse_polynomial(const std::string& body, int nvars, int line) {
  std::map<MultiIndex, double> terms;
  std::istringstream in(body);
  std::string piece;
  bool any = false;
  while (std::getline(in, piece, ';')) {
    const auto tokens = tokenize(piece);
    if (tokens.empty()) continue;
    if (tokens.size() != static_cast<std::size_t>(nvars) + 1)
      throw ParseError(line, "polynomial term needs " + std::to_string(nvars) +
                                 " exponents and one coefficient");
    const MultiIndex alpha = parse_exponents(tokens, 0, static_cast<std::size_t>(nvars), line);
    terms[alpha] += parse_double(tokens.back(), line, "coefficient");
    any = true;
  }
  if (!any) throw ParseError(line, "empty polynomial");
  return Polynomial(nvars, std::move(terms));
}

} // namespace

MomentSequence ProblemFile::moment_sequence() const {
  return MomentSequence(nvars, moments);
}

MonomialSet ProblemFile::monomial_set() const {
  if (declared_support) return *declared_support;
  std::vector<MultiIndex> keys;
  for (const auto& [alpha, v] : moments) {
    (void)v;
    keys.push_back(alpha);
  }
  return MonomialSet(nvars, std::move(keys));
}

ProblemFile parse_problem_file(std::istream& in) {
  ProblemFile file;
  bool nvars_known = false;
  std::map<MultiIndex, double>* moment_sink = &file.moments;
  std::vector<MultiIndex> declared;
  bool any_declared = false;
  bool in_level = false;

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto comment = raw.find('#');
    if (comment != std::string::npos) raw.erase(comment);
    auto tokens = tokenize(raw);
    if (tokens.empty()) continue;
    const std::string& head = tokens.front();

    if (head == "nvars") {
      if (tokens.size() != 2) throw ParseError(lineno, "usage: nvars N");
      file.nvars = parse_int(tokens[1], lineno, "for nvars");
      if (file.nvars < 1) throw ParseError(lineno, "nvars must be positive");
      nvars_known = true;
      continue;
    }
    if (head == "scp") {
      file.is_scp = true;
      file.nvars = 2;
      nvars_known = true;
      continue;
    }
    if (head == "option") {
      if (tokens.size() != 3) throw ParseError(lineno, "usage: option KEY VALUE");
      file.options.emplace_back(tokens[1], tokens[2]);
      continue;
    }

    if (head == "weight") {
      if (!file.is_scp) throw ParseError(lineno, "weight lines require an scp header");
      if (tokens.size() != 5) throw ParseError(lineno, "usage: weight alpha|beta K1 K2 VALUE");
      const int k1 = parse_int(tokens[2], lineno, "k1");
      const int k2 = parse_int(tokens[3], lineno, "k2");
      const double v = parse_double(tokens[4], lineno, "weight");
      if (k1 < 0 || k2 < 0) throw ParseError(lineno, "weight indices must be nonnegative");
      if (tokens[1] == "alpha")
        file.alpha[{k1, k2}] = v;
      else if (tokens[1] == "beta")
        file.beta[{k1, k2}] = v;
      else
        throw ParseError(lineno, "weight direction must be alpha or beta");
      continue;
    }
    if (head == "tail") {
      if (!file.is_scp) throw ParseError(lineno, "tail lines require an scp header");
      if (tokens.size() < 4) throw ParseError(lineno, "usage: tail alpha|beta LINE constant|geometric [RATIO]");
      WeightTail tail;
      if (tokens[1] == "alpha")
        tail.is_alpha = true;
      else if (tokens[1] == "beta")
        tail.is_alpha = false;
      else
        throw ParseError(lineno, "tail direction must be alpha or beta");
      tail.line = parse_int(tokens[2], lineno, "line index");
      if (tokens[3] == "constant") {
        tail.kind = TailKind::Constant;
      } else if (tokens[3] == "geometric") {
        tail.kind = TailKind::Geometric;
        if (tokens.size() != 5) throw ParseError(lineno, "geometric tail needs a ratio");
        tail.ratio = parse_double(tokens[4], lineno, "ratio");
        if (!(tail.ratio > 0.0) || tail.ratio > 1.0)
          throw ParseError(lineno, "geometric ratio must be in (0,1]");
      } else {
        throw ParseError(lineno, "tail kind must be constant or geometric");
      }
      file.tails.push_back(tail);
      continue;
    }

    if (head == "level") {
      if (in_level) throw ParseError(lineno, "levels cannot nest; close the previous one with 'end'");
      file.levels.emplace_back();
      moment_sink = &file.levels.back();
      in_level = true;
      continue;
    }
    if (head == "end") {
      if (!in_level) throw ParseError(lineno, "'end' without an open level");
      moment_sink = &file.moments;
      in_level = false;
      continue;
    }

    if (!nvars_known) throw ParseError(lineno, "nvars must be declared before " + head);

    if (head == "moment") {
      if (tokens.size() != static_cast<std::size_t>(file.nvars) + 2)
        throw ParseError(lineno, "usage: moment E1..En VALUE (" + std::to_string(file.nvars) +
                                     " exponents)");
      const MultiIndex alpha =
          parse_exponents(tokens, 1, static_cast<std::size_t>(file.nvars), lineno);
      (*moment_sink)[alpha] = parse_double(tokens.back(), lineno, "moment value");
      continue;
    }
    if (head == "support") {
      if (tokens.size() != static_cast<std::size_t>(file.nvars) + 1)
        throw ParseError(lineno, "usage: support E1..En");
      declared.push_back(parse_exponents(tokens, 1, static_cast<std::size_t>(file.nvars), lineno));
      any_declared = true;
      continue;
    }
    if (head == "constraint") {
      if (tokens.size() < 2) throw ParseError(lineno, "usage: constraint NAME : terms");
      const auto colon = raw.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, "constraint needs ':' before its terms");
      try {
        file.constraints.emplace_back(parse_polynomial(raw.substr(colon + 1), file.nvars, lineno),
                                      tokens[1]);
      } catch (const std::invalid_argument& err) {
        throw ParseError(lineno, err.what());
      }
      continue;
    }
    throw ParseError(lineno, "unknown directive '" + head + "'");
  }
  if (in_level) throw ParseError(lineno, "unterminated level block");
  if (any_declared) file.declared_support = MonomialSet(file.nvars, std::move(declared));
  return file;
}

ProblemFile parse_problem_file_at(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  return parse_problem_file(in);
}

} // namespace tmoment
