#include "tmoment/scp.hpp"

#include <cmath>
#include <sstream>

namespace tmoment {

namespace {

void check_weight_range(const std::map<ShiftIndex, double>& weights, const char* which) {
  for (const auto& [k, w] : weights)
    if (!(w > 0.0) || w > 1.0 + 1e-12) {
      std::ostringstream msg;
      msg << which << " weight at (" << k.first << "," << k.second << ") = " << w
          << " outside (0,1]";
      throw std::invalid_argument(msg.str());
    }
}

} // namespace

WeightFamily::WeightFamily(std::map<ShiftIndex, double> alpha, std::map<ShiftIndex, double> beta,
                           std::vector<WeightTail> tails)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), tails_(std::move(tails)) {
  check_weight_range(alpha_, "alpha");
  check_weight_range(beta_, "beta");
}

std::string WeightFamily::extent() const {
  int order = 0;
  for (const auto& [k, w] : alpha_) {
    (void)w;
    order = std::max(order, k.first + k.second);
  }
  for (const auto& [k, w] : beta_) {
    (void)w;
    order = std::max(order, k.first + k.second);
  }
  std::ostringstream out;
  out << alpha_.size() << " alpha and " << beta_.size() << " beta weights, |k| <= " << order;
  if (!tails_.empty()) out << ", " << tails_.size() << " tail descriptor(s)";
  return out.str();
}

WeightFamily WeightFamily::expanded(int upto) const {
  std::map<ShiftIndex, double> alpha = alpha_, beta = beta_;
  for (const auto& tail : tails_) {
    auto& line = tail.is_alpha ? alpha : beta;
    // last explicitly given weight on the described line
    int last = -1;
    double value = 0.0;
    for (const auto& [k, w] : line) {
      const int along = tail.is_alpha ? k.first : k.second;
      const int fixed = tail.is_alpha ? k.second : k.first;
      if (fixed == tail.line && along > last) {
        last = along;
        value = w;
      }
    }
    if (last < 0)
      throw std::invalid_argument("weight tail refers to a line with no explicit weights");
    for (int j = last + 1; j <= upto; ++j) {
      if (tail.kind == TailKind::Geometric) value *= tail.ratio;
      value = std::min(1.0, std::max(value, 1e-12));
      const ShiftIndex k = tail.is_alpha ? ShiftIndex{j, tail.line} : ShiftIndex{tail.line, j};
      line.emplace(k, value);
    }
  }
  return WeightFamily(std::move(alpha), std::move(beta), {});
}

std::optional<double> WeightFamily::alpha_at(int k1, int k2) const {
  auto it = alpha_.find({k1, k2});
  if (it == alpha_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> WeightFamily::beta_at(int k1, int k2) const {
  auto it = beta_.find({k1, k2});
  if (it == beta_.end()) return std::nullopt;
  return it->second;
}

double WeightFamily::sup_alpha() const {
  double s = 0.0;
  for (const auto& [k, w] : alpha_) {
    (void)k;
    s = std::max(s, w);
  }
  return s;
}

double WeightFamily::sup_beta() const {
  double s = 0.0;
  for (const auto& [k, w] : beta_) {
    (void)k;
    s = std::max(s, w);
  }
  return s;
}

CommutativityReport commutativity_check(const WeightFamily& w, double tol) {
  CommutativityReport report;
  for (const auto& [k, alpha_k] : w.alpha()) {
    const auto beta_k = w.beta_at(k.first, k.second);
    const auto beta_right = w.beta_at(k.first + 1, k.second);
    const auto alpha_up = w.alpha_at(k.first, k.second + 1);
    if (!beta_k || !beta_right || !alpha_up) continue;
    if (std::abs(*beta_right * alpha_k - *alpha_up * *beta_k) > tol) {
      report.ok = false;
      report.violations.push_back(k);
    }
  }
  return report;
}

namespace {

// Moments reachable through any monotone path of available weights; under
// commutativity all paths agree, so the first value found is kept.
std::map<MultiIndex, double> computable_moments(const WeightFamily& w, int kmax) {
  std::map<ShiftIndex, double> known{{{0, 0}, 1.0}};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [k, g] : known) {
      if (k.first + k.second >= kmax) continue;
      const auto a = w.alpha_at(k.first, k.second);
      if (a && !known.count({k.first + 1, k.second})) {
        known[{k.first + 1, k.second}] = g * *a * *a;
        grew = true;
        break;
      }
      const auto b = w.beta_at(k.first, k.second);
      if (b && !known.count({k.first, k.second + 1})) {
        known[{k.first, k.second + 1}] = g * *b * *b;
        grew = true;
        break;
      }
    }
  }
  std::map<MultiIndex, double> values;
  for (const auto& [k, g] : known) values.emplace(MultiIndex({k.first, k.second}), g);
  return values;
}

} // namespace

MomentSequence moments_from_weights(const WeightFamily& w, int kmax) {
  if (kmax < 0) throw std::invalid_argument("moments_from_weights: kmax must be >= 0");
  std::map<MultiIndex, double> values;
  for (int k1 = 0; k1 <= kmax; ++k1)
    for (int k2 = 0; k1 + k2 <= kmax; ++k2) {
      // product along the canonical path (0,0) -> (k1,0) -> (k1,k2)
      double gamma = 1.0;
      for (int i = 0; i < k1; ++i) {
        const auto a = w.alpha_at(i, 0);
        if (!a) {
          std::ostringstream msg;
          msg << "moments_from_weights: missing alpha weight at (" << i << ",0) on the path to ("
              << k1 << "," << k2 << ")";
          throw std::invalid_argument(msg.str());
        }
        gamma *= *a * *a;
      }
      for (int j = 0; j < k2; ++j) {
        const auto b = w.beta_at(k1, j);
        if (!b) {
          std::ostringstream msg;
          msg << "moments_from_weights: missing beta weight at (" << k1 << "," << j
              << ") on the path to (" << k1 << "," << k2 << ")";
          throw std::invalid_argument(msg.str());
        }
        gamma *= *b * *b;
      }
      values.emplace(MultiIndex({k1, k2}), gamma);
    }
  return MomentSequence(2, std::move(values));
}

MomentSequence sparse_moments_from_weights(const WeightFamily& w, int kmax) {
  if (kmax < 0) throw std::invalid_argument("sparse_moments_from_weights: kmax must be >= 0");
  return MomentSequence(2, computable_moments(w, kmax));
}

BergerReport berger_check(const std::vector<double>& omega, int kmax, double tol,
                          std::optional<double> norm_bound) {
  if (kmax < 1) throw std::invalid_argument("berger_check: kmax must be >= 1");
  if (static_cast<int>(omega.size()) < kmax)
    throw std::invalid_argument("berger_check: kmax exceeds the available moment count");
  for (double w : omega)
    if (!(w > 0.0)) throw std::invalid_argument("berger_check: weights must be positive");

  std::vector<double> gamma(static_cast<std::size_t>(kmax) + 1, 1.0);
  double sup_w2 = 0.0;
  for (double w : omega) sup_w2 = std::max(sup_w2, w * w);
  for (int k = 0; k < kmax; ++k) {
    const double w = omega[static_cast<std::size_t>(k)];
    gamma[static_cast<std::size_t>(k) + 1] = gamma[static_cast<std::size_t>(k)] * w * w;
  }
  const double bound = norm_bound.value_or(sup_w2);

  BergerReport report;
  auto hankel = [&](int offset, int size) {
    Eigen::MatrixXd H(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) H(i, j) = gamma[static_cast<std::size_t>(i + j + offset)];
    return H;
  };
  auto check = [&](const Eigen::MatrixXd& H, const std::string& name) {
    if (!report.subnormal_consistent || H.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    const double min_eig = eig.eigenvalues().minCoeff();
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (min_eig < -tol * scale) {
      report.subnormal_consistent = false;
      report.failing_name = name;
      report.failing_min_eigenvalue = min_eig;
      report.failing_matrix = H;
    }
  };

  const int h0 = kmax / 2 + 1;       // uses gamma up to 2*(h0-1) <= kmax
  const int h1 = (kmax - 1) / 2 + 1; // shifted: up to 2*(h1-1)+1 <= kmax
  check(hankel(0, h0), "hankel");
  check(hankel(1, h1), "shifted hankel");
  Eigen::MatrixXd loc = bound * hankel(0, h1) - hankel(1, h1);
  check(loc, "localizing ||W||^2 - t");
  return report;
}

namespace {

std::string index_string(const ShiftIndex& k) {
  return "(" + std::to_string(k.first) + "," + std::to_string(k.second) + ")";
}


// collect the weights of one horizontal (alpha) or vertical (beta) line,
// starting at 0, stopping at the first gap
std::vector<double> line_weights(const WeightFamily& w, bool is_alpha, int line) {
  std::vector<double> out;
  for (int j = 0;; ++j) {
    const auto v = is_alpha ? w.alpha_at(j, line) : w.beta_at(line, j);
    if (!v) break;
    out.push_back(*v);
  }
  return out;
}

} // namespace

ScpResult scp_solve(const WeightFamily& input, const ScpOptions& opts) {
  ScpResult result;

  int order = 0;
  for (const auto& [k, v] : input.alpha()) {
    (void)v;
    order = std::max(order, k.first + k.second + 1);
  }
  for (const auto& [k, v] : input.beta()) {
    (void)v;
    order = std::max(order, k.first + k.second + 1);
  }
  const int kmax = opts.kmax > 0 ? opts.kmax : std::max(order, 2);
  const WeightFamily w = input.expanded(kmax);

  const CommutativityReport comm = commutativity_check(w);
  if (!comm.ok) {
    for (const auto& k : comm.violations)
      result.refusals.push_back("commutativity violated at k=" + index_string(k));
    return result;
  }

  // rows and columns with at least two weights must look subnormal on their own
  std::map<int, std::vector<double>> rows, cols;
  for (int line = 0; line <= kmax; ++line) {
    auto r = line_weights(w, true, line);
    if (r.size() >= 2) rows.emplace(line, std::move(r));
    auto c = line_weights(w, false, line);
    if (c.size() >= 2) cols.emplace(line, std::move(c));
  }
  // necessity: each line must look subnormal on its own. A failure is a
  // structured refusal, but the moment-matrix certificate is still computed
  // so the caller sees the matrix-level witness too.
  for (const auto& [line, weights] : rows) {
    const BergerReport rep = berger_check(weights, static_cast<int>(weights.size()), 1e-9, 1.0);
    if (!rep.subnormal_consistent)
      result.refusals.push_back("row " + std::to_string(line) + " fails the Berger check (" +
                                rep.failing_name + ")");
  }
  for (const auto& [line, weights] : cols) {
    const BergerReport rep = berger_check(weights, static_cast<int>(weights.size()), 1e-9, 1.0);
    if (!rep.subnormal_consistent)
      result.refusals.push_back("column " + std::to_string(line) + " fails the Berger check (" +
                                rep.failing_name + ")");
  }

  // the supplied weights only give lower estimates of ||T_i||^2; the sound
  // support box under the bounded-by-1 convention is the unit square
  result.norms = {w.sup_alpha() * w.sup_alpha(), w.sup_beta() * w.sup_beta()};

  const MomentSequence gamma(2, computable_moments(w, kmax));
  const std::vector<Constraint> box = {
      Constraint(Polynomial::variable(2, 0), "s"),
      Constraint(Polynomial::constant(2, 1.0) - Polynomial::variable(2, 0), "1-s"),
      Constraint(Polynomial::variable(2, 1), "t"),
      Constraint(Polynomial::constant(2, 1.0) - Polynomial::variable(2, 1), "1-t"),
  };

  result.certificate = solve_tmp(gamma, gamma.support(), box, opts.solve);
  if (!result.certificate.representable() || !result.refusals.empty()) return result;

  // completion weights from the measure's moments
  const AtomicMeasure& mu = *result.certificate.measure;
  const MomentSequence completion_moments =
      moments_of_atomic(mu, MonomialSet::full_degree(2, kmax + 1));
  std::map<ShiftIndex, double> alpha_out, beta_out;
  for (int k1 = 0; k1 <= kmax; ++k1)
    for (int k2 = 0; k1 + k2 <= kmax; ++k2) {
      const double g = completion_moments.at(MultiIndex({k1, k2}));
      if (g <= opts.weight_floor) {
        result.degenerate.push_back("gamma" + index_string({k1, k2}) +
                                    " has vanishing mass; weights beyond it are undefined");
        continue;
      }
      const double g_right = completion_moments.at(MultiIndex({k1 + 1, k2}));
      const double g_up = completion_moments.at(MultiIndex({k1, k2 + 1}));
      if (g_right > opts.weight_floor)
        alpha_out[{k1, k2}] = std::min(1.0, std::sqrt(g_right / g));
      if (g_up > opts.weight_floor) beta_out[{k1, k2}] = std::min(1.0, std::sqrt(g_up / g));
    }
  WeightFamily completed(std::move(alpha_out), std::move(beta_out));

  // the completion must extend the input where they overlap
  for (const auto& [k, v] : w.alpha()) {
    const auto c = completed.alpha_at(k.first, k.second);
    if (c && std::abs(*c - v) > opts.overlap_tol)
      result.refusals.push_back("completed alpha at " + index_string(k) +
                                " deviates from the input weight");
  }
  for (const auto& [k, v] : w.beta()) {
    const auto c = completed.beta_at(k.first, k.second);
    if (c && std::abs(*c - v) > opts.overlap_tol)
      result.refusals.push_back("completed beta at " + index_string(k) +
                                " deviates from the input weight");
  }
  result.completed_weights = std::move(completed);
  return result;
}

} // namespace tmoment
