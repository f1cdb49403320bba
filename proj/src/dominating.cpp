#include "tmoment/dominating.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "tmoment/monomial_set.hpp"

namespace tmoment {

GridK::GridK(std::vector<std::vector<double>> pts, std::string what)
    : points(std::move(pts)), description(std::move(what)) {
  if (points.empty()) throw std::invalid_argument("GridK: no points");
  for (const auto& p : points)
    if (p.size() != points.front().size())
      throw std::invalid_argument("GridK: points of unequal dimension");
}

GridK box_grid(int nvars, double lo, double hi, int steps) {
  return box_grid(std::vector<double>(static_cast<std::size_t>(nvars), lo),
                  std::vector<double>(static_cast<std::size_t>(nvars), hi),
                  std::vector<int>(static_cast<std::size_t>(nvars), steps));
}

GridK box_grid(const std::vector<double>& lo, const std::vector<double>& hi,
               const std::vector<int>& steps) {
  const auto n = lo.size();
  if (hi.size() != n || steps.size() != n)
    throw std::invalid_argument("box_grid: axis specs of unequal length");
  std::vector<std::vector<double>> axes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (steps[i] < 1 || hi[i] < lo[i]) throw std::invalid_argument("box_grid: bad axis spec");
    if (steps[i] == 1) {
      axes[i].push_back((lo[i] + hi[i]) / 2.0);
      continue;
    }
    for (int k = 0; k < steps[i]; ++k)
      axes[i].push_back(lo[i] + (hi[i] - lo[i]) * k / (steps[i] - 1));
  }
  std::vector<std::vector<double>> points;
  std::vector<double> current(n, 0.0);
  std::function<void(std::size_t)> rec = [&](std::size_t axis) {
    if (axis == n) {
      points.push_back(current);
      return;
    }
    for (double v : axes[axis]) {
      current[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  std::ostringstream what;
  what << "box grid, " << n << " axes:";
  for (std::size_t i = 0; i < n; ++i)
    what << " [" << lo[i] << "," << hi[i] << "]x" << steps[i];
  return GridK(std::move(points), what.str());
}

namespace {

Polynomial one_plus_square_power(int nvars, int var, int power) {
  const Polynomial base =
      Polynomial::constant(nvars, 1.0) +
      Polynomial::variable(nvars, var) * Polynomial::variable(nvars, var);
  Polynomial out = Polynomial::constant(nvars, 1.0);
  for (int k = 0; k < power; ++k) out = out * base;
  return out;
}

} // namespace

Polynomial dominate_monomial(const MultiIndex& alpha) {
  if (alpha.degree() < 1)
    throw std::invalid_argument("dominate_monomial: zero multi-index");
  const int n = alpha.nvars();
  // alpha = gamma + 2 beta, gamma in {0,1}^n
  std::vector<int> gamma(static_cast<std::size_t>(n)), beta(static_cast<std::size_t>(n));
  int gamma_deg = 0;
  for (int i = 0; i < n; ++i) {
    gamma[static_cast<std::size_t>(i)] = alpha[i] % 2;
    beta[static_cast<std::size_t>(i)] = alpha[i] / 2;
    gamma_deg += alpha[i] % 2;
  }

  Polynomial even = Polynomial::constant(n, 1.0);
  for (int i = 0; i < n; ++i)
    if (beta[static_cast<std::size_t>(i)] > 0)
      even = even * one_plus_square_power(n, i, beta[static_cast<std::size_t>(i)]);

  if (gamma_deg == 0) return even;

  const int lift = (gamma_deg + 2) / 2; // ceil((|gamma|+1)/2)
  Polynomial odd(n);
  for (int i = 0; i < n; ++i)
    if (gamma[static_cast<std::size_t>(i)] == 1)
      odd = odd + one_plus_square_power(n, i, lift);
  return odd * (1.0 / gamma_deg) * even;
}

Polynomial dominate_space(int k, int nvars) {
  if (k < 1) throw std::invalid_argument("dominate_space: k must be >= 1");
  Polynomial p = Polynomial::constant(nvars, 1.0);
  for (const auto& alpha : MonomialSet::full_degree(nvars, k))
    if (alpha.degree() >= 1) p = p + dominate_monomial(alpha);
  return p;
}

BoundednessReport boundedness_check(const Polynomial& b, const Polynomial& p, const GridK& sample,
                                    const std::vector<double>& radii) {
  if (sample.nvars() != b.nvars() || sample.nvars() != p.nvars())
    throw std::invalid_argument("boundedness_check: dimension mismatch");
  BoundednessReport report;

  for (const auto& x : sample.points) {
    const double pv = p.eval(x);
    if (!(pv > 0.0)) {
      std::ostringstream msg;
      msg << "boundedness_check: p is not positive at a sample point (p = " << pv << ")";
      throw std::domain_error(msg.str());
    }
    report.sup_estimate = std::max(report.sup_estimate, std::abs(b.eval(x)) / pv);
  }

  // rays: +-axis directions and all diagonal sign patterns
  const int n = b.nvars();
  std::vector<std::vector<double>> directions;
  for (int i = 0; i < n; ++i)
    for (double sign : {1.0, -1.0}) {
      std::vector<double> d(static_cast<std::size_t>(n), 0.0);
      d[static_cast<std::size_t>(i)] = sign;
      directions.push_back(std::move(d));
    }
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      d[static_cast<std::size_t>(i)] = ((mask >> i) & 1u) ? -inv_sqrt_n : inv_sqrt_n;
    directions.push_back(std::move(d));
  }

  for (const auto& d : directions) {
    std::vector<double> ratios;
    for (double radius : radii) {
      std::vector<double> x(d);
      for (double& c : x) c *= radius;
      const double pv = p.eval(x);
      if (!(pv > 0.0)) {
        report.trend_bounded = false;
        continue;
      }
      const double ratio = std::abs(b.eval(x)) / pv;
      report.sup_estimate = std::max(report.sup_estimate, ratio);
      ratios.push_back(ratio);
    }
    // bounded in trend: the tail of the ray must not keep growing
    if (ratios.size() >= 2) {
      const double last = ratios[ratios.size() - 1];
      const double prev = ratios[ratios.size() - 2];
      if (last > prev * (1.0 + 1e-9) + 1e-12) report.trend_bounded = false;
    }
  }
  return report;
}

double positive_part_norm(const Polynomial& a, const GridK& K) {
  if (K.nvars() != a.nvars())
    throw std::invalid_argument("positive_part_norm: dimension mismatch");
  double best = 0.0;
  for (const auto& x : K.points) best = std::max(best, a.eval(x));
  return std::max(0.0, best);
}

} // namespace tmoment
