#ifndef TMOMENT_DOMINATING_HPP
#define TMOMENT_DOMINATING_HPP

#include <string>
#include <vector>

#include "tmoment/polynomial.hpp"

namespace tmoment {

// Finite sample of a compact set K: explicit points plus a provenance note.
struct GridK {
  std::vector<std::vector<double>> points;
  std::string description;

  GridK(std::vector<std::vector<double>> pts, std::string what);
  int nvars() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
};

// Axis-aligned box [lo,hi]^n sampled with `steps` points per axis.
GridK box_grid(int nvars, double lo, double hi, int steps = 101);
GridK box_grid(const std::vector<double>& lo, const std::vector<double>& hi,
               const std::vector<int>& steps);

// Polynomial p with p >= 1 everywhere and |x^alpha| <= p(x), built from the
// decomposition alpha = gamma + 2*beta with gamma in {0,1}^n:
//   gamma == 0:  p = prod_i (1+X_i^2)^beta_i
//   otherwise:   p = (1/|gamma|) (sum_i gamma_i (1+X_i^2)^ceil((|gamma|+1)/2))
//                    * prod_i (1+X_i^2)^beta_i
Polynomial dominate_monomial(const MultiIndex& alpha);

// 1 + sum of dominate_monomial over all alpha with 1 <= |alpha| <= k; has
// degree <= k+1 for odd k and <= k+2 for even k, and dominates every
// monomial of degree <= k.
Polynomial dominate_space(int k, int nvars);

struct BoundednessReport {
  double sup_estimate = 0.0;
  bool trend_bounded = true;
};

// Falsifier for sup |b/p| < infinity: samples the grid and probes rays of
// growing radius (1, 10, 100, 1000 by default). trend_bounded=false is a
// counterexample; true is only evidence.
BoundednessReport boundedness_check(const Polynomial& b, const Polynomial& p, const GridK& sample,
                                    const std::vector<double>& radii = {1.0, 10.0, 100.0, 1000.0});

// max over x in K of max(0, a(x)): the grid evaluation of the positive-part
// seminorm rho_K(a_+).
double positive_part_norm(const Polynomial& a, const GridK& K);

} // namespace tmoment

#endif
