#ifndef TMOMENT_POLYNOMIAL_HPP
#define TMOMENT_POLYNOMIAL_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "tmoment/multi_index.hpp"

namespace tmoment {

// Sparse real polynomial, stored as multi-index -> coefficient.
// Coefficients with |c| < coeff_epsilon are dropped after every operation,
// so structurally equal polynomials compare equal.
class Polynomial {
public:
  static constexpr double coeff_epsilon = 1e-15;

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}
  Polynomial(int nvars, std::map<MultiIndex, double> terms);

  static Polynomial constant(int nvars, double value);
  static Polynomial monomial(const MultiIndex& alpha, double coeff = 1.0);
  // The coordinate polynomial X_var.
  static Polynomial variable(int nvars, int var);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const; // -1 for the zero polynomial
  const std::map<MultiIndex, double>& terms() const { return terms_; }
  double coeff(const MultiIndex& alpha) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double scalar) const;
  Polynomial operator-() const { return *this * -1.0; }

  double eval(std::span<const double> point) const;
  double eval(const std::vector<double>& point) const {
    return eval(std::span<const double>(point));
  }

  bool operator==(const Polynomial& other) const {
    return nvars_ == other.nvars_ && terms_ == other.terms_;
  }

  std::string to_string() const;

private:
  void prune();

  int nvars_;
  std::map<MultiIndex, double> terms_;
};

Polynomial operator*(double scalar, const Polynomial& p);

// x^alpha evaluated term-exactly (integer powers by repeated multiplication).
double eval_monomial(const MultiIndex& alpha, std::span<const double> point);

} // namespace tmoment

#endif
