#include "tmoment/polynomial.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tmoment {

Polynomial::Polynomial(int nvars, std::map<MultiIndex, double> terms)
    : nvars_(nvars), terms_(std::move(terms)) {
  for (const auto& [alpha, c] : terms_) {
    (void)c;
    if (alpha.nvars() != nvars_)
      throw std::invalid_argument("Polynomial: term index has wrong nvars");
  }
  prune();
}

Polynomial Polynomial::constant(int nvars, double value) {
  Polynomial p(nvars);
  p.terms_[MultiIndex::zero(nvars)] = value;
  p.prune();
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, double coeff) {
  Polynomial p(alpha.nvars());
  p.terms_[alpha] = coeff;
  p.prune();
  return p;
}

Polynomial Polynomial::variable(int nvars, int var) {
  return monomial(MultiIndex::unit(nvars, var));
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [alpha, c] : terms_) {
    (void)c;
    d = std::max(d, alpha.degree());
  }
  return d;
}

double Polynomial::coeff(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < coeff_epsilon)
      it = terms_.erase(it);
    else
      ++it;
  }
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (nvars_ != other.nvars_) throw std::invalid_argument("Polynomial: nvars mismatch in +");
  Polynomial r(*this);
  for (const auto& [alpha, c] : other.terms_) r.terms_[alpha] += c;
  r.prune();
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  return *this + other * -1.0;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (nvars_ != other.nvars_) throw std::invalid_argument("Polynomial: nvars mismatch in *");
  Polynomial r(nvars_);
  for (const auto& [a, ca] : terms_)
    for (const auto& [b, cb] : other.terms_) r.terms_[a + b] += ca * cb;
  r.prune();
  return r;
}

Polynomial Polynomial::operator*(double scalar) const {
  Polynomial r(nvars_);
  for (const auto& [alpha, c] : terms_) r.terms_[alpha] = c * scalar;
  r.prune();
  return r;
}

Polynomial operator*(double scalar, const Polynomial& p) { return p * scalar; }

double eval_monomial(const MultiIndex& alpha, std::span<const double> point) {
  double v = 1.0;
  for (int i = 0; i < alpha.nvars(); ++i) {
    const double x = point[static_cast<std::size_t>(i)];
    for (int k = 0; k < alpha[i]; ++k) v *= x;
  }
  return v;
}

double Polynomial::eval(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != nvars_)
    throw std::invalid_argument("Polynomial::eval: point dimension mismatch");
  double sum = 0.0;
  for (const auto& [alpha, c] : terms_) sum += c * eval_monomial(alpha, point);
  return sum;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) out << "-";
      first = false;
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    if (alpha.is_zero() || std::abs(mag - 1.0) > 1e-12) {
      out << mag;
      if (!alpha.is_zero()) out << ' ';
    }
    if (!alpha.is_zero()) out << alpha.to_string();
  }
  return out.str();
}

} // namespace tmoment
