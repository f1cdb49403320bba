#ifndef TMOMENT_MULTI_INDEX_HPP
#define TMOMENT_MULTI_INDEX_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace tmoment {

// Exponent vector of a monomial x^alpha. Entries are nonnegative.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  static MultiIndex zero(int nvars);
  static MultiIndex unit(int nvars, int var);

  int nvars() const { return static_cast<int>(exps_.size()); }
  int degree() const;
  int operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exps_; }

  bool is_zero() const { return degree() == 0; }

  MultiIndex operator+(const MultiIndex& other) const;
  // Decrement coordinate `var`; exponent must be positive there.
  MultiIndex predecessor(int var) const;

  bool operator==(const MultiIndex& other) const { return exps_ == other.exps_; }
  bool operator!=(const MultiIndex& other) const { return exps_ != other.exps_; }

  // Graded ordering matching the column labels 1, S, T, S^2, ST, T^2, ...:
  // lower total degree first, ties broken so that the lexicographically
  // larger exponent vector comes first (S before T).
  bool operator<(const MultiIndex& other) const;

  // "s^2 t" style for nvars <= 3 (variables s,t,u), "x1^2 x3" otherwise.
  std::string to_string() const;

private:
  std::vector<int> exps_;
};

} // namespace tmoment

#endif
