#include "tmoment/multi_index.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tmoment {

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_)
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
}

MultiIndex MultiIndex::zero(int nvars) {
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(nvars), 0));
}

MultiIndex MultiIndex::unit(int nvars, int var) {
  std::vector<int> e(static_cast<std::size_t>(nvars), 0);
  e.at(static_cast<std::size_t>(var)) = 1;
  return MultiIndex(std::move(e));
}

int MultiIndex::degree() const {
  return std::accumulate(exps_.begin(), exps_.end(), 0);
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (nvars() != other.nvars())
    throw std::invalid_argument("MultiIndex: nvars mismatch in +");
  std::vector<int> e(exps_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exps_[i];
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::predecessor(int var) const {
  std::vector<int> e(exps_);
  auto i = static_cast<std::size_t>(var);
  if (e.at(i) <= 0) throw std::invalid_argument("MultiIndex: predecessor of zero exponent");
  --e[i];
  return MultiIndex(std::move(e));
}

bool MultiIndex::operator<(const MultiIndex& other) const {
  const int da = degree(), db = other.degree();
  if (da != db) return da < db;
  // within a degree the lexicographically larger vector is listed first
  return exps_ > other.exps_;
}

std::string MultiIndex::to_string() const {
  static const char* named = "stu";
  if (is_zero()) return "1";
  std::ostringstream out;
  bool first = true;
  for (int i = 0; i < nvars(); ++i) {
    const int e = exps_[static_cast<std::size_t>(i)];
    if (e == 0) continue;
    if (!first) out << ' ';
    first = false;
    if (nvars() == 1)
      out << 'x';
    else if (nvars() <= 3)
      out << named[i];
    else
      out << 'x' << (i + 1);
    if (e > 1) out << '^' << e;
  }
  return out.str();
}

} // namespace tmoment
