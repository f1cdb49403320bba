#include "tmoment/monomial_set.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <stdexcept>

namespace tmoment {

MonomialSet::MonomialSet(int nvars, std::vector<MultiIndex> indices)
    : nvars_(nvars), indices_(std::move(indices)) {
  for (const auto& alpha : indices_)
    if (alpha.nvars() != nvars_)
      throw std::invalid_argument("MonomialSet: index has wrong nvars");
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

MonomialSet MonomialSet::full_degree(int nvars, int max_degree) {
  std::vector<MultiIndex> out;
  std::vector<int> current(static_cast<std::size_t>(nvars), 0);
  // enumerate exponent vectors with sum <= max_degree
  std::function<void(int, int)> rec = [&](int var, int remaining) {
    if (var == nvars) {
      out.emplace_back(current);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      current[static_cast<std::size_t>(var)] = e;
      rec(var + 1, remaining - e);
    }
    current[static_cast<std::size_t>(var)] = 0;
  };
  rec(0, max_degree);
  return MonomialSet(nvars, std::move(out));
}

bool MonomialSet::contains(const MultiIndex& alpha) const {
  return std::binary_search(indices_.begin(), indices_.end(), alpha);
}

std::optional<std::size_t> MonomialSet::position(const MultiIndex& alpha) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), alpha);
  if (it == indices_.end() || !(*it == alpha)) return std::nullopt;
  return static_cast<std::size_t>(it - indices_.begin());
}

MonomialSet MonomialSet::unioned(const MonomialSet& other) const {
  if (nvars_ != other.nvars_)
    throw std::invalid_argument("MonomialSet: nvars mismatch in union");
  std::vector<MultiIndex> merged = indices_;
  merged.insert(merged.end(), other.indices_.begin(), other.indices_.end());
  return MonomialSet(nvars_, std::move(merged));
}

bool MonomialSet::is_prefix_of(const MonomialSet& other) const {
  if (nvars_ != other.nvars_ || size() > other.size()) return false;
  return std::equal(indices_.begin(), indices_.end(), other.indices_.begin());
}

bool is_connected(const MonomialSet& set) {
  if (set.empty()) return false;
  const MultiIndex one = MultiIndex::zero(set.nvars());
  if (!set.contains(one)) return false;
  // staircase reachability from 1 by coordinate increments inside the set
  std::vector<bool> seen(set.size(), false);
  std::queue<std::size_t> todo;
  seen[*set.position(one)] = true;
  todo.push(*set.position(one));
  std::size_t reached = 1;
  while (!todo.empty()) {
    const MultiIndex& alpha = set[todo.front()];
    todo.pop();
    for (int i = 0; i < set.nvars(); ++i) {
      auto pos = set.position(alpha + MultiIndex::unit(set.nvars(), i));
      if (pos && !seen[*pos]) {
        seen[*pos] = true;
        ++reached;
        todo.push(*pos);
      }
    }
  }
  return reached == set.size();
}

MonomialSet closure(const MonomialSet& set) {
  std::vector<MultiIndex> out(set.begin(), set.end());
  for (const auto& alpha : set)
    for (int i = 0; i < set.nvars(); ++i)
      out.push_back(alpha + MultiIndex::unit(set.nvars(), i));
  return MonomialSet(set.nvars(), std::move(out));
}

MonomialSet border(const MonomialSet& set) {
  if (set.empty()) throw std::invalid_argument("border: empty monomial set");
  std::vector<MultiIndex> out;
  for (const auto& alpha : closure(set))
    if (!set.contains(alpha)) out.push_back(alpha);
  return MonomialSet(set.nvars(), std::move(out));
}

} // namespace tmoment
