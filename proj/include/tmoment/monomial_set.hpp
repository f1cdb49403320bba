#ifndef TMOMENT_MONOMIAL_SET_HPP
#define TMOMENT_MONOMIAL_SET_HPP

#include <optional>
#include <vector>

#include "tmoment/multi_index.hpp"

namespace tmoment {

// Finite set of monomials, kept sorted in the graded order of MultiIndex
// with duplicates removed.
class MonomialSet {
public:
  explicit MonomialSet(int nvars = 0) : nvars_(nvars) {}
  MonomialSet(int nvars, std::vector<MultiIndex> indices);

  // All monomials with degree <= max_degree.
  static MonomialSet full_degree(int nvars, int max_degree);

  int nvars() const { return nvars_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  bool contains(const MultiIndex& alpha) const;
  std::optional<std::size_t> position(const MultiIndex& alpha) const;

  MonomialSet unioned(const MonomialSet& other) const;
  // True iff this is the initial segment of `other` in the shared ordering.
  bool is_prefix_of(const MonomialSet& other) const;

  bool operator==(const MonomialSet& other) const {
    return nvars_ == other.nvars_ && indices_ == other.indices_;
  }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

private:
  int nvars_;
  std::vector<MultiIndex> indices_; // sorted, unique
};

// True iff the set contains the monomial 1 and every member is reachable
// from it by single-coordinate increments staying inside the set.
bool is_connected(const MonomialSet& set);

// The set C+ \ C where C+ := C  u  U_i X_i C.
MonomialSet border(const MonomialSet& set);

// C u border(C).
MonomialSet closure(const MonomialSet& set);

} // namespace tmoment

#endif
