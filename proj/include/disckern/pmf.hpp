#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "disckern/error.hpp"
#include "disckern/numeric.hpp"

namespace disckern {

/// Finite pmf on an ascending list of count support points. tail_bound records
/// mass known to lie outside the listed support.
struct Pmf {
  std::vector<Count> support;
  std::vector<double> probs;
  double tail_bound = 0.0;

  Pmf() = default;
  Pmf(std::vector<Count> s, std::vector<double> p, double tail = 0.0)
      : support(std::move(s)), probs(std::move(p)), tail_bound(tail) {
    if (support.size() != probs.size()) {
      fail(ErrorKind::InvalidArgument, "pmf support and probabilities differ in length");
    }
    if (!std::is_sorted(support.begin(), support.end()) ||
        std::adjacent_find(support.begin(), support.end()) != support.end()) {
      fail(ErrorKind::InvalidArgument, "pmf support must be strictly increasing");
    }
  }

  std::size_t size() const { return support.size(); }
  bool empty() const { return support.empty(); }

  /// Probability at x, 0 off the support.
  double at(Count x) const {
    auto it = std::lower_bound(support.begin(), support.end(), x);
    if (it == support.end() || *it != x) return 0.0;
    return probs[static_cast<std::size_t>(it - support.begin())];
  }

  double total() const { return numeric::pairwise_sum(probs); }

  friend bool operator==(const Pmf&, const Pmf&) = default;
};

}  // namespace disckern
