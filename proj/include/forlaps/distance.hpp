#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace forlaps {

/// Damerau-Levenshtein distance between two token sequences: the minimum
/// number of insertions, deletions, substitutions and transpositions of
/// adjacent tokens. This is the unrestricted variant (Lowrance-Wagner), so a
/// substring may be edited again after a transposition; unlike the optimal
/// string alignment variant it satisfies the triangle inequality.
///
/// Tokens need only be equality- and less-than comparable. O(|a|·|b|) time
/// and memory.
template <typename T>
std::size_t damerau_levenshtein(std::span<const T> a, std::span<const T> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;

  const std::size_t inf = n + m;
  const std::size_t cols = m + 2;
  // Row/column 0 hold the sentinel; row/column 1 correspond to the empty prefix.
  std::vector<std::size_t> d((n + 2) * cols);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * cols + j]; };

  at(0, 0) = inf;
  for (std::size_t i = 0; i <= n; ++i) {
    at(i + 1, 0) = inf;
    at(i + 1, 1) = i;
  }
  for (std::size_t j = 0; j <= m; ++j) {
    at(0, j + 1) = inf;
    at(1, j + 1) = j;
  }

  std::map<T, std::size_t> last_row;  // token -> last row (1-based in a) where it appeared
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t last_match_col = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const auto it = last_row.find(b[j - 1]);
      const std::size_t i1 = it == last_row.end() ? 0 : it->second;
      const std::size_t j1 = last_match_col;
      std::size_t cost = 1;
      if (a[i - 1] == b[j - 1]) {
        cost = 0;
        last_match_col = j;
      }
      const std::size_t substitute = at(i, j) + cost;
      const std::size_t insert = at(i + 1, j) + 1;
      const std::size_t remove = at(i, j + 1) + 1;
      const std::size_t transpose = at(i1, j1) + (i - i1 - 1) + 1 + (j - j1 - 1);
      at(i + 1, j + 1) = std::min({substitute, insert, remove, transpose});
    }
    last_row[a[i - 1]] = i;
  }
  return at(n + 1, m + 1);
}

template <typename T>
std::size_t damerau_levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  return damerau_levenshtein(std::span<const T>(a), std::span<const T>(b));
}

}  // namespace forlaps
