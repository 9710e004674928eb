#include "poolbound/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace poolbound {

namespace {

void check_dnk(int d, int n, int k) {
  if (d < 1) throw std::invalid_argument("bounds: d must be >= 1");
  if (n < 2) throw std::invalid_argument("bounds: n must be >= 2");
  if (k < 1 || k >= n) throw std::invalid_argument("bounds: need 1 <= k < n");
}

// true iff s^k >= target (s >= 1, target >= 1), without overflow.
bool ipow_geq(long long s, int k, long long target) {
  long long acc = 1;
  for (int i = 0; i < k; ++i) {
    if (acc > target / s) return true;
    acc *= s;
  }
  return acc >= target;
}

long long ipow_checked(long long s, int k) {
  long long acc = 1;
  for (int i = 0; i < k; ++i) {
    if (s != 0 && acc > 4611686018427387903LL / s) {
      throw std::overflow_error("bounds: power overflow");
    }
    acc *= s;
  }
  return acc;
}

}  // namespace

int grid_side(int d, int n, int k) {
  check_dnk(d, n, k);
  const long long target =
      static_cast<long long>(d) * (static_cast<long long>(n) - k) + 1;
  for (long long s = 1;; ++s) {
    if (ipow_geq(s, k, target)) return static_cast<int>(s);
  }
}

long long axis_cardinality(int d, int n, int k) {
  const long long s = grid_side(d, n, k);
  return ipow_checked(s, k) - ipow_checked(s - 1, k);
}

long long indexed_lower_bound(int d, int n, int k) {
  check_dnk(d, n, k);
  const long long num =
      static_cast<long long>(d) * (static_cast<long long>(n) - k);
  const long long den = axis_cardinality(d, n, k);
  return (num + den - 1) / den;
}

long long deepsets_lower_bound(int d, int n) {
  if (d < 1 || n < 2) throw std::invalid_argument("bounds: need d>=1, n>=2");
  return static_cast<long long>(d) * (static_cast<long long>(n) - 1);
}

long long trivial_bound(int d, int n, long long p) {
  if (d < 1 || n < 1 || p < 0) throw std::invalid_argument("trivial_bound: bad input");
  const long long nd = static_cast<long long>(n) * d;
  return p < nd ? p : nd;
}

long long fixed_feature_bound(int d, int n) {
  if (d < 1 || n < 1) throw std::invalid_argument("fixed_feature_bound: bad input");
  return static_cast<long long>(n) * d;
}

std::vector<BoundsRow> bounds_table(int d_lo, int d_hi, int n_lo, int n_hi,
                                    int k_lo, int k_hi) {
  if (d_lo < 1 || n_lo < 2 || k_lo < 1 || d_lo > d_hi || n_lo > n_hi ||
      k_lo > k_hi) {
    throw std::invalid_argument("bounds_table: bad ranges");
  }
  std::vector<BoundsRow> rows;
  for (int d = d_lo; d <= d_hi; ++d) {
    for (int n = n_lo; n <= n_hi; ++n) {
      for (int k = k_lo; k <= k_hi; ++k) {
        if (k > n) continue;
        BoundsRow row;
        row.d = d;
        row.n = n;
        row.k = k;
        row.p = 1;
        row.trivial_p1 = trivial_bound(d, n, 1);
        if (k == n) {
          // Pooling over full-length tuples: one statistic suffices.
          row.lower_indexed = 1;
          row.upper_known = 1;
          row.upper_source = "single-stat";
        } else {
          row.lower_indexed = indexed_lower_bound(d, n, k);
          if (k == 1) {
            row.lower_deepsets = deepsets_lower_bound(d, n);
            if (d == 1) {
              row.upper_known = n;
              row.upper_source = "sort";
            } else {
              row.upper_known = 2LL * n * d + 1;
              row.upper_source = "moments";
            }
          }
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

AsymptoticReport asymptotic_constant_check(int k, int d_lo, int d_hi, int n_lo,
                                           int n_hi) {
  AsymptoticReport rep;
  rep.k = k;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (int d = d_lo; d <= d_hi; ++d) {
    for (int n = n_lo; n <= n_hi; ++n) {
      if (k >= n) continue;
      const double base = static_cast<double>(d) * (n - k);
      const double denom = std::pow(base, 1.0 / static_cast<double>(k));
      const double ratio =
          static_cast<double>(indexed_lower_bound(d, n, k)) / denom;
      if (ratio < rep.min_ratio) {
        rep.min_ratio = ratio;
        rep.arg_d = d;
        rep.arg_n = n;
      }
    }
  }
  if (!std::isfinite(rep.min_ratio)) {
    throw std::invalid_argument("asymptotic_constant_check: empty range");
  }
  rep.positive = rep.min_ratio > 0.0;
  return rep;
}

MonotonicityReport monotonicity_report(int k, int d_lo, int d_hi, int n_lo,
                                       int n_hi) {
  if (k < 1 || d_lo < 1 || d_lo > d_hi || n_lo <= k || n_lo > n_hi) {
    throw std::invalid_argument("monotonicity_report: bad ranges");
  }
  MonotonicityReport rep;
  rep.k = k;
  for (int d = d_lo; d <= d_hi; ++d) {
    for (int n = n_lo; n < n_hi; ++n) {
      ++rep.pairs_checked;
      if (indexed_lower_bound(d, n + 1, k) < indexed_lower_bound(d, n, k)) {
        ++rep.decreases_in_n;
        if (rep.first_decrease_n == 0) {
          rep.first_decrease_d = d;
          rep.first_decrease_n = n;
        }
      }
    }
  }
  for (int n = n_lo; n <= n_hi; ++n) {
    for (int d = d_lo; d < d_hi; ++d) {
      ++rep.pairs_checked;
      if (indexed_lower_bound(d + 1, n, k) < indexed_lower_bound(d, n, k)) {
        ++rep.decreases_in_d;
      }
    }
  }
  rep.monotone = rep.decreases_in_n == 0 && rep.decreases_in_d == 0;
  return rep;
}

}  // namespace poolbound
