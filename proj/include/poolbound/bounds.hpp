#pragma once

#include <string>
#include <vector>

namespace poolbound {

// Smallest integer s with s^k >= d(n-k) + 1. Pure integer search, overflow
// safe.
int grid_side(int d, int n, int k);

// s^k - (s-1)^k for the s above: the number of k-tuples over the grid that
// touch the zero point in at least one slot.
long long axis_cardinality(int d, int n, int k);

// ceil(d(n-k) / (s^k - (s-1)^k)): minimal latent width for per-tuple
// (indexed) pooling encoders.
long long indexed_lower_bound(int d, int n, int k);

// d(n-1): the k=1 specialization.
long long deepsets_lower_bound(int d, int n);

// min(p, n d): latent width needed to match p generic targets.
long long trivial_bound(int d, int n, long long p);

// n d: the fixed-feature variant (inputs pinned, targets free).
long long fixed_feature_bound(int d, int n);

struct BoundsRow {
  int d = 0;
  int n = 0;
  int k = 0;
  long long p = 1;
  long long lower_indexed = 0;
  long long lower_deepsets = -1;  // set when k == 1
  long long trivial_p1 = 0;
  long long upper_known = -1;  // -1: no catalogued upper bound
  std::string upper_source;    // "sort", "moments", "single-stat", ""
};

// Rows over the inclusive ranges, k <= n only; k == n becomes the
// single-statistic row (exact value 1). Sorted by (d, n, k).
std::vector<BoundsRow> bounds_table(int d_lo, int d_hi, int n_lo, int n_hi,
                                    int k_lo, int k_hi);

struct AsymptoticReport {
  int k = 0;
  double min_ratio = 0.0;  // min of lower_indexed / (d(n-k))^{1/k}
  int arg_d = 0;
  int arg_n = 0;
  bool positive = false;
};

// Scans the range and reports the worst-case ratio of the indexed lower
// bound to (d(n-k))^{1/k}.
AsymptoticReport asymptotic_constant_check(int k, int d_lo, int d_hi, int n_lo,
                                           int n_hi);

struct MonotonicityReport {
  int k = 0;
  long long pairs_checked = 0;
  long long decreases_in_n = 0;  // adjacent n -> n+1 with a strictly smaller bound
  long long decreases_in_d = 0;  // adjacent d -> d+1 with a strictly smaller bound
  int first_decrease_d = 0;      // witness for the first decrease in n (0 if none)
  int first_decrease_n = 0;
  bool monotone = false;
};

// Counts strict decreases of the indexed lower bound along adjacent n and d
// steps. The ceiling interacts with jumps in the grid side, so the bound can
// dip as n grows for k >= 2; this reports counts and a witness instead of
// asserting monotonicity.
MonotonicityReport monotonicity_report(int k, int d_lo, int d_hi, int n_lo,
                                       int n_hi);

}  // namespace poolbound
