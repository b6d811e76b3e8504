#pragma once

namespace wlancap {

/// C(n,k) p^k (1-p)^(n-k), evaluated in log space. Exact at p = 0 and p = 1.
double binomial_pmf(int n, int k, double p);

/// Sum of binomial_pmf(n, k, p) for k in [k_lo, k_hi] (clamped to [0, n]).
/// Empty ranges sum to zero.
double binomial_range_sum(int n, int k_lo, int k_hi, double p);

}  // namespace wlancap
