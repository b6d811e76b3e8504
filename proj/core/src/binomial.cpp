#include "wlancap/binomial.hpp"

#include <algorithm>
#include <cmath>

#include "wlancap/error.hpp"

namespace wlancap {

double binomial_pmf(int n, int k, double p) {
    if (n < 0 || k < 0 || k > n) throw DomainError("binomial_pmf: need 0 <= k <= n");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_pmf: probability outside [0, 1]");
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    const double log_coeff = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(log_coeff + k * std::log(p) + (n - k) * std::log1p(-p));
}

double binomial_range_sum(int n, int k_lo, int k_hi, double p) {
    k_lo = std::max(k_lo, 0);
    k_hi = std::min(k_hi, n);
    double sum = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) sum += binomial_pmf(n, k, p);
    return sum;
}

}  // namespace wlancap
