#include "wlancap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wlancap/binomial.hpp"
#include "wlancap/error.hpp"

namespace wlancap {

namespace {

void check_tau(double tau, const char* op) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError(std::string(op) + ": tau outside [0, 1]");
}

constexpr double kGoldenTol = 1e-10;

template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Bisection on a sign change of f over [lo, hi]; f(lo) and f(hi) must differ in sign.
template <typename F>
double bisect(F&& f, double lo, double hi, double flo) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(hi, 1e-300); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double prob_x_eq_k(double tau, int n, int k) {
    check_tau(tau, "prob_x_eq_k");
    if (k < 0 || k > n) throw DomainError("prob_x_eq_k: need 0 <= k <= n");
    return binomial_pmf(n, k, tau);
}

GenericSlotProbs generic_slot_probs(double tau, const Scenario& s) {
    check_tau(tau, "generic_slot_probs");
    const int n = s.n();
    const int m = s.m();
    GenericSlotProbs g{};
    g.tau = tau;
    g.p_idle = binomial_pmf(n, 0, tau);
    g.p_succ = binomial_range_sum(n, 1, m, tau);
    g.p_coll = binomial_range_sum(n, m + 1, n, tau);
    return g;
}

double mean_generic_slot_us(double tau, const Scenario& s) {
    const auto g = generic_slot_probs(tau, s);
    const auto& t = s.timing();
    return g.p_idle * t.t_idle_us() + g.p_coll * t.t_coll_us() + g.p_succ * t.t_succ_us();
}

double throughput(double tau, const Scenario& s) {
    check_tau(tau, "throughput");
    double delivered = 0.0;
    for (int k = 1; k <= s.m(); ++k) delivered += k * binomial_pmf(s.n(), k, tau);
    return delivered * s.payload_bits() / mean_generic_slot_us(tau, s) * 1e6;
}

double throughput_pps(double tau, const Scenario& s) { return throughput(tau, s) / s.payload_bits(); }

double conditional_collision_prob(double tau, int n, int m) {
    check_tau(tau, "conditional_collision_prob");
    if (n < 1 || m < 1) throw DomainError("conditional_collision_prob: need n, m >= 1");
    // Upper tail summed directly so small p_c keeps full relative precision.
    return binomial_range_sum(n - 1, m, n - 1, tau);
}

double saturation_attempt_prob(double p, const MacParams& mac) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("saturation_attempt_prob: p_c outside [0, 1]");
    const double r = mac.r();
    const double w0 = mac.w0();
    if (mac.retry_limit()) {
        double attempts = 0.0, slots = 0.0, pi = 1.0;
        for (int i = 0; i <= *mac.retry_limit(); ++i) {
            attempts += pi;
            slots += pi * (mac.window(i) + 1.0) / 2.0;
            pi *= p;
        }
        return attempts / slots;
    }
    if (mac.cw_max()) {
        const int j = *mac.doubling_stages();
        const double cw = *mac.cw_max();
        if (p >= 1.0) return 2.0 / (cw + 1.0);
        double attempts = 0.0, slots = 0.0, pi = 1.0;
        for (int i = 0; i < j; ++i) {
            attempts += pi;
            slots += pi * (mac.window(i) + 1.0) / 2.0;
            pi *= p;
        }
        attempts += pi / (1.0 - p);
        slots += pi / (1.0 - p) * (cw + 1.0) / 2.0;
        return attempts / slots;
    }
    const double one_rp = 1.0 - r * p;
    if (one_rp <= 0.0) return 0.0;
    return 2.0 * one_rp / (w0 * (1.0 - p) + one_rp);
}

const std::vector<double>& tau_grid() {
    static const std::vector<double> grid = [] {
        constexpr int kPoints = 2048;
        std::vector<double> g(kPoints);
        for (int i = 0; i < kPoints; ++i) {
            const double u = static_cast<double>(i) / (kPoints - 1);
            g[i] = u * u;
        }
        return g;
    }();
    return grid;
}

ThroughputPeak optimal_tau(const Scenario& s) {
    const auto& grid = tau_grid();
    std::size_t best = 0;
    double best_s = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = throughput(grid[i], s);
        if (v > best_s) {
            best_s = v;
            best = i;
        }
    }
    if (best == grid.size() - 1) return {1.0, throughput(1.0, s)};
    const double lo = best == 0 ? 0.0 : grid[best - 1];
    const double hi = grid[best + 1];
    const double tau = golden_max([&](double t) { return throughput(t, s); }, lo, hi, kGoldenTol);
    return {tau, throughput(tau, s)};
}

namespace {

double saturation_residual(double tau, const Scenario& s) {
    const double p = conditional_collision_prob(tau, s.n(), s.m());
    return tau - saturation_attempt_prob(p, s.mac());
}

}  // namespace

double saturation_tau_bisection(const Scenario& s) {
    // The residual is strictly increasing in tau: p_c grows with tau and the
    // attempt probability falls with p_c.
    const double f0 = saturation_residual(0.0, s);
    const double f1 = saturation_residual(1.0, s);
    if (f0 >= 0.0 || f1 < 0.0) {
        throw NoRootError("saturation fixed point has no root in (0, 1)");
    }
    if (f1 == 0.0) return 1.0;
    return bisect([&](double t) { return saturation_residual(t, s); }, 0.0, 1.0, f0);
}

double saturation_tau(const Scenario& s) {
    double tau = saturation_attempt_prob(0.0, s.mac());
    bool converged = false;
    for (int it = 0; it < 400; ++it) {
        const double p = conditional_collision_prob(tau, s.n(), s.m());
        const double next = 0.5 * tau + 0.5 * saturation_attempt_prob(p, s.mac());
        if (std::abs(next - tau) < 1e-12 * 0.5) {
            tau = next;
            converged = true;
            break;
        }
        tau = next;
    }
    if (converged && tau > 0.0 && tau <= 1.0 && std::abs(saturation_residual(tau, s)) < 1e-10) {
        return tau;
    }
    return saturation_tau_bisection(s);
}

std::string_view to_string(RootKind kind) {
    switch (kind) {
        case RootKind::Left: return "left";
        case RootKind::Right: return "right";
        case RootKind::Saturated: return "saturated";
    }
    return "left";
}

std::vector<OperatingPoint> nonsaturation_roots(const Scenario& s) {
    return nonsaturation_roots(s, saturation_tau(s));
}

std::vector<OperatingPoint> nonsaturation_roots(const Scenario& s, double tau_s) {
    const double target = s.offered_load_pps() * s.payload_bits();
    std::vector<OperatingPoint> roots;
    if (target <= 0.0) {
        roots.push_back({0.0, RootKind::Left, 0.0 < tau_s});
        return roots;
    }
    const auto peak = optimal_tau(s);
    const double rel = (target - peak.s_star_bps) / peak.s_star_bps;
    if (rel > 1e-9) return roots;
    if (std::abs(rel) <= 1e-9) {
        roots.push_back({peak.tau_star, RootKind::Left, peak.tau_star < tau_s});
        return roots;
    }
    auto f = [&](double t) { return throughput(t, s) - target; };
    const auto& grid = tau_grid();
    double prev_t = grid[0];
    double prev_f = f(prev_t);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double t = grid[i];
        const double ft = f(t);
        if (ft == 0.0) {
            roots.push_back({t, RootKind::Left, false});
        } else if ((ft < 0.0) != (prev_f < 0.0) && prev_f != 0.0) {
            roots.push_back({bisect(f, prev_t, t, prev_f), RootKind::Left, false});
        }
        prev_t = t;
        prev_f = ft;
    }
    // A peak narrower than the grid spacing can hide both crossings; split at tau*.
    if (roots.empty()) {
        const double fl = f(0.0);
        const double fp = f(peak.tau_star);
        roots.push_back({bisect(f, 0.0, peak.tau_star, fl), RootKind::Left, false});
        if (peak.tau_star < 1.0 && f(1.0) < 0.0) {
            roots.push_back({bisect(f, peak.tau_star, 1.0, fp), RootKind::Left, false});
        }
    }
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) { return a.tau < b.tau; });
    for (std::size_t i = 0; i < roots.size(); ++i) {
        roots[i].root_kind = i == 0 ? RootKind::Left : RootKind::Right;
        roots[i].stable = roots[i].tau < tau_s;
    }
    return roots;
}

OperatingPoint stable_operating_point(const Scenario& s) {
    const auto roots = nonsaturation_roots(s);
    for (const auto& r : roots) {
        if (r.stable) return r;
    }
    throw NoRootError("offered load infeasible: no stable operating point");
}

}  // namespace wlancap
