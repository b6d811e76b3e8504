#include "wlancap/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "wlancap/analytic.hpp"
#include "wlancap/delay.hpp"
#include "wlancap/error.hpp"

namespace wlancap {

BoundaryTau tau_for_collision_prob(const Scenario& s, double target) {
    if (!(target > 0.0 && target <= 1.0)) throw DomainError("tau_for_collision_prob: target outside (0, 1]");
    const int n = s.n(), m = s.m();
    if (conditional_collision_prob(1.0, n, m) < target) return {1.0, false};
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (conditional_collision_prob(mid, n, m) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), true};
}

BoundaryTau boundary_tau(const Scenario& s, int exponent) {
    if (exponent < 1 || exponent > 3) throw DomainError("boundary_tau: exponent must be 1, 2 or 3");
    return tau_for_collision_prob(s, std::pow(s.mac().r(), -exponent));
}

int classify(double tau_s, double tau_star, double tau_bbmd, double s_bbmd, double s_s) {
    if (tau_s <= tau_star) return 1;
    if (tau_bbmd <= tau_star) return s_bbmd <= s_s ? 2 : 3;
    return 4;
}

namespace {

// Replaces a delay boundary by the saturation point when the queue at the
// boundary's own throughput would already be unstable.
bool clamp_to_saturation(const Scenario& s, double tau_s, double& tau_b) {
    if (tau_b >= tau_s) {
        tau_b = tau_s;
        return true;
    }
    const double lambda_pps = throughput_pps(tau_b, s) / s.n();
    const auto view = backoff_view(tau_b, s);
    const auto m1 = access_moments(view, s).m1;
    if (!m1.is_finite() || lambda_pps * 1e-6 * m1.value() >= 1.0) {
        tau_b = tau_s;
        return true;
    }
    return false;
}

}  // namespace

CapacityReport capacity_report(const Scenario& s) {
    CapacityReport c{};
    c.tau_s = saturation_tau(s);
    c.s_s_bps = throughput(c.tau_s, s);
    const auto peak = optimal_tau(s);
    c.tau_star = peak.tau_star;
    c.s_star_bps = peak.s_star_bps;

    c.tau_bbmd = boundary_tau(s, 2).tau;
    c.tau_bbdj = boundary_tau(s, 3).tau;
    c.bbmd_clamped = clamp_to_saturation(s, c.tau_s, c.tau_bbmd);
    c.bbdj_clamped = clamp_to_saturation(s, c.tau_s, c.tau_bbdj);
    c.s_bbmd_bps = c.bbmd_clamped ? c.s_s_bps : throughput(c.tau_bbmd, s);
    c.s_bbdj_bps = c.bbdj_clamped ? c.s_s_bps : throughput(c.tau_bbdj, s);
    c.s_sbmd_bps = std::min(c.s_bbmd_bps, c.s_s_bps);
    c.s_sbdj_bps = std::min(c.s_bbdj_bps, c.s_s_bps);
    c.scenario_class = classify(c.tau_s, c.tau_star, c.tau_bbmd, c.s_bbmd_bps, c.s_s_bps);
    return c;
}

std::string_view to_string(DelayObjective o) { return o == DelayObjective::Jitter ? "jitter" : "mean-delay"; }

std::string_view to_string(OptimizeMode m) { return m == OptimizeMode::Exact ? "exact" : "large-n"; }

DelayObjective delay_objective_from_string(std::string_view name) {
    if (name == "mean-delay" || name == "sbmd") return DelayObjective::MeanDelay;
    if (name == "jitter" || name == "sbdj") return DelayObjective::Jitter;
    throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

OptimizeMode optimize_mode_from_string(std::string_view name) {
    if (name == "large-n") return OptimizeMode::LargeN;
    if (name == "exact") return OptimizeMode::Exact;
    throw InvalidArgument("unknown optimize mode '" + std::string(name) + "'");
}

namespace {

int exponent_of(DelayObjective o) { return o == DelayObjective::Jitter ? 3 : 2; }

// S(tau at p_c = 1/r^e) - S(tau at p_c = 1/r); positive for r near 1 where
// both points lie past the throughput peak.
double large_n_gap(const Scenario& s, double r, int e) {
    const double ts = tau_for_collision_prob(s, 1.0 / r).tau;
    const double tb = tau_for_collision_prob(s, std::pow(r, -e)).tau;
    return throughput(tb, s) - throughput(ts, s);
}

double exact_safe(const Scenario& s, double r, DelayObjective o) {
    const auto c = capacity_report(s.with_r(r));
    return o == DelayObjective::Jitter ? c.s_sbdj_bps : c.s_sbmd_bps;
}

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    return g;
}

}  // namespace

double large_n_safe_throughput(const Scenario& s, double r, DelayObjective o) {
    if (!(r > 1.0)) throw DomainError("large_n_safe_throughput: r must be > 1");
    const double ts = tau_for_collision_prob(s, 1.0 / r).tau;
    const double tb = tau_for_collision_prob(s, std::pow(r, -exponent_of(o))).tau;
    return std::min(throughput(ts, s), throughput(tb, s));
}

OptimalR optimize_r(const Scenario& s, const OptimizeOptions& opt) {
    if (!(opt.r_min > 1.0 && opt.r_max > opt.r_min)) throw InvalidArgument("optimize_r: need 1 < r_min < r_max");
    const auto grid = log_grid(opt.r_min, opt.r_max, 161);

    if (opt.mode == OptimizeMode::LargeN) {
        const int e = exponent_of(opt.objective);
        double prev_r = grid[0];
        double prev_g = large_n_gap(s, prev_r, e);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double g = large_n_gap(s, grid[i], e);
            if (prev_g > 0.0 && g <= 0.0) {
                double lo = prev_r, hi = grid[i];
                for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (large_n_gap(s, mid, e) > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                const double r = 0.5 * (lo + hi);
                return {r, large_n_safe_throughput(s, r, opt.objective), false};
            }
            prev_r = grid[i];
            prev_g = g;
        }
        // No crossing: the better end of the interval is the constrained optimum.
        const double a = large_n_safe_throughput(s, opt.r_min, opt.objective);
        const double b = large_n_safe_throughput(s, opt.r_max, opt.objective);
        return a >= b ? OptimalR{opt.r_min, a, true} : OptimalR{opt.r_max, b, true};
    }

    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = exact_safe(s, grid[i], opt.objective);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    if (best == 0 || best == grid.size() - 1) return {grid[best], best_v, true};
    double a = grid[best - 1], b = grid[best + 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = exact_safe(s, c, opt.objective), fd = exact_safe(s, d, opt.objective);
    while (b - a > 1e-9 * b) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = exact_safe(s, c, opt.objective);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = exact_safe(s, d, opt.objective);
        }
    }
    const double r = 0.5 * (a + b);
    return {r, exact_safe(s, r, opt.objective), false};
}

std::vector<ScalingRow> scaling_sweep(const Scenario& base, const std::vector<int>& m_values, OptimizeMode mode) {
    if (!std::is_sorted(m_values.begin(), m_values.end())) {
        throw InvalidArgument("scaling_sweep: m_values must be ascending");
    }
    std::vector<ScalingRow> rows;
    rows.reserve(m_values.size());
    for (int m : m_values) {
        ScalingRow row{m, NAN, NAN, NAN, NAN, false, {}};
        try {
            const auto sc = base.with_m(m);
            const auto md = optimize_r(sc, {DelayObjective::MeanDelay, mode});
            const auto dj = optimize_r(sc, {DelayObjective::Jitter, mode});
            row.r_sbmd = md.r_star;
            row.s_sbmd_per_m_bps = md.s_safe_bps / m;
            row.r_sbdj = dj.r_star;
            row.s_sbdj_per_m_bps = dj.s_safe_bps / m;
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SensitivityRow> sensitivity_curve(const Scenario& s, const std::vector<double>& r_grid) {
    std::vector<SensitivityRow> rows;
    rows.reserve(r_grid.size());
    for (double r : r_grid) {
        SensitivityRow row{r, NAN, NAN, NAN, false, {}};
        try {
            const auto c = capacity_report(s.with_r(r));
            row.s_s_bps = c.s_s_bps;
            row.s_sbmd_bps = c.s_sbmd_bps;
            row.s_sbdj_bps = c.s_sbdj_bps;
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double relative_range(const std::vector<SensitivityRow>& rows, double SensitivityRow::*column) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& row : rows) {
        if (!row.ok) continue;
        lo = std::min(lo, row.*column);
        hi = std::max(hi, row.*column);
    }
    if (!(hi > 0.0)) return NAN;
    return (hi - lo) / hi;
}

}  // namespace wlancap
