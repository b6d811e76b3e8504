#include "wlancap/delay.hpp"

#include <cmath>
#include <vector>

#include "wlancap/analytic.hpp"
#include "wlancap/binomial.hpp"
#include "wlancap/error.hpp"

namespace wlancap {

BackoffView backoff_view(double tau, const Scenario& s) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("backoff_view: tau outside [0, 1]");
    const int others = s.n() - 1;
    const int m = s.m();
    BackoffView v{};
    v.p_idle_b = binomial_pmf(others, 0, tau);
    v.p_succ_b = binomial_range_sum(others, 1, m, tau);
    v.p_coll_b = binomial_range_sum(others, m + 1, others, tau);
    v.p_c = conditional_collision_prob(tau, s.n(), m);
    const auto& t = s.timing();
    const double ti = t.t_idle_us(), tc = t.t_coll_us(), ts = t.t_succ_us();
    v.a1_us = ti * v.p_idle_b + tc * v.p_coll_b + ts * v.p_succ_b;
    v.a2_us2 = ti * ti * v.p_idle_b + tc * tc * v.p_coll_b + ts * ts * v.p_succ_b;
    v.a3_us3 = ti * ti * ti * v.p_idle_b + tc * tc * tc * v.p_coll_b + ts * ts * ts * v.p_succ_b;
    return v;
}

double slot_transform(double s, const BackoffView& v, const SlotTiming& t) {
    return v.p_idle_b * std::exp(-s * t.t_idle_us()) + v.p_coll_b * std::exp(-s * t.t_coll_us()) +
           v.p_succ_b * std::exp(-s * t.t_succ_us());
}

double slot_transform_complement(double s, const BackoffView& v, const SlotTiming& t) {
    return -(v.p_idle_b * std::expm1(-s * t.t_idle_us()) + v.p_coll_b * std::expm1(-s * t.t_coll_us()) +
             v.p_succ_b * std::expm1(-s * t.t_succ_us()));
}

double countdown_pgf(int stage, const MacParams& mac, double z) {
    if (stage < 1) throw DomainError("countdown_pgf: stage must be >= 1");
    if (!(z >= 0.0 && z <= 1.0)) throw DomainError("countdown_pgf: z outside [0, 1]");
    const double w = mac.window(stage - 1);
    if (z == 1.0) return 1.0;
    if (z == 0.0) return 1.0 / w;
    // 1 - z^W through expm1 so huge windows neither overflow nor lose digits.
    return -std::expm1(w * std::log(z)) / (w * (1.0 - z));
}

namespace {

struct ClosedFormInputs {
    double a1, a2, a3, tc, ts, w0, r, p;
};

ClosedFormInputs inputs(const BackoffView& v, const Scenario& s) {
    return {v.a1_us,
            v.a2_us2,
            v.a3_us3,
            s.timing().t_coll_us(),
            s.timing().t_succ_us(),
            static_cast<double>(s.mac().w0()),
            s.mac().r(),
            v.p_c};
}

double first_moment(const ClosedFormInputs& c) {
    const double p = c.p, r = c.r, w0 = c.w0;
    return c.a1 * (w0 * (1 - p) - (1 - r * p)) / (2 * (1 - p) * (1 - r * p)) + c.tc * p / (1 - p) + c.ts;
}

double second_moment(const ClosedFormInputs& c) {
    const double p = c.p, r = c.r, w0 = c.w0, a1 = c.a1, tc = c.tc, ts = c.ts;
    const double q = 1 - p, q1 = 1 - r * p, q2 = 1 - r * r * p;
    const double t1 =
        a1 * a1 *
        (w0 * w0 / (12 * q2) - w0 / q1 + 5 / (12 * q) + w0 * w0 * (1 + r * p) / (4 * q1 * q2) -
         w0 * p * (1 + r - 2 * r * p) / (2 * q * q1 * q1) + (1 + p) / (4 * q * q));
    const double t2 = c.a2 * (w0 * q - q1) / (2 * q1 * q) + tc * tc * p * (1 + p) / (q * q) + ts * ts +
                      2 * a1 * tc * p * (w0 * (1 + r - 2 * r * p) / (2 * q * q1 * q1) - 1 / (q * q));
    const double t3 = a1 * ts * (w0 * q - q1) / (q1 * q) + 2 * tc * ts * p / q;
    return t1 + t2 + t3;
}

std::array<double, 3> third_moment_terms(const ClosedFormInputs& c) {
    const double p = c.p, r = c.r, w0 = c.w0, a1 = c.a1, a2 = c.a2, a3 = c.a3, tc = c.tc, ts = c.ts;
    const double q = 1 - p, q1 = 1 - r * p, q2 = 1 - r * r * p, q3 = 1 - r * r * r * p;
    const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2;
    const double p2 = p * p, p3 = p2 * p, p4 = p2 * p2;
    const double w02 = w0 * w0, w03 = w02 * w0;

    const double th1 = a1 * a1 * a1 / 4 * (-w02 / q2 + 4 * w0 / q1 - 3 / q) +
                       a1 * a2 / 4 * (w02 / q2 - 6 * w0 / q1 + 5 / q) + a3 / 2 * (w0 / q1 - 1 / q);

    const double th2 =
        a1 * a1 * a1 / 12 *
            (w03 * (1 - r3 * p2) / (2 * q1 * q2 * q3) - 3 * w02 * (1 + r * p) / (q1 * q2) +
             11 * w0 * (1 - r * p2) / (2 * q * q1 * q1) - w02 * (1 - r2 * p2) / (2 * q * q2 * q2) -
             5 * (1 + p) / (2 * q * q)) +
        a1 * a1 / 12 *
            (tc * (w02 * p * (1 + r2 - 2 * r2 * p) / (q * q2 * q2) - 6 * w0 * p * (1 + r - 2 * r * p) / (q * q1 * q1) +
                   10 * p / (q * q)) +
             ts * (w02 / q2 - 6 * w0 / q1 + 5 / q)) +
        a1 * a2 * (w02 / 4 * (1 + r * p) / (q1 * q2) - w0 / 2 * (1 - r * p2) / (q * q1 * q1) + (1 + p) / (4 * q * q)) +
        a2 * (tc * p / 2 * (w0 * (1 + r - 2 * r * p) * q - 2 * q1 * q1) / (q * q * q1 * q1) +
              ts / 2 * (w0 * q - q1) / (q * q1));

    const double cube_a1 =
        w03 / 8 * (1 + 2 * r * p + 2 * r2 * p + r3 * p2) / (q3 * q2 * q1) -
        3 * w02 / 8 * (1 + 2 * r * p - 2 * r * p2 - 2 * r2 * p2 - 2 * r3 * p2 + 2 * r3 * p3 + r4 * p4) /
            (q * q1 * q1 * q2 * q2) +
        3 * w0 / 8 * (1 - 6 * r * p2 + p * (1 + r) + r * p3 * (1 + r) + r2 * p4) / (q * q * q1 * q1 * q1) -
        (1 + 4 * p + p2) / (8 * q * q * q);
    const double no_backoff = tc * tc * tc * p * (1 + 4 * p + p2) / (q * q * q) +
                              3 * tc * tc * ts * p * (1 + p) / (q * q) + 3 * tc * ts * ts * p / q + ts * ts * ts;
    const double sq_a1 =
        tc * w02 / 4 * (p * (1 - r2 * p2) * (1 - 2 * r2 * p + r2) + 2 * r * p * q * q2) / (q * q1 * q1 * q2 * q2) -
        tc * w0 * p * (1 + r - 3 * r * p + r2 * p3) / (q * q * q1 * q1 * q1) + tc / 2 * p * (p + 2) / (q * q * q) +
        ts * w02 / 4 * (1 + r * p) / (q1 * q2) - ts * w0 / 2 * (1 - r * p2) / (q * q1 * q1) +
        ts / 4 * (1 + p) / (q * q);
    const double lin_a1 =
        tc * tc * w0 / 2 *
            (r * p - 2 * r * p2 - 3 * r * p3 + r2 * p2 + p + p2 - 3 * r2 * p3 + 4 * r2 * p4) /
            (q * q * q1 * q1 * q1) +
        ts * tc * w0 * p * (1 + r - 2 * r * p) / (q * q1 * q1) + ts * ts * w0 / 2 / q1 -
        tc * tc * p * (1 + 2 * p) / (q * q * q) - 2 * tc * ts * p / (q * q) - ts * ts / 2 / q;
    const double th3 = a1 * a1 * a1 * cube_a1 + no_backoff + 3 * a1 * a1 * sq_a1 + 3 * a1 * lin_a1;

    return {th1, th2, th3};
}

// Raw moments of the countdown time C at one stage: a uniform number of
// slots on {0..W-1}, each slot with raw moments A1..A3.
std::array<double, 4> stage_moments(double w, const BackoffView& v) {
    const double b1 = (w - 1) / 2;
    const double f2 = (w - 1) * (w - 2) / 3;
    const double f3 = (w - 1) * (w - 2) * (w - 3) / 4;
    const double a1 = v.a1_us, a2 = v.a2_us2, a3 = v.a3_us3;
    return {1.0, b1 * a1, b1 * a2 + f2 * a1 * a1, b1 * a3 + 3 * f2 * a1 * a2 + f3 * a1 * a1 * a1};
}

// Raw moments of X + Y for independent X, Y.
std::array<double, 4> convolve(const std::array<double, 4>& x, const std::array<double, 4>& y) {
    return {x[0] * y[0], x[1] + y[1], x[2] + 2 * x[1] * y[1] + y[2],
            x[3] + 3 * x[2] * y[1] + 3 * x[1] * y[2] + y[3]};
}

std::array<double, 4> shift(const std::array<double, 4>& x, double k) {
    return convolve(x, {1.0, k, k * k, k * k * k});
}

// Accumulates sum_j w_j E[X^n | R = j] for j = 1..max_attempts; stops early
// once `converged` says the remaining geometric tail is negligible.
template <typename Stop>
std::array<double, 4> series(const BackoffView& v, const Scenario& s, long max_attempts, Stop&& converged) {
    const double p = v.p_c;
    const double tc = s.timing().t_coll_us(), ts = s.timing().t_succ_us();
    std::array<double, 4> countdown{1.0, 0.0, 0.0, 0.0};
    std::array<double, 4> out{0.0, 0.0, 0.0, 0.0};
    double weight = 1.0 - p;
    for (long j = 1; j <= max_attempts; ++j) {
        const int stage = static_cast<int>(std::min<long>(j - 1, 1 << 20));
        countdown = convolve(countdown, stage_moments(s.mac().window(stage), v));
        const auto total = shift(countdown, static_cast<double>(j - 1) * tc + ts);
        for (int n = 0; n < 4; ++n) out[n] += weight * total[n];
        weight *= p;
        if (weight == 0.0 || converged(j, weight * total[3], out[3])) break;
    }
    return out;
}

MomentValue fin(double v) { return MomentValue::finite(v); }

}  // namespace

AccessMoments xne_moments(const BackoffView& v, const Scenario& s) {
    const auto c = inputs(v, s);
    const double r = c.r, p = c.p;
    AccessMoments out{MomentValue::divergent(), MomentValue::divergent(), MomentValue::divergent()};
    if (p * r < 1.0) out.m1 = fin(first_moment(c));
    if (p * r * r < 1.0) out.m2 = fin(second_moment(c));
    if (p * r * r * r < 1.0) {
        const auto th = third_moment_terms(c);
        out.m3 = fin(th[0] + 3 * th[1] + th[2]);
    }
    return out;
}

std::array<double, 3> xne_third_moment_terms(const BackoffView& v, const Scenario& s) {
    return third_moment_terms(inputs(v, s));
}

std::array<double, 4> xne_moment_series(const BackoffView& v, const Scenario& s, int max_attempts) {
    if (max_attempts < 1) throw DomainError("xne_moment_series: need at least one attempt");
    // Terms past the point where they stop contributing are skipped so that
    // huge windows at late stages cannot overflow a converged sum.
    return series(v, s, max_attempts, [](long j, double term, double acc) { return j > 8 && term <= 1e-18 * acc; });
}

RetryMoments xne_moments_retry(const BackoffView& v, const Scenario& s) {
    if (!s.mac().retry_limit()) throw InvalidArgument("xne_moments_retry: scenario has no retry limit");
    const int attempts = *s.mac().retry_limit() + 1;
    const auto sums = xne_moment_series(v, s, attempts);
    RetryMoments out{};
    out.loss_rate = std::pow(v.p_c, attempts);
    if (sums[0] <= 0.0) {
        // Every attempt collides: no packet ever gets through.
        out.m1 = out.m2 = out.m3 = MomentValue::divergent();
        return out;
    }
    out.m1 = fin(sums[1] / sums[0]);
    out.m2 = fin(sums[2] / sums[0]);
    out.m3 = fin(sums[3] / sums[0]);
    return out;
}

AccessMoments xne_moments_cwmax(const BackoffView& v, const Scenario& s) {
    const auto& mac = s.mac();
    if (!mac.cw_max()) throw InvalidArgument("xne_moments_cwmax: scenario has no window cap");
    if (mac.retry_limit()) {
        const auto rm = xne_moments_retry(v, s);
        return {rm.m1, rm.m2, rm.m3};
    }
    if (v.p_c >= 1.0) return {MomentValue::divergent(), MomentValue::divergent(), MomentValue::divergent()};
    const long growth = *mac.doubling_stages() + 1;
    const auto sums = series(v, s, 50'000'000L, [growth](long j, double term, double acc) {
        return j > growth && term <= 1e-17 * acc;
    });
    return {fin(sums[1]), fin(sums[2]), fin(sums[3])};
}

AccessMoments access_moments(const BackoffView& v, const Scenario& s) {
    if (s.mac().retry_limit()) {
        const auto rm = xne_moments_retry(v, s);
        return {rm.m1, rm.m2, rm.m3};
    }
    if (s.mac().cw_max()) return xne_moments_cwmax(v, s);
    return xne_moments(v, s);
}

namespace {

// log((1 - e^{-x}) / x) for x >= 0, accurate near zero.
double log_uniform_factor(double x) {
    if (x < 1e-3) return x * (-0.5 + x * (1.0 / 24.0 - x * x / 2880.0));
    if (std::isinf(x)) return -x;
    return std::log(-std::expm1(-x) / x);
}

struct TransformParts {
    double value;
    double complement;
};

TransformParts transform_parts(double s, const BackoffView& v, const Scenario& sc, int truncation) {
    if (!(s >= 0.0)) throw DomainError("xne_transform: s must be >= 0");
    if (truncation < 1) throw DomainError("xne_transform: truncation must be >= 1");
    long attempts = truncation;
    if (sc.mac().retry_limit()) attempts = std::min<long>(attempts, *sc.mac().retry_limit() + 1);
    const double p = v.p_c;
    const double tc = sc.timing().t_coll_us(), ts = sc.timing().t_succ_us();
    const double u = slot_transform_complement(s, v, sc.timing());
    // The slot transform is z = exp(-nu); each stage contributes
    // log B(z) = phi(W nu) - phi(nu) with phi(x) = log((1 - e^{-x}) / x).
    const double nu = u >= 1.0 ? INFINITY : -std::log1p(-u);
    const double phi_nu = log_uniform_factor(nu);
    double log_stages = 0.0;
    double weight = 1.0 - p, mass = 0.0, value = 0.0, complement = 0.0;
    for (long j = 1; j <= attempts && weight > 0.0; ++j) {
        const double w = sc.mac().window(static_cast<int>(j - 1));
        if (nu > 0.0) log_stages += log_uniform_factor(w * nu) - phi_nu;
        const double log_g = -s * (static_cast<double>(j - 1) * tc + ts) + log_stages;
        mass += weight;
        value += weight * std::exp(log_g);
        complement += weight * -std::expm1(log_g);
        weight *= p;
    }
    if (mass <= 0.0) return {0.0, 1.0};
    return {value / mass, complement / mass};
}

}  // namespace

double xne_transform(double s, const BackoffView& v, const Scenario& sc, int truncation) {
    return transform_parts(s, v, sc, truncation).value;
}

double xne_transform_complement(double s, const BackoffView& v, const Scenario& sc, int truncation) {
    return transform_parts(s, v, sc, truncation).complement;
}

double xne_transform_tail_bound(const BackoffView& v, const Scenario& sc, int truncation) {
    if (sc.mac().retry_limit() && *sc.mac().retry_limit() + 1 <= truncation) return 0.0;
    return std::pow(v.p_c, truncation);
}

VacationMoments vacation_moments(const BackoffView& v) {
    if (!(v.a1_us > 0.0)) throw DomainError("vacation_moments: A1 must be > 0");
    return {v.a2_us2 / (2 * v.a1_us), v.a3_us3 / (3 * v.a1_us)};
}

DelayReport delay_stats(const Scenario& s, double tau) {
    DelayReport d{};
    d.view = backoff_view(tau, s);
    const auto m = access_moments(d.view, s);
    d.xne_m1 = m.m1;
    d.xne_m2 = m.m2;
    d.xne_m3 = m.m3;
    d.loss_rate = s.mac().retry_limit() ? std::pow(d.view.p_c, *s.mac().retry_limit() + 1) : 0.0;
    const auto y = vacation_moments(d.view);
    d.e_y_us = y.e_y_us;
    d.e_y2_us2 = y.e_y2_us2;

    const double lambda = s.lambda_per_us();
    d.rho_tilde = m.m1.is_finite() ? lambda * m.m1.value() : INFINITY;
    d.stable = d.rho_tilde < 1.0;
    if (!d.stable) {
        d.rho = 1.0;
        d.e_d_us = d.var_d_us2 = MomentValue::divergent();
        return d;
    }
    if (lambda == 0.0) {
        d.rho = 0.0;
    } else {
        const double idle = slot_transform_complement(lambda, d.view, s.timing()) / (lambda * d.view.a1_us);
        d.rho = 1.0 - (1.0 - d.rho_tilde) * idle;
    }
    const double slack = 1.0 - d.rho_tilde;
    if (m.m2.is_finite()) {
        d.e_d_us = fin(m.m1.value() + y.e_y_us + lambda * m.m2.value() / (2 * slack));
    } else {
        d.e_d_us = MomentValue::divergent();
    }
    if (m.m2.is_finite() && m.m3.is_finite()) {
        const double m1 = m.m1.value(), m2 = m.m2.value(), m3 = m.m3.value();
        const double var_x = m2 - m1 * m1;
        const double var_y = y.e_y2_us2 - y.e_y_us * y.e_y_us;
        d.var_d_us2 = fin(var_x + var_y + lambda * lambda * m2 * m2 / (4 * slack * slack) +
                          lambda * m3 / (3 * slack));
    } else {
        d.var_d_us2 = MomentValue::divergent();
    }
    return d;
}

double delay_transform(double s, const Scenario& sc, double tau, int truncation) {
    if (!(s >= 0.0)) throw DomainError("delay_transform: s must be >= 0");
    const auto view = backoff_view(tau, sc);
    const auto m = access_moments(view, sc);
    const double lambda = sc.lambda_per_us();
    const double rho_tilde = m.m1.is_finite() ? lambda * m.m1.value() : INFINITY;
    if (!(rho_tilde < 1.0)) throw DomainError("delay_transform: queue is unstable (rho_tilde >= 1)");
    if (s == 0.0) return 1.0;
    const auto x = transform_parts(s, view, sc, truncation);
    const double s_y = slot_transform_complement(s, view, sc.timing()) / view.a1_us;
    return (1.0 - rho_tilde) * x.value * s_y / (s - lambda * x.complement);
}

double queue_length_pgf(double z, const Scenario& sc, double tau, int truncation) {
    if (!(z >= 0.0 && z <= 1.0)) throw DomainError("queue_length_pgf: z outside [0, 1]");
    return delay_transform(sc.lambda_per_us() * (1.0 - z), sc, tau, truncation);
}

}  // namespace wlancap
