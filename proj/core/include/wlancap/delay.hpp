#pragma once

#include <array>

#include "wlancap/model.hpp"
#include "wlancap/moment.hpp"

namespace wlancap {

/// The channel as seen by a tagged station while it counts down: outcomes
/// of the other n - 1 stations and the raw moments of one countdown slot.
struct BackoffView {
    double p_idle_b;
    double p_coll_b;
    double p_succ_b;
    double p_c;
    double a1_us;
    double a2_us2;
    double a3_us3;
};

BackoffView backoff_view(double tau, const Scenario& scenario);

/// Laplace transform of one countdown slot, E[exp(-s L)], s in 1/us.
double slot_transform(double s, const BackoffView& view, const SlotTiming& timing);

/// 1 - slot_transform(s), computed without cancellation for small s.
double slot_transform_complement(double s, const BackoffView& view, const SlotTiming& timing);

/// PGF of the countdown drawn uniformly from {0, ..., W_i - 1} at 1-based
/// stage i. Windows beyond 2^63 are handled in log space.
double countdown_pgf(int stage, const MacParams& mac, double z);

/// First three raw moments of the medium-access delay (us, us^2, us^3).
struct AccessMoments {
    MomentValue m1;
    MomentValue m2;
    MomentValue m3;
};

/// Closed-form moments for unbounded retries and no window cap. The n-th
/// moment is divergent iff p_c * r^n >= 1. Any retry limit or window cap in
/// the scenario is ignored here; see access_moments().
AccessMoments xne_moments(const BackoffView& view, const Scenario& scenario);

/// Component terms of the closed-form third moment, m3 = t1 + 3 t2 + t3.
/// Exposed for testing; valid only when p_c r^3 < 1.
std::array<double, 3> xne_third_moment_terms(const BackoffView& view, const Scenario& scenario);

struct RetryMoments {
    MomentValue m1;
    MomentValue m2;
    MomentValue m3;
    /// Probability that a packet exhausts all K + 1 attempts.
    double loss_rate;
};

/// Moments with a retry limit K, conditioned on the packet getting through.
/// Exact finite sum over attempts 1..K+1 with all cross terms; always finite.
RetryMoments xne_moments_retry(const BackoffView& view, const Scenario& scenario);

/// Moments with a contention-window cap (no retry limit). Exact series over
/// stages; finite for every p_c < 1.
AccessMoments xne_moments_cwmax(const BackoffView& view, const Scenario& scenario);

/// Moments for whatever backoff variant the scenario describes: retry limit,
/// window cap, or the unbounded closed forms.
AccessMoments access_moments(const BackoffView& view, const Scenario& scenario);

/// Exact moments by direct summation over the number of attempts, for a
/// fixed number of stages. Used by the retry and cap variants; with enough
/// stages it also reproduces the unbounded closed forms.
/// Returns unnormalised partial sums of Pr{R=j} E[X^n | R=j] for n = 0..3.
std::array<double, 4> xne_moment_series(const BackoffView& view, const Scenario& scenario,
                                        int max_attempts);

/// Default number of attempt stages kept in transform evaluations.
inline constexpr int kDefaultTruncation = 200;

/// Transform E[exp(-s X_ne)] truncated to `truncation` attempts, with the
/// attempt distribution renormalised over the kept support.
double xne_transform(double s, const BackoffView& view, const Scenario& scenario,
                     int truncation = kDefaultTruncation);

/// 1 - xne_transform(s), evaluated stably near s = 0.
double xne_transform_complement(double s, const BackoffView& view, const Scenario& scenario,
                                int truncation = kDefaultTruncation);

/// Probability mass of the attempts dropped by truncation, p_c^J (zero with
/// a retry limit below J). Bounds the truncation error of xne_transform.
double xne_transform_tail_bound(const BackoffView& view, const Scenario& scenario, int truncation);

struct VacationMoments {
    double e_y_us;
    double e_y2_us2;
};

/// Forward-recurrence moments of a vacation slot: A2/(2 A1) and A3/(3 A1).
VacationMoments vacation_moments(const BackoffView& view);

struct DelayReport {
    BackoffView view;
    MomentValue xne_m1;
    MomentValue xne_m2;
    MomentValue xne_m3;
    double e_y_us;
    double e_y2_us2;
    /// lambda * E[X_ne]; +inf when the mean service time diverges.
    double rho_tilde;
    /// Time-average probability that the queue is non-empty. Equals 1 when
    /// the queue is unstable.
    double rho;
    bool stable;
    MomentValue e_d_us;
    MomentValue var_d_us2;
    /// Packet loss probability (retry-limited scenarios, else 0).
    double loss_rate;
};

/// Delay and utilisation of the tagged queue at attempt probability tau with
/// the scenario's per-station arrival rate.
DelayReport delay_stats(const Scenario& scenario, double tau);

/// Transform of the packet delay D (queueing plus access), s in 1/us.
/// Requires rho_tilde < 1; returns 1 at s = 0.
double delay_transform(double s, const Scenario& scenario, double tau,
                       int truncation = kDefaultTruncation);

/// PGF of the number of packets at the tagged station, D*(lambda - lambda z).
double queue_length_pgf(double z, const Scenario& scenario, double tau,
                        int truncation = kDefaultTruncation);

}  // namespace wlancap
