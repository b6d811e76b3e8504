#pragma once

#include <string_view>
#include <vector>

#include "wlancap/model.hpp"

namespace wlancap {

/// Pr{X = k}: probability that exactly k of n stations transmit in a slot
/// when each transmits independently with probability tau.
double prob_x_eq_k(double tau, int n, int k);

/// Idle/collision/success probabilities of a generic slot under MPR
/// capability M: up to M simultaneous transmissions all succeed, more than
/// M all collide.
GenericSlotProbs generic_slot_probs(double tau, const Scenario& scenario);

/// Mean slot duration (us) of a generic slot at attempt probability tau.
double mean_generic_slot_us(double tau, const Scenario& scenario);

/// Network throughput in bits per second at attempt probability tau.
double throughput(double tau, const Scenario& scenario);

/// Network throughput in packets per second.
double throughput_pps(double tau, const Scenario& scenario);

/// Probability that a transmission of the tagged station collides, i.e.
/// that M or more of the other n - 1 stations transmit in the same slot.
double conditional_collision_prob(double tau, int n, int m);

/// Saturated attempt probability as a function of the conditional collision
/// probability: attempts per packet over backoff slots per packet. Without a
/// retry limit or window cap this is 2(1 - r p)/(W0(1 - p) + 1 - r p); returns
/// 0 when the unbounded backoff no longer returns (r p >= 1).
double saturation_attempt_prob(double p_c, const MacParams& mac);

struct ThroughputPeak {
    double tau_star;
    double s_star_bps;
};

/// Maximiser of throughput() over tau. Coarse grid followed by golden-section
/// refinement to 1e-10 in tau.
ThroughputPeak optimal_tau(const Scenario& scenario);

/// Saturation operating point tau_s: root of tau = saturation_attempt_prob(p_c(tau)).
/// Damped iteration (factor 0.5) with a bisection fallback.
double saturation_tau(const Scenario& scenario);

/// Same fixed point, solved by bisection on the residual only.
double saturation_tau_bisection(const Scenario& scenario);

enum class RootKind { Left, Right, Saturated };

std::string_view to_string(RootKind kind);

struct OperatingPoint {
    double tau;
    RootKind root_kind;
    /// A steady state exists at this point iff tau < tau_s.
    bool stable;
};

/// All tau in (0, 1) at which throughput equals the offered load N*lambda,
/// ascending. Zero roots means the load exceeds the peak throughput; a load
/// equal to the peak yields the single tangent root tau*.
std::vector<OperatingPoint> nonsaturation_roots(const Scenario& scenario);

/// Like nonsaturation_roots, with tau_s supplied by the caller.
std::vector<OperatingPoint> nonsaturation_roots(const Scenario& scenario, double tau_s);

/// The left (lowest-contention) stable root for the scenario's load, if any.
/// Throws NoRootError when the load has no stable operating point.
OperatingPoint stable_operating_point(const Scenario& scenario);

/// Grid used for bracketing roots and maxima: 2048 points on [0, 1],
/// quadratically denser near zero where large networks operate.
const std::vector<double>& tau_grid();

}  // namespace wlancap
