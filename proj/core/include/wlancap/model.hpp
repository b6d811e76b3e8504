#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace wlancap {

/// How slot durations are derived from the PHY/MAC timing components.
enum class AccessModel {
    EqualSlot,  ///< idle = collision = success = H + PL/rate (ALOHA-like)
    Basic,      ///< DCF basic access
    RtsCts,     ///< DCF RTS/CTS handshake
    Custom,     ///< durations given directly
};

std::string_view to_string(AccessModel model);
AccessModel access_model_from_string(std::string_view name);

/// PHY/MAC timing parameters. Durations in microseconds, sizes in bits,
/// rates in bits per second.
struct TimingComponents {
    double phy_header_us = 20.0;
    double mac_header_bits = 244.0;
    double data_rate_bps = 6.0e6;
    double payload_bits = 8184.0;
    double difs_us = 34.0;
    double sifs_us = 16.0;
    double mini_slot_us = 9.0;
    double ack_bits = 112.0;
    double rts_bits = 160.0;
    double cts_bits = 112.0;
    double propagation_us = 0.0;

    /// Throws InvalidArgument unless every field is strictly positive
    /// (propagation may be zero).
    void validate() const;

    /// PHY + MAC header time.
    double header_us() const { return phy_header_us + mac_header_bits * 1e6 / data_rate_bps; }
    double payload_us() const { return payload_bits * 1e6 / data_rate_bps; }
    double bits_us(double bits) const { return bits * 1e6 / data_rate_bps; }
};

/// The parameter set of the 6 Mbps reference system (1000-byte packets).
TimingComponents reference_components();

/// Durations of the three kinds of channel slot, in microseconds.
class SlotTiming {
public:
    SlotTiming(double t_idle_us, double t_coll_us, double t_succ_us,
               AccessModel model = AccessModel::Custom);

    double t_idle_us() const { return t_idle_; }
    double t_coll_us() const { return t_coll_; }
    double t_succ_us() const { return t_succ_; }
    AccessModel model() const { return model_; }

    bool operator==(const SlotTiming&) const = default;

private:
    double t_idle_;
    double t_coll_;
    double t_succ_;
    AccessModel model_;
};

/// Options for make_slot_timing beyond the access model.
struct SlotTimingOptions {
    /// Add the propagation delay once to the collision and success slots.
    bool include_propagation = false;
};

/// Slot durations for the requested access model.
///
/// basic:   idle = sigma, coll = H + PL/R + DIFS, succ = H + PL/R + SIFS + ACK + DIFS
/// rts-cts: idle = sigma, coll = RTS + DIFS, succ = RTS + CTS + H + PL/R + 3 SIFS + ACK + DIFS
/// equal:   all three = H + PL/R
///
/// Control frames (ACK/RTS/CTS) are timed at data_rate_bps.
SlotTiming make_slot_timing(const TimingComponents& components, AccessModel model,
                            SlotTimingOptions options = {});

/// Exponential-backoff parameters: W_i = r^i * w0, optionally capped by cw_max
/// and bounded by a retry limit K.
class MacParams {
public:
    explicit MacParams(int w0 = 16, double r = 2.0, std::optional<int> retry_limit = std::nullopt,
                       std::optional<double> cw_max = std::nullopt);

    int w0() const { return w0_; }
    double r() const { return r_; }
    const std::optional<int>& retry_limit() const { return retry_limit_; }
    const std::optional<double>& cw_max() const { return cw_max_; }

    /// Backoff stages (0-based) that still multiply the window; stages beyond
    /// use cw_max. Equals log_r(cw_max / w0); empty without a cap.
    std::optional<int> doubling_stages() const { return doubling_stages_; }

    /// Contention window after `stage` consecutive failures (stage >= 0),
    /// as a real number (non-integer for non-integer r).
    double window(int stage) const;

    MacParams with_r(double r) const;

    bool operator==(const MacParams&) const = default;

private:
    int w0_;
    double r_;
    std::optional<int> retry_limit_;
    std::optional<double> cw_max_;
    std::optional<int> doubling_stages_;
};

/// Complete network description: N stations, MPR capability M, per-station
/// Poisson arrival rate, payload size, slot timing and backoff parameters.
class Scenario {
public:
    Scenario(int n, int m, double lambda_pps, double payload_bits, SlotTiming timing, MacParams mac);

    int n() const { return n_; }
    /// MPR capability, clamped to n.
    int m() const { return m_; }
    double lambda_pps() const { return lambda_; }
    /// Per-station arrival rate in packets per microsecond.
    double lambda_per_us() const { return lambda_ * 1e-6; }
    double offered_load_pps() const { return lambda_ * n_; }
    double payload_bits() const { return payload_bits_; }
    const SlotTiming& timing() const { return timing_; }
    const MacParams& mac() const { return mac_; }

    Scenario with_lambda(double lambda_pps) const;
    Scenario with_offered_load(double total_pps) const { return with_lambda(total_pps / n_); }
    Scenario with_m(int m) const;
    Scenario with_n(int n) const;
    Scenario with_mac(MacParams mac) const;
    Scenario with_r(double r) const { return with_mac(mac_.with_r(r)); }

private:
    int n_;
    int m_;
    double lambda_;
    double payload_bits_;
    SlotTiming timing_;
    MacParams mac_;
};

/// Reference scenario built from reference_components(): N = 50, M = 1,
/// W0 = 16, r = 2, no retry limit, no window cap, zero load.
Scenario reference_scenario(AccessModel model, int n = 50, int m = 1);

/// Probabilities that a generic slot is idle, a collision or a success.
struct GenericSlotProbs {
    double tau;
    double p_idle;
    double p_coll;
    double p_succ;
};

}  // namespace wlancap
