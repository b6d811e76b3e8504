#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wlancap/model.hpp"

namespace wlancap {

/// What the simulator records beyond the always-on counters.
struct CollectFlags {
    /// Keep every packet delay and medium-access delay (up to max_samples).
    bool delay_samples = false;
    /// Tally collisions by backoff stage and by queue occupancy.
    bool pc_by_state = false;
    /// Histogram of queue length seen by arriving packets.
    bool queue_samples = false;

    static CollectFlags parse(std::string_view comma_list);
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::int64_t total_slots = 1'000'000;
    std::int64_t warmup_slots = 0;
    CollectFlags collect{};
    /// Every station always has a packet; arrivals are not simulated.
    bool saturated = false;
    /// Cap on stored samples per list; moments keep streaming beyond it.
    std::size_t max_samples = 5'000'000;

    void validate() const;
};

/// Running raw moments of a sample.
struct StreamingMoments {
    std::uint64_t count = 0;
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;

    void add(double x) {
        ++count;
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
    }
    double mean() const { return count ? s1 / count : 0.0; }
    double raw2() const { return count ? s2 / count : 0.0; }
    double raw3() const { return count ? s3 / count : 0.0; }
    double variance() const { return raw2() - mean() * mean(); }
};

struct CollisionTally {
    std::uint64_t attempts = 0;
    std::uint64_t collisions = 0;

    double ratio() const { return attempts ? static_cast<double>(collisions) / attempts : 0.0; }
};

struct SimResult {
    std::int64_t slots = 0;           ///< measured slots (after warmup)
    double elapsed_us = 0.0;          ///< measured time (after warmup)
    std::uint64_t delivered = 0;      ///< successes after warmup
    std::uint64_t dropped = 0;        ///< retry-limit drops after warmup
    std::uint64_t transmissions = 0;  ///< attempts after warmup
    std::uint64_t collided = 0;       ///< failed attempts after warmup

    double throughput_pps = 0.0;
    double packets_per_slot = 0.0;
    /// Transmissions per station per slot.
    double tau_measured = 0.0;
    /// Fraction of station-slots that begin with a non-empty queue.
    double rho_measured = 0.0;
    /// Time-average fraction of stations with a non-empty queue. Exceeds
    /// rho_measured by the partial slots between an arrival to an empty queue
    /// and the next slot boundary.
    double rho_time_measured = 0.0;
    /// Transmissions per station-slot that began with a non-empty queue.
    double p_t_measured = 0.0;
    double p_c_overall = 0.0;
    double loss_rate = 0.0;

    /// Packet delay (arrival to end of successful slot), packets arriving after warmup.
    StreamingMoments delay;
    /// Medium-access delay of packets that became head of line at a departure.
    StreamingMoments access_ne;
    /// Medium-access delay of packets that arrived to an empty queue.
    StreamingMoments access_e;
    /// Residual of the slot in progress when a packet arrives to an empty queue.
    StreamingMoments residual;

    std::vector<double> delay_samples;
    std::vector<double> access_samples;

    /// Indexed by 0-based backoff stage at the attempt.
    std::vector<CollisionTally> pc_by_stage;
    /// Indexed by queue length at the attempt (1..); the last bucket is open.
    std::vector<CollisionTally> pc_by_occupancy;
    /// Count of arrivals that found q packets at their station; last bucket open.
    std::vector<std::uint64_t> queue_histogram;

    // Whole-run accounting, warmup included.
    std::uint64_t total_arrivals = 0;
    std::uint64_t total_delivered = 0;
    std::uint64_t total_dropped = 0;
    std::uint64_t final_queued = 0;
};

/// Runs the slotted network: in each slot every contending station whose
/// backoff expires transmits; up to M simultaneous transmissions succeed,
/// more collide. Identical inputs give bit-identical results.
SimResult run(const Scenario& scenario, const SimConfig& config);

struct PcBucket {
    int key;
    CollisionTally tally;
    bool low_confidence;  ///< fewer than 100 attempts
};

struct PcByState {
    std::vector<PcBucket> by_stage;
    std::vector<PcBucket> by_occupancy;
    /// Population variance of p_c across buckets with at least 100 attempts.
    double stage_variance;
    double occupancy_variance;
};

/// Collision probability partitioned by backoff stage and queue occupancy.
PcByState measure_pc_by_state(const Scenario& scenario, SimConfig config);

PcByState summarize_pc(const SimResult& result);

/// Simulator window at a 0-based stage: round(W0 r^stage), at least 1,
/// clamped to cw_max.
std::uint64_t sim_window(const MacParams& mac, int stage);

/// Bucket count for pc_by_occupancy and queue_histogram.
inline constexpr int kOccupancyBuckets = 32;
/// Bucket count for pc_by_stage.
inline constexpr int kStageBuckets = 64;

}  // namespace wlancap
