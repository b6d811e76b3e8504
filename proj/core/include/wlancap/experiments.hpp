#pragma once

#include <cstdint>
#include <vector>

#include "wlancap/model.hpp"
#include "wlancap/simulator.hpp"

namespace wlancap {

struct CollapseRow {
    double offered_pps;
    std::int64_t run_slots;
    std::uint64_t seed;
    double throughput_pps;
};

/// Measured throughput for every (offered load, run length, seed) cell.
/// Runs start from empty queues with no warmup, so short runs above the
/// saturation throughput can still look sustainable. Rows follow input order
/// (loads outermost, then run lengths, then seeds).
std::vector<CollapseRow> collapse_experiment(const Scenario& scenario, const std::vector<double>& offered_pps,
                                             const std::vector<std::int64_t>& run_slots,
                                             const std::vector<std::uint64_t>& seeds, unsigned threads = 1);

struct DispersionStats {
    std::vector<double> run_means_us;
    double mean_us;
    double stddev_us;
    /// Coefficient of variation of the per-run sample means.
    double cov;
};

struct ImmeasurabilityReport {
    /// Per-run sample mean of the packet delay.
    DispersionStats delay;
    /// Per-run sample mean of the medium-access delay (head of line after a departure).
    DispersionStats access;
};

/// Spread of per-run sample-mean delays across independent seeds
/// (first_seed, first_seed + 1, ...).
ImmeasurabilityReport immeasurability_probe(const Scenario& scenario, int runs, std::int64_t run_slots,
                                            std::int64_t warmup_slots, std::uint64_t first_seed,
                                            unsigned threads = 1);

DispersionStats dispersion(std::vector<double> values);

}  // namespace wlancap
