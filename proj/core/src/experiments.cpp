#include "wlancap/experiments.hpp"

#include <cmath>

#include "wlancap/error.hpp"
#include "wlancap/parallel.hpp"

namespace wlancap {

std::vector<CollapseRow> collapse_experiment(const Scenario& s, const std::vector<double>& offered_pps,
                                             const std::vector<std::int64_t>& run_slots,
                                             const std::vector<std::uint64_t>& seeds, unsigned threads) {
    std::vector<CollapseRow> rows;
    for (double load : offered_pps) {
        for (auto slots : run_slots) {
            for (auto seed : seeds) rows.push_back({load, slots, seed, 0.0});
        }
    }
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        auto& row = rows[i];
        SimConfig cfg;
        cfg.seed = row.seed;
        cfg.total_slots = row.run_slots;
        row.throughput_pps = run(s.with_offered_load(row.offered_pps), cfg).throughput_pps;
    });
    return rows;
}

DispersionStats dispersion(std::vector<double> values) {
    DispersionStats d{std::move(values), 0.0, 0.0, 0.0};
    if (d.run_means_us.empty()) return d;
    double sum = 0.0;
    for (double v : d.run_means_us) sum += v;
    d.mean_us = sum / d.run_means_us.size();
    double ss = 0.0;
    for (double v : d.run_means_us) ss += (v - d.mean_us) * (v - d.mean_us);
    if (d.run_means_us.size() > 1) d.stddev_us = std::sqrt(ss / (d.run_means_us.size() - 1));
    d.cov = d.mean_us > 0.0 ? d.stddev_us / d.mean_us : 0.0;
    return d;
}

ImmeasurabilityReport immeasurability_probe(const Scenario& s, int runs, std::int64_t run_slots,
                                            std::int64_t warmup_slots, std::uint64_t first_seed,
                                            unsigned threads) {
    if (runs < 2) throw InvalidArgument("immeasurability_probe: need at least two runs");
    std::vector<double> delay(runs), access(runs);
    parallel_for(static_cast<std::size_t>(runs), threads, [&](std::size_t i) {
        SimConfig cfg;
        cfg.seed = first_seed + i;
        cfg.total_slots = run_slots;
        cfg.warmup_slots = warmup_slots;
        const auto r = run(s, cfg);
        delay[i] = r.delay.mean();
        access[i] = r.access_ne.mean();
    });
    return {dispersion(std::move(delay)), dispersion(std::move(access))};
}

}  // namespace wlancap
