#include "wlancap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "wlancap/error.hpp"
#include "wlancap/rng.hpp"

namespace wlancap {

CollectFlags CollectFlags::parse(std::string_view list) {
    CollectFlags f;
    std::string item;
    std::stringstream ss{std::string(list)};
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "delay-samples") {
            f.delay_samples = true;
        } else if (item == "pc-by-state") {
            f.pc_by_state = true;
        } else if (item == "queue-samples") {
            f.queue_samples = true;
        } else if (item == "throughput") {
            // Always collected; accepted for symmetry with the other flags.
        } else {
            throw InvalidArgument("unknown collect flag '" + item + "'");
        }
    }
    return f;
}

void SimConfig::validate() const {
    if (total_slots <= 0) throw InvalidArgument("total_slots must be > 0");
    if (warmup_slots < 0 || warmup_slots >= total_slots) {
        throw InvalidArgument("warmup_slots must be in [0, total_slots)");
    }
}

std::uint64_t sim_window(const MacParams& mac, int stage) {
    constexpr double kCap = 0x1.0p62;
    double w = mac.w0() * std::pow(mac.r(), stage);
    if (mac.cw_max()) w = std::min(w, *mac.cw_max());
    w = std::min(std::round(w), kCap);
    return static_cast<std::uint64_t>(std::max(w, 1.0));
}

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

struct Station {
    std::deque<double> queue;  // arrival times, head of line first
    int stage = 0;
    std::int64_t next_tx = kNever;
    double hol_start = 0.0;
    bool hol_after_departure = false;
    double busy_since = 0.0;
    std::int64_t eligible_from = 0;
};

class Engine {
public:
    Engine(const Scenario& s, const SimConfig& cfg)
        : s_(s), cfg_(cfg), rngs_(make_streams(cfg.seed, static_cast<std::size_t>(s.n()) + 1)),
          stations_(static_cast<std::size_t>(s.n())) {
        res_.pc_by_stage.assign(kStageBuckets, {});
        res_.pc_by_occupancy.assign(kOccupancyBuckets, {});
        res_.queue_histogram.assign(kOccupancyBuckets, 0);
        arrival_rate_ = s.n() * s.lambda_per_us();
        measuring_ = cfg.warmup_slots == 0;
        warm_time_ = measuring_ ? 0.0 : std::numeric_limits<double>::infinity();
        next_arrival_ = arrival_rate_ > 0.0 && !cfg.saturated ? arrivals().exponential(arrival_rate_)
                                                             : std::numeric_limits<double>::infinity();
        if (cfg.saturated) {
            for (std::size_t i = 0; i < stations_.size(); ++i) {
                auto& st = stations_[i];
                st.queue.push_back(0.0);
                st.hol_start = 0.0;
                st.next_tx = draw(i, 0);
                st.busy_since = 0.0;
                st.eligible_from = 0;
            }
        }
    }

    SimResult run() {
        const auto& tm = s_.timing();
        std::vector<std::size_t> tx;
        std::vector<std::size_t> tx_queue_len;
        while (t_ < cfg_.total_slots) {
            if (!measuring_ && t_ == cfg_.warmup_slots) start_measuring();

            // Jump over slots in which nobody transmits and nobody arrives.
            std::int64_t t_min = kNever;
            for (const auto& st : stations_) t_min = std::min(t_min, st.next_tx);
            std::int64_t limit = (measuring_ ? cfg_.total_slots : cfg_.warmup_slots) - t_;
            if (t_min != kNever) limit = std::min(limit, t_min - t_);
            const double until_arrival = (next_arrival_ - clock_) / tm.t_idle_us();
            if (until_arrival < static_cast<double>(limit)) {
                limit = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(until_arrival)));
            }
            if (limit > 0) {
                if (measuring_) res_.slots += limit;
                t_ += limit;
                clock_ += static_cast<double>(limit) * tm.t_idle_us();
                continue;
            }

            tx.clear();
            tx_queue_len.clear();
            for (std::size_t i = 0; i < stations_.size(); ++i) {
                if (stations_[i].next_tx == t_) {
                    tx.push_back(i);
                    tx_queue_len.push_back(stations_[i].queue.size());
                }
            }
            const int k = static_cast<int>(tx.size());
            const bool success = k >= 1 && k <= s_.m();
            const double duration = k == 0 ? tm.t_idle_us() : (success ? tm.t_succ_us() : tm.t_coll_us());
            const double end = clock_ + duration;

            while (next_arrival_ < end) {
                const auto who = static_cast<std::size_t>(arrivals().below(stations_.size()));
                arrive(who, next_arrival_, end);
                next_arrival_ += arrivals().exponential(arrival_rate_);
            }

            for (std::size_t j = 0; j < tx.size(); ++j) {
                const auto i = tx[j];
                auto& st = stations_[i];
                if (measuring_) {
                    ++res_.transmissions;
                    if (!success) ++res_.collided;
                    if (cfg_.collect.pc_by_state) {
                        auto& by_stage = res_.pc_by_stage[std::min(st.stage, kStageBuckets - 1)];
                        auto& by_occ = res_.pc_by_occupancy[std::min<std::size_t>(tx_queue_len[j], kOccupancyBuckets - 1)];
                        ++by_stage.attempts;
                        ++by_occ.attempts;
                        if (!success) {
                            ++by_stage.collisions;
                            ++by_occ.collisions;
                        }
                    }
                }
                if (success) {
                    deliver(i, end);
                } else {
                    ++st.stage;
                    const auto& limit_k = s_.mac().retry_limit();
                    if (limit_k && st.stage > *limit_k) {
                        ++res_.total_dropped;
                        if (measuring_) ++res_.dropped;
                        depart(i, end);
                    } else {
                        st.next_tx = t_ + 1 + draw(i, st.stage);
                    }
                }
            }

            if (measuring_) ++res_.slots;
            clock_ = end;
            ++t_;
        }
        return finish();
    }

private:
    Rng& arrivals() { return rngs_.back(); }

    std::int64_t draw(std::size_t i, int stage) {
        return static_cast<std::int64_t>(rngs_[i].below(sim_window(s_.mac(), stage)));
    }

    void start_measuring() {
        measuring_ = true;
        warm_time_ = clock_;
        for (auto& st : stations_) {
            if (st.queue.empty()) continue;
            st.busy_since = std::max(st.busy_since, clock_);
            st.eligible_from = std::max(st.eligible_from, t_);
        }
    }

    void arrive(std::size_t i, double at, double slot_end) {
        auto& st = stations_[i];
        ++res_.total_arrivals;
        if (measuring_ && cfg_.collect.queue_samples) {
            ++res_.queue_histogram[std::min<std::size_t>(st.queue.size(), kOccupancyBuckets - 1)];
        }
        const bool was_empty = st.queue.empty();
        st.queue.push_back(at);
        if (!was_empty) return;
        // Backoff starts at the slot boundary that follows the arrival.
        st.stage = 0;
        st.hol_start = at;
        st.hol_after_departure = false;
        st.next_tx = t_ + 1 + draw(i, 0);
        st.busy_since = at;
        st.eligible_from = t_ + 1;
        if (measuring_) res_.residual.add(slot_end - at);
    }

    void deliver(std::size_t i, double end) {
        auto& st = stations_[i];
        ++res_.total_delivered;
        if (measuring_) ++res_.delivered;
        const double arrived = st.queue.front();
        if (st.hol_start >= warm_time_) {
            const double access = end - st.hol_start;
            (st.hol_after_departure ? res_.access_ne : res_.access_e).add(access);
            if (cfg_.collect.delay_samples && res_.access_samples.size() < cfg_.max_samples) {
                res_.access_samples.push_back(access);
            }
        }
        if (!cfg_.saturated && arrived >= warm_time_) {
            res_.delay.add(end - arrived);
            if (cfg_.collect.delay_samples && res_.delay_samples.size() < cfg_.max_samples) {
                res_.delay_samples.push_back(end - arrived);
            }
        }
        depart(i, end);
    }

    // Removes the head-of-line packet and starts the next one, if any.
    void depart(std::size_t i, double end) {
        auto& st = stations_[i];
        st.queue.pop_front();
        if (cfg_.saturated) st.queue.push_back(end);
        st.stage = 0;
        if (st.queue.empty()) {
            if (measuring_) {
                busy_time_ += end - st.busy_since;
                contend_slots_ += t_ - st.eligible_from + 1;
            }
            st.next_tx = kNever;
            return;
        }
        st.hol_start = end;
        st.hol_after_departure = true;
        st.next_tx = t_ + 1 + draw(i, 0);
    }

    SimResult finish() {
        for (auto& st : stations_) {
            if (st.queue.empty()) continue;
            res_.final_queued += st.queue.size();
            busy_time_ += clock_ - st.busy_since;
            contend_slots_ += t_ - st.eligible_from;
        }
        if (cfg_.saturated) {
            // Saturated stations hold a placeholder packet that never arrived.
            res_.final_queued = 0;
        }
        res_.elapsed_us = clock_ - warm_time_;
        const double n = static_cast<double>(stations_.size());
        if (res_.elapsed_us > 0.0) {
            res_.throughput_pps = static_cast<double>(res_.delivered) / (res_.elapsed_us * 1e-6);
            res_.rho_time_measured = busy_time_ / (n * res_.elapsed_us);
        }
        if (res_.slots > 0) {
            res_.packets_per_slot = static_cast<double>(res_.delivered) / static_cast<double>(res_.slots);
            res_.tau_measured = static_cast<double>(res_.transmissions) / (n * static_cast<double>(res_.slots));
            res_.rho_measured = static_cast<double>(contend_slots_) / (n * static_cast<double>(res_.slots));
        }
        if (contend_slots_ > 0) {
            res_.p_t_measured = static_cast<double>(res_.transmissions) / static_cast<double>(contend_slots_);
        }
        if (res_.transmissions > 0) {
            res_.p_c_overall = static_cast<double>(res_.collided) / static_cast<double>(res_.transmissions);
        }
        const auto finished = res_.delivered + res_.dropped;
        if (finished > 0) res_.loss_rate = static_cast<double>(res_.dropped) / static_cast<double>(finished);
        return std::move(res_);
    }

    const Scenario& s_;
    const SimConfig& cfg_;
    std::vector<Rng> rngs_;
    std::vector<Station> stations_;
    SimResult res_;
    double arrival_rate_ = 0.0;
    double next_arrival_ = 0.0;
    double clock_ = 0.0;
    double warm_time_ = 0.0;
    bool measuring_ = true;
    std::int64_t t_ = 0;
    double busy_time_ = 0.0;
    std::int64_t contend_slots_ = 0;
};

double bucket_variance(const std::vector<PcBucket>& buckets) {
    double sum = 0.0, sum2 = 0.0;
    int count = 0;
    for (const auto& b : buckets) {
        if (b.low_confidence) continue;
        const double p = b.tally.ratio();
        sum += p;
        sum2 += p * p;
        ++count;
    }
    if (count < 2) return 0.0;
    const double mean = sum / count;
    return std::max(0.0, sum2 / count - mean * mean);
}

std::vector<PcBucket> to_buckets(const std::vector<CollisionTally>& tallies) {
    std::vector<PcBucket> out;
    for (std::size_t i = 0; i < tallies.size(); ++i) {
        if (tallies[i].attempts == 0) continue;
        out.push_back({static_cast<int>(i), tallies[i], tallies[i].attempts < 100});
    }
    return out;
}

}  // namespace

SimResult run(const Scenario& scenario, const SimConfig& config) {
    config.validate();
    Engine engine(scenario, config);
    return engine.run();
}

PcByState summarize_pc(const SimResult& r) {
    PcByState out;
    out.by_stage = to_buckets(r.pc_by_stage);
    out.by_occupancy = to_buckets(r.pc_by_occupancy);
    out.stage_variance = bucket_variance(out.by_stage);
    out.occupancy_variance = bucket_variance(out.by_occupancy);
    return out;
}

PcByState measure_pc_by_state(const Scenario& scenario, SimConfig config) {
    config.collect.pc_by_state = true;
    return summarize_pc(run(scenario, config));
}

}  // namespace wlancap
