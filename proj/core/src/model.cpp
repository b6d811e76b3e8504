#include "wlancap/model.hpp"

#include <cmath>
#include <string>

#include "wlancap/error.hpp"

namespace wlancap {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(name) + " must be finite and > 0");
    }
}

}  // namespace

std::string_view to_string(AccessModel model) {
    switch (model) {
        case AccessModel::EqualSlot: return "equal-slot";
        case AccessModel::Basic: return "basic";
        case AccessModel::RtsCts: return "rts-cts";
        case AccessModel::Custom: return "custom";
    }
    return "custom";
}

AccessModel access_model_from_string(std::string_view name) {
    if (name == "equal-slot" || name == "equal") return AccessModel::EqualSlot;
    if (name == "basic") return AccessModel::Basic;
    if (name == "rts-cts" || name == "rtscts") return AccessModel::RtsCts;
    if (name == "custom") return AccessModel::Custom;
    throw InvalidArgument("unknown access model '" + std::string(name) + "'");
}

void TimingComponents::validate() const {
    require_positive(phy_header_us, "phy_header_us");
    require_positive(mac_header_bits, "mac_header_bits");
    require_positive(data_rate_bps, "data_rate_bps");
    require_positive(payload_bits, "payload_bits");
    require_positive(difs_us, "difs_us");
    require_positive(sifs_us, "sifs_us");
    require_positive(mini_slot_us, "mini_slot_us");
    require_positive(ack_bits, "ack_bits");
    require_positive(rts_bits, "rts_bits");
    require_positive(cts_bits, "cts_bits");
    if (!(propagation_us >= 0.0) || !std::isfinite(propagation_us)) {
        throw InvalidArgument("propagation_us must be finite and >= 0");
    }
}

TimingComponents reference_components() { return TimingComponents{}; }

SlotTiming::SlotTiming(double t_idle_us, double t_coll_us, double t_succ_us, AccessModel model)
    : t_idle_(t_idle_us), t_coll_(t_coll_us), t_succ_(t_succ_us), model_(model) {
    require_positive(t_idle_, "t_idle_us");
    require_positive(t_coll_, "t_coll_us");
    require_positive(t_succ_, "t_succ_us");
    if (model_ == AccessModel::EqualSlot && !(t_idle_ == t_coll_ && t_coll_ == t_succ_)) {
        throw InvalidArgument("equal-slot timing requires t_idle = t_coll = t_succ");
    }
    if (model_ == AccessModel::Basic && !(t_coll_ < t_succ_)) {
        throw InvalidArgument("basic-access timing requires t_coll < t_succ");
    }
}

SlotTiming make_slot_timing(const TimingComponents& c, AccessModel model, SlotTimingOptions options) {
    c.validate();
    const double frame = c.header_us() + c.payload_us();
    const double delta = options.include_propagation ? c.propagation_us : 0.0;
    switch (model) {
        case AccessModel::EqualSlot:
            return SlotTiming(frame, frame, frame, model);
        case AccessModel::Basic: {
            const double coll = frame + c.difs_us + delta;
            const double succ = frame + c.sifs_us + c.bits_us(c.ack_bits) + c.difs_us + delta;
            return SlotTiming(c.mini_slot_us, coll, succ, model);
        }
        case AccessModel::RtsCts: {
            const double rts = c.bits_us(c.rts_bits);
            const double coll = rts + c.difs_us + delta;
            const double succ = rts + c.bits_us(c.cts_bits) + frame + 3.0 * c.sifs_us +
                                c.bits_us(c.ack_bits) + c.difs_us + delta;
            return SlotTiming(c.mini_slot_us, coll, succ, model);
        }
        case AccessModel::Custom:
            break;
    }
    throw InvalidArgument("make_slot_timing: custom timing has no component derivation");
}

MacParams::MacParams(int w0, double r, std::optional<int> retry_limit, std::optional<double> cw_max)
    : w0_(w0), r_(r), retry_limit_(retry_limit), cw_max_(cw_max) {
    if (w0_ < 1) throw InvalidArgument("w0 must be >= 1");
    if (!(r_ > 1.0) || !std::isfinite(r_)) throw InvalidArgument("backoff factor r must be > 1");
    if (retry_limit_ && *retry_limit_ < 0) throw InvalidArgument("retry_limit must be >= 0");
    if (cw_max_) {
        if (!(*cw_max_ >= w0_) || !std::isfinite(*cw_max_)) {
            throw InvalidArgument("cw_max must be >= w0");
        }
        // cw_max must be w0 * r^j for an integer j >= 0.
        const double j = std::log(*cw_max_ / w0_) / std::log(r_);
        const double jr = std::round(j);
        if (std::abs(j - jr) > 1e-9 * std::max(1.0, jr)) {
            throw InvalidArgument("cw_max / w0 must be an integral power of r");
        }
        doubling_stages_ = static_cast<int>(jr);
    }
}

double MacParams::window(int stage) const {
    if (stage < 0) throw DomainError("window: stage must be >= 0");
    if (doubling_stages_ && stage >= *doubling_stages_) return *cw_max_;
    return w0_ * std::pow(r_, stage);
}

MacParams MacParams::with_r(double r) const {
    std::optional<double> cap;
    if (cw_max_) cap = w0_ * std::pow(r, *doubling_stages_);
    return MacParams(w0_, r, retry_limit_, cap);
}

Scenario::Scenario(int n, int m, double lambda_pps, double payload_bits, SlotTiming timing, MacParams mac)
    : n_(n), m_(m), lambda_(lambda_pps), payload_bits_(payload_bits), timing_(timing), mac_(mac) {
    if (n_ < 1) throw InvalidArgument("n must be >= 1");
    if (m_ < 1) throw InvalidArgument("m must be >= 1");
    if (m_ > n_) m_ = n_;
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw InvalidArgument("lambda_pps must be >= 0");
    require_positive(payload_bits_, "payload_bits");
}

Scenario Scenario::with_lambda(double lambda_pps) const {
    return Scenario(n_, m_, lambda_pps, payload_bits_, timing_, mac_);
}

Scenario Scenario::with_m(int m) const { return Scenario(n_, m, lambda_, payload_bits_, timing_, mac_); }

Scenario Scenario::with_n(int n) const { return Scenario(n, m_, lambda_, payload_bits_, timing_, mac_); }

Scenario Scenario::with_mac(MacParams mac) const {
    return Scenario(n_, m_, lambda_, payload_bits_, timing_, std::move(mac));
}

Scenario reference_scenario(AccessModel model, int n, int m) {
    const auto c = reference_components();
    return Scenario(n, m, 0.0, c.payload_bits, make_slot_timing(c, model), MacParams{});
}

}  // namespace wlancap
