#include "wlancap/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wlancap/error.hpp"

namespace wlancap {

namespace {

using nlohmann::json;

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

double number(const json& obj, const char* key, const std::string& path, double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) throw ScenarioError(path + key, "expected a number");
    return v->get<double>();
}

int integer(const json& obj, const char* key, const std::string& path, int fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ScenarioError(path + key, "expected an integer");
    return v->get<int>();
}

const json& object(const json& obj, const char* key, const std::string& path) {
    static const json empty = json::object();
    const json* v = find(obj, key);
    if (!v) return empty;
    if (!v->is_object()) throw ScenarioError(path + key, "expected an object");
    return *v;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ScenarioError(path + key, "unknown key");
    }
}

TimingComponents read_components(const json& c, double payload_bits) {
    const std::string p = "timing.components.";
    reject_unknown(c,
                   {"phy_header_us", "mac_header_bits", "data_rate_bps", "difs_us", "sifs_us", "mini_slot_us",
                    "ack_bits", "rts_bits", "cts_bits", "propagation_us"},
                   p);
    TimingComponents t = reference_components();
    t.phy_header_us = number(c, "phy_header_us", p, t.phy_header_us);
    t.mac_header_bits = number(c, "mac_header_bits", p, t.mac_header_bits);
    t.data_rate_bps = number(c, "data_rate_bps", p, t.data_rate_bps);
    t.payload_bits = payload_bits;
    t.difs_us = number(c, "difs_us", p, t.difs_us);
    t.sifs_us = number(c, "sifs_us", p, t.sifs_us);
    t.mini_slot_us = number(c, "mini_slot_us", p, t.mini_slot_us);
    t.ack_bits = number(c, "ack_bits", p, t.ack_bits);
    t.rts_bits = number(c, "rts_bits", p, t.rts_bits);
    t.cts_bits = number(c, "cts_bits", p, t.cts_bits);
    t.propagation_us = number(c, "propagation_us", p, t.propagation_us);
    try {
        t.validate();
    } catch (const InvalidArgument& e) {
        throw ScenarioError("timing.components", e.what());
    }
    return t;
}

SlotTiming read_timing(const json& t, double payload_bits) {
    const std::string p = "timing.";
    reject_unknown(t, {"model", "components", "include_propagation", "t_idle_us", "t_coll_us", "t_succ_us"}, p);
    AccessModel model = AccessModel::Basic;
    if (const json* m = find(t, "model")) {
        if (!m->is_string()) throw ScenarioError("timing.model", "expected a string");
        try {
            model = access_model_from_string(m->get<std::string>());
        } catch (const InvalidArgument& e) {
            throw ScenarioError("timing.model", e.what());
        }
    }
    const bool explicit_durations = find(t, "t_idle_us") || find(t, "t_coll_us") || find(t, "t_succ_us");
    if (explicit_durations) {
        for (const char* k : {"t_idle_us", "t_coll_us", "t_succ_us"}) {
            if (!find(t, k)) throw ScenarioError(p + k, "required when any slot duration is given");
        }
        try {
            return SlotTiming(number(t, "t_idle_us", p, 0), number(t, "t_coll_us", p, 0),
                              number(t, "t_succ_us", p, 0), model);
        } catch (const InvalidArgument& e) {
            throw ScenarioError("timing", e.what());
        }
    }
    if (model == AccessModel::Custom) {
        throw ScenarioError("timing.t_idle_us", "custom timing requires explicit slot durations");
    }
    SlotTimingOptions opts;
    if (const json* ip = find(t, "include_propagation")) {
        if (!ip->is_boolean()) throw ScenarioError("timing.include_propagation", "expected true or false");
        opts.include_propagation = ip->get<bool>();
    }
    return make_slot_timing(read_components(object(t, "components", p), payload_bits), model, opts);
}

MacParams read_mac(const json& m) {
    const std::string p = "mac.";
    reject_unknown(m, {"w0", "r", "retry_limit", "cw_max"}, p);
    const int w0 = integer(m, "w0", p, 16);
    const double r = number(m, "r", p, 2.0);
    std::optional<int> k;
    std::optional<double> cap;
    if (find(m, "retry_limit")) k = integer(m, "retry_limit", p, 0);
    if (find(m, "cw_max")) cap = number(m, "cw_max", p, 0);
    try {
        return MacParams(w0, r, k, cap);
    } catch (const InvalidArgument& e) {
        // The field is whichever key the message mentions first.
        std::string field = "mac";
        const std::string what = e.what();
        std::size_t first = std::string::npos;
        for (const char* key : {"w0", "r", "retry_limit", "cw_max"}) {
            std::size_t at = what.rfind(key, 0) == 0 ? 0 : what.find(std::string(" ") + key + " ");
            if (at < first) {
                first = at;
                field = p + key;
            }
        }
        throw ScenarioError(field, what);
    }
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ScenarioError("<document>", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ScenarioError("<document>", "expected a JSON object");
    reject_unknown(doc, {"n", "m", "lambda_pps", "offered_load_pps", "payload_bits", "timing", "mac", "name", "description"},
                   "");
    const int n = integer(doc, "n", "", 50);
    const int m = integer(doc, "m", "", 1);
    const double payload = number(doc, "payload_bits", "", reference_components().payload_bits);
    if (!(payload > 0.0)) throw ScenarioError("payload_bits", "must be > 0");
    if (find(doc, "lambda_pps") && find(doc, "offered_load_pps")) {
        throw ScenarioError("offered_load_pps", "give either lambda_pps or offered_load_pps, not both");
    }
    if (n < 1) throw ScenarioError("n", "must be >= 1");
    if (m < 1) throw ScenarioError("m", "must be >= 1");
    double lambda = number(doc, "lambda_pps", "", 0.0);
    if (const json* total = find(doc, "offered_load_pps")) {
        if (!total->is_number()) throw ScenarioError("offered_load_pps", "expected a number");
        lambda = total->get<double>() / n;
    }
    if (!(lambda >= 0.0)) throw ScenarioError(find(doc, "offered_load_pps") ? "offered_load_pps" : "lambda_pps", "must be >= 0");
    const SlotTiming timing = read_timing(object(doc, "timing", ""), payload);
    const MacParams mac = read_mac(object(doc, "mac", ""));
    return Scenario(n, m, lambda, payload, timing, mac);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("<file>", "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
    json doc;
    doc["n"] = s.n();
    doc["m"] = s.m();
    doc["lambda_pps"] = s.lambda_pps();
    doc["payload_bits"] = s.payload_bits();
    doc["timing"] = {{"model", std::string(to_string(s.timing().model()))},
                     {"t_idle_us", s.timing().t_idle_us()},
                     {"t_coll_us", s.timing().t_coll_us()},
                     {"t_succ_us", s.timing().t_succ_us()}};
    json mac = {{"w0", s.mac().w0()}, {"r", s.mac().r()}};
    if (s.mac().retry_limit()) mac["retry_limit"] = *s.mac().retry_limit();
    if (s.mac().cw_max()) mac["cw_max"] = *s.mac().cw_max();
    doc["mac"] = mac;
    return doc.dump(2) + "\n";
}

}  // namespace wlancap
