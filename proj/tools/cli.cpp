#include "cli.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "wlancap/wlancap.hpp"

#ifndef WLANCAP_VERSION
#define WLANCAP_VERSION "unknown"
#endif

namespace wlancap::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kOutDirEnv = "WLANCAP_OUT_DIR";
constexpr const char* kInfeasibleMessage = "offered load infeasible";

/// Raised for problems the user can fix (bad flags, unreadable files).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Tables rendered either as CSV or as a JSON array of objects.

using Cell = std::variant<double, std::int64_t, std::uint64_t, bool, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json to_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return json_number(v);
            } else {
                return v;
            }
        },
        c);
}

void write_csv(std::ostream& os, const Table& t) {
    CsvWriter w(os, t.header);
    for (const auto& row : t.rows) {
        for (const auto& c : row) std::visit([&](const auto& v) { w.cell(v); }, c);
        w.end_row();
    }
}

void write_json(std::ostream& os, const Table& t) {
    json arr = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.header[i]] = to_json(row[i]);
        arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << "\n";
}

double pps(double bps, const Scenario& s) { return bps / s.payload_bits(); }

double moment_sd(const MomentValue& var) {
    return var.is_finite() ? std::sqrt(std::max(0.0, var.value())) : INFINITY;
}

// ---------------------------------------------------------------------------
// Shared invocation state.

struct Options {
    std::string scenario_path;
    std::string out_dir;
    std::string format = "csv";
    bool quiet = false;
    unsigned threads = 0;

    std::optional<int> n, m, w0, retry_limit;
    std::optional<double> r, cw_max, load_pps;
};

class Context {
public:
    Context(const Options& opt, std::vector<std::string> argv, std::ostream& out, std::ostream& err)
        : opt_(opt), argv_(std::move(argv)), out_(out), err_(err), started_(std::chrono::system_clock::now()) {
        if (opt_.format != "csv" && opt_.format != "json") throw UsageError("--format must be csv or json");
    }

    const Options& opt() const { return opt_; }
    bool to_files() const { return !opt_.out_dir.empty(); }
    unsigned threads() const {
        if (opt_.threads) return opt_.threads;
        return std::max(1u, std::thread::hardware_concurrency());
    }

    /// Loads the scenario file and applies command-line overrides.
    Scenario scenario() {
        if (opt_.scenario_path.empty()) throw UsageError("--scenario is required");
        Scenario s = load_scenario(opt_.scenario_path);
        if (opt_.n) s = s.with_n(*opt_.n);
        if (opt_.m) s = s.with_m(*opt_.m);
        if (opt_.w0 || opt_.r || opt_.retry_limit || opt_.cw_max) {
            const MacParams& old = s.mac();
            s = s.with_mac(MacParams(opt_.w0.value_or(old.w0()), opt_.r.value_or(old.r()),
                                     opt_.retry_limit ? opt_.retry_limit : old.retry_limit(),
                                     opt_.cw_max ? opt_.cw_max : old.cw_max()));
        }
        if (opt_.load_pps) s = s.with_offered_load(*opt_.load_pps);
        return s;
    }

    /// Human-readable text: stdout when data goes to files, stderr otherwise.
    std::ostream* info() {
        if (opt_.quiet) return nullptr;
        return to_files() ? &out_ : &err_;
    }
    std::ostream& err() { return err_; }

    void emit(const std::string& name, const Table& t) {
        const bool js = opt_.format == "json";
        if (!to_files()) {
            js ? write_json(out_, t) : write_csv(out_, t);
            return;
        }
        const fs::path path = fs::path(opt_.out_dir) / (name + (js ? ".json" : ".csv"));
        std::ofstream f = open(path);
        js ? write_json(f, t) : write_csv(f, t);
        outputs_.push_back(path.string());
    }

    void emit_json(const std::string& name, const json& doc) {
        if (!to_files()) {
            out_ << doc.dump(2) << "\n";
            return;
        }
        const fs::path path = fs::path(opt_.out_dir) / (name + ".json");
        std::ofstream f = open(path);
        f << doc.dump(2) << "\n";
        outputs_.push_back(path.string());
    }

    /// Opens a binary file in the output directory.
    std::ofstream open_binary(const std::string& file_name) {
        if (!to_files()) throw UsageError("binary dumps need an output directory (--out or " + std::string(kOutDirEnv) + ")");
        const fs::path path = fs::path(opt_.out_dir) / file_name;
        outputs_.push_back(path.string());
        return open(path, std::ios::binary);
    }

    void set_seeds(std::vector<std::uint64_t> seeds) { seeds_ = std::move(seeds); }
    void set_overrides(json overrides) { overrides_ = std::move(overrides); }

    /// Writes <stem>.manifest.json next to the outputs, if any were written.
    /// The stem defaults to the command name.
    void finish(const std::string& command, const std::string& stem = {}) {
        if (!to_files() || outputs_.empty()) return;
        const auto finished = std::chrono::system_clock::now();
        json m;
        m["command"] = command;
        m["scenario_path"] = opt_.scenario_path;
        m["overrides"] = overrides_;
        m["argv"] = argv_;
        m["outputs"] = outputs_;
        m["seeds"] = seeds_;
        m["version"] = WLANCAP_VERSION;
        m["started_utc"] = utc(started_);
        m["finished_utc"] = utc(finished);
        m["wall_seconds"] = std::chrono::duration<double>(finished - started_).count();
        std::ofstream f = open(fs::path(opt_.out_dir) / ((stem.empty() ? command : stem) + ".manifest.json"));
        f << m.dump(2) << "\n";
    }

private:
    std::ofstream open(const fs::path& path, std::ios::openmode mode = std::ios::out) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        std::ofstream f(path, mode | std::ios::trunc);
        if (!f) throw UsageError("cannot write '" + path.string() + "'");
        return f;
    }

    static std::string utc(std::chrono::system_clock::time_point t) {
        const std::time_t tt = std::chrono::system_clock::to_time_t(t);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        std::ostringstream os;
        os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        return os.str();
    }

    Options opt_;
    std::vector<std::string> argv_;
    std::ostream& out_;
    std::ostream& err_;
    std::chrono::system_clock::time_point started_;
    std::vector<std::string> outputs_;
    std::vector<std::uint64_t> seeds_;
    json overrides_ = json::object();
};

// ---------------------------------------------------------------------------
// Grids.

/// Parses "a,b,c" (possibly empty) or "start:stop:count" into values.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    auto number = [&](const std::string& tok) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw UsageError("bad grid value '" + tok + "'");
        }
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
        if (parts.size() != 3) throw UsageError("range grid must be start:stop:count");
        const double a = number(parts[0]), b = number(parts[1]);
        const double c = number(parts[2]);
        if (c < 0 || c != std::floor(c)) throw UsageError("range count must be a non-negative integer");
        const auto count = static_cast<std::size_t>(c);
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
        }
        return out;
    }
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (!tok.empty()) out.push_back(number(tok));
    }
    return out;
}

// ---------------------------------------------------------------------------
// solve

struct LoadPoint {
    double offered_pps;
    std::optional<OperatingPoint> op;
    std::optional<DelayReport> delay;
    std::string error;
};

LoadPoint analyse_load(const Scenario& s) {
    LoadPoint lp{s.offered_load_pps(), std::nullopt, std::nullopt, {}};
    try {
        if (s.lambda_pps() <= 0.0) {
            lp.op = OperatingPoint{0.0, RootKind::Left, true};
        } else {
            lp.op = stable_operating_point(s);
        }
        lp.delay = delay_stats(s, lp.op->tau);
    } catch (const NoRootError&) {
        lp.op.reset();
        lp.error = kInfeasibleMessage;
    } catch (const Error& e) {
        lp.error = e.what();
    }
    return lp;
}

json capacity_json(const CapacityReport& c, const Scenario& s) {
    return {{"tau_s", c.tau_s},
            {"s_s_pps", json_number(pps(c.s_s_bps, s))},
            {"tau_star", c.tau_star},
            {"s_star_pps", json_number(pps(c.s_star_bps, s))},
            {"tau_bbmd", c.tau_bbmd},
            {"s_bbmd_pps", json_number(pps(c.s_bbmd_bps, s))},
            {"tau_bbdj", c.tau_bbdj},
            {"s_bbdj_pps", json_number(pps(c.s_bbdj_bps, s))},
            {"s_sbmd_pps", json_number(pps(c.s_sbmd_bps, s))},
            {"s_sbdj_pps", json_number(pps(c.s_sbdj_bps, s))},
            {"scenario_class", c.scenario_class},
            {"bbmd_clamped", c.bbmd_clamped},
            {"bbdj_clamped", c.bbdj_clamped}};
}

json delay_json(const LoadPoint& lp) {
    const auto& op = *lp.op;
    const auto& d = *lp.delay;
    return {{"offered_load_pps", lp.offered_pps},
            {"tau", op.tau},
            {"root_kind", std::string(to_string(op.root_kind))},
            {"p_c", d.view.p_c},
            {"rho_tilde", json_number(d.rho_tilde)},
            {"rho", d.rho},
            {"stable", d.stable},
            {"e_xne_us", json_number(d.xne_m1.value())},
            {"e_xne2_us2", json_number(d.xne_m2.value())},
            {"e_xne3_us3", json_number(d.xne_m3.value())},
            {"e_d_us", json_number(d.e_d_us.value())},
            {"sd_d_us", json_number(moment_sd(d.var_d_us2))},
            {"loss_rate", d.loss_rate}};
}

void flatten(const json& obj, const std::string& section, Table& t) {
    for (const auto& [key, value] : obj.items()) {
        Cell c;
        if (value.is_boolean()) {
            c = value.get<bool>();
        } else if (value.is_number_integer()) {
            c = value.get<std::int64_t>();
        } else if (value.is_number()) {
            c = value.get<double>();
        } else {
            c = value.get<std::string>();
        }
        t.add({section, key, c});
    }
}

int cmd_solve(Context& ctx) {
    const Scenario s = ctx.scenario();
    const CapacityReport cap = capacity_report(s);
    const LoadPoint lp = analyse_load(s);

    json doc;
    doc["capacity"] = capacity_json(cap, s);
    doc["operating_point"] = lp.op && lp.delay ? delay_json(lp) : json(nullptr);
    if (!lp.error.empty()) doc["error"] = lp.error;

    if (ctx.opt().format == "json") {
        ctx.emit_json("solve", doc);
    } else {
        Table t{{"section", "quantity", "value"}, {}};
        flatten(doc["capacity"], "capacity", t);
        if (!doc["operating_point"].is_null()) flatten(doc["operating_point"], "operating_point", t);
        ctx.emit("solve", t);
    }

    if (std::ostream* os = ctx.info()) {
        auto& o = *os;
        const auto line = [&](const char* label, double tau, double bps) {
            o << "  " << std::left << std::setw(12) << label << " tau = " << std::setw(12) << format_number(tau)
              << " S = " << format_number(pps(bps, s)) << " pkt/s\n";
        };
        o << "capacity (N = " << s.n() << ", M = " << s.m() << ", " << to_string(s.timing().model())
          << ", W0 = " << s.mac().w0() << ", r = " << s.mac().r() << ")\n";
        line("saturation", cap.tau_s, cap.s_s_bps);
        line("peak", cap.tau_star, cap.s_star_bps);
        line("BBMD", cap.tau_bbmd, cap.s_bbmd_bps);
        line("BBDJ", cap.tau_bbdj, cap.s_bbdj_bps);
        o << "  SBMD " << format_number(pps(cap.s_sbmd_bps, s)) << " pkt/s, SBDJ "
          << format_number(pps(cap.s_sbdj_bps, s)) << " pkt/s, scenario class " << cap.scenario_class << "\n";
        if (lp.op && lp.delay) {
            const auto& d = *lp.delay;
            o << "load " << format_number(lp.offered_pps) << " pkt/s: tau = " << format_number(lp.op->tau)
              << ", p_c = " << format_number(d.view.p_c) << ", rho = " << format_number(d.rho)
              << ", E[D] = " << format_number(d.e_d_us.value()) << " us, sd[D] = "
              << format_number(moment_sd(d.var_d_us2)) << " us\n";
        }
    }
    if (lp.error == kInfeasibleMessage) {
        ctx.err() << "error: " << kInfeasibleMessage << " (" << format_number(lp.offered_pps) << " pkt/s)\n";
        return ExitCode::kInfeasible;
    }
    if (!lp.error.empty()) {
        ctx.err() << "error: " << lp.error << "\n";
        return ExitCode::kUsageOrInput;
    }
    return ExitCode::kOk;
}

// ---------------------------------------------------------------------------
// sweep

Table sweep_load(const Scenario& s, const std::vector<double>& grid, unsigned threads) {
    std::vector<LoadPoint> points(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        if (!(grid[i] >= 0.0)) {
            points[i] = {grid[i], std::nullopt, std::nullopt, "offered load must be >= 0"};
            return;
        }
        points[i] = analyse_load(s.with_offered_load(grid[i]));
    });
    Table t{{"offered_load_pps", "tau", "root_kind", "p_c", "rho_tilde", "rho", "stable", "e_xne_us", "e_xne2_us2",
             "e_xne3_us3", "e_d_us", "sd_d_us", "loss_rate", "error"},
            {}};
    for (const auto& lp : points) {
        if (!lp.op || !lp.delay) {
            t.add({lp.offered_pps, NAN, std::string(), NAN, NAN, NAN, false, NAN, NAN, NAN, NAN, NAN, NAN, lp.error});
            continue;
        }
        const auto& d = *lp.delay;
        t.add({lp.offered_pps, lp.op->tau, std::string(to_string(lp.op->root_kind)), d.view.p_c, d.rho_tilde, d.rho,
               d.stable, d.xne_m1.value(), d.xne_m2.value(), d.xne_m3.value(), d.e_d_us.value(),
               moment_sd(d.var_d_us2), d.loss_rate, std::string()});
    }
    return t;
}

Table capacity_table(const std::string& key, const std::vector<double>& grid,
                     const std::function<Scenario(double)>& make, unsigned threads) {
    struct Row {
        std::optional<CapacityReport> cap;
        std::optional<Scenario> s;
        std::string error;
    };
    std::vector<Row> rows(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            rows[i].s = make(grid[i]);
            rows[i].cap = capacity_report(*rows[i].s);
        } catch (const Error& e) {
            rows[i].error = e.what();
        } catch (const UsageError& e) {
            rows[i].error = e.what();
        }
    });
    Table t{{key, "tau_s", "s_s_pps", "tau_star", "s_star_pps", "tau_bbmd", "s_bbmd_pps", "tau_bbdj", "s_bbdj_pps",
             "s_sbmd_pps", "s_sbdj_pps", "scenario_class", "error"},
            {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& row = rows[i];
        if (!row.cap) {
            t.add({grid[i], NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN, std::int64_t{0}, row.error});
            continue;
        }
        const auto& c = *row.cap;
        const auto& s = *row.s;
        t.add({grid[i], c.tau_s, pps(c.s_s_bps, s), c.tau_star, pps(c.s_star_bps, s), c.tau_bbmd,
               pps(c.s_bbmd_bps, s), c.tau_bbdj, pps(c.s_bbdj_bps, s), pps(c.s_sbmd_bps, s), pps(c.s_sbdj_bps, s),
               std::int64_t{c.scenario_class}, std::string()});
    }
    return t;
}

int cmd_sweep(Context& ctx, const std::string& axis, const std::string& grid_text) {
    const Scenario s = ctx.scenario();
    const std::vector<double> grid = parse_grid(grid_text);
    Table t;
    if (axis == "load") {
        t = sweep_load(s, grid, ctx.threads());
    } else if (axis == "r") {
        t = capacity_table("r", grid, [&](double r) { return s.with_r(r); }, ctx.threads());
    } else if (axis == "m") {
        t = capacity_table(
            "m", grid,
            [&](double m) {
                if (m < 1 || m != std::floor(m)) throw UsageError("m must be a positive integer");
                return s.with_m(static_cast<int>(m));
            },
            ctx.threads());
    } else {
        throw UsageError("--axis must be load, r or m");
    }
    ctx.emit("sweep_" + axis, t);
    if (std::ostream* o = ctx.info()) *o << "sweep over " << axis << ": " << grid.size() << " rows\n";
    return ExitCode::kOk;
}

// ---------------------------------------------------------------------------
// simulate

constexpr char kDumpMagic[8] = {'W', 'L', 'C', 'D', 'E', 'L', 'A', 'Y'};
constexpr std::uint32_t kDumpVersion = 1;

void put_le(std::ostream& os, std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, bytes);
}

/// Layout: 8-byte magic "WLCDELAY", u32 version, u32 reserved (0), u64
/// sample count, then the samples as IEEE-754 doubles in microseconds. All
/// integers and doubles are little-endian.
void write_delay_dump(std::ostream& os, const std::vector<double>& samples) {
    os.write(kDumpMagic, sizeof kDumpMagic);
    put_le(os, kDumpVersion, 4);
    put_le(os, 0, 4);
    put_le(os, samples.size(), 8);
    for (double v : samples) put_le(os, std::bit_cast<std::uint64_t>(v), 8);
}

struct SimFlags {
    std::vector<std::uint64_t> seeds{1};
    std::int64_t slots = 1'000'000;
    std::int64_t warmup = 0;
    std::string collect;
    bool saturated = false;
    bool dump_delays = false;
};

int cmd_simulate(Context& ctx, SimFlags f) {
    const Scenario s = ctx.scenario();
    SimConfig base;
    base.total_slots = f.slots;
    base.warmup_slots = f.warmup;
    base.saturated = f.saturated;
    base.collect = CollectFlags::parse(f.collect);
    if (f.dump_delays) base.collect.delay_samples = true;
    base.validate();
    ctx.set_seeds(f.seeds);

    std::vector<SimResult> results(f.seeds.size());
    parallel_for(f.seeds.size(), ctx.threads(), [&](std::size_t i) {
        SimConfig cfg = base;
        cfg.seed = f.seeds[i];
        results[i] = run(s, cfg);
    });

    const bool pc = base.collect.pc_by_state;
    Table t{{"seed", "slots", "warmup_slots", "saturated", "offered_load_pps", "throughput_pps", "packets_per_slot",
             "tau", "rho", "rho_time", "p_t", "p_c", "loss_rate", "delivered", "dropped", "mean_delay_us",
             "sd_delay_us", "mean_access_us", "sd_access_us"},
            {}};
    if (pc) {
        t.header.push_back("pc_stage_variance");
        t.header.push_back("pc_occupancy_variance");
    }
    Table buckets{{"seed", "partition", "key", "attempts", "collisions", "p_c", "low_confidence"}, {}};
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::vector<Cell> row{f.seeds[i],
                              r.slots,
                              f.warmup,
                              f.saturated,
                              s.offered_load_pps(),
                              r.throughput_pps,
                              r.packets_per_slot,
                              r.tau_measured,
                              r.rho_measured,
                              r.rho_time_measured,
                              r.p_t_measured,
                              r.p_c_overall,
                              r.loss_rate,
                              static_cast<std::uint64_t>(r.delivered),
                              static_cast<std::uint64_t>(r.dropped),
                              r.delay.mean(),
                              std::sqrt(std::max(0.0, r.delay.variance())),
                              r.access_ne.mean(),
                              std::sqrt(std::max(0.0, r.access_ne.variance()))};
        if (pc) {
            const PcByState p = summarize_pc(r);
            row.push_back(p.stage_variance);
            row.push_back(p.occupancy_variance);
            for (const auto& [name, list] : {std::pair{"stage", &p.by_stage}, std::pair{"occupancy", &p.by_occupancy}}) {
                for (const auto& b : *list) {
                    buckets.add({f.seeds[i], std::string(name), std::int64_t{b.key}, b.tally.attempts,
                                 b.tally.collisions, b.tally.ratio(), b.low_confidence});
                }
            }
        }
        t.add(std::move(row));
    }
    ctx.emit("simulate", t);
    if (pc && ctx.to_files()) ctx.emit("simulate_pc_by_state", buckets);
    if (f.dump_delays) {
        for (std::size_t i = 0; i < results.size(); ++i) {
            auto os = ctx.open_binary("delays_seed" + std::to_string(f.seeds[i]) + ".bin");
            write_delay_dump(os, results[i].delay_samples);
        }
    }
    if (std::ostream* o = ctx.info()) {
        for (std::size_t i = 0; i < results.size(); ++i) {
            *o << "seed " << f.seeds[i] << ": " << format_number(results[i].throughput_pps) << " pkt/s ("
               << format_number(results[i].packets_per_slot) << " pkt/slot), p_c "
               << format_number(results[i].p_c_overall) << "\n";
        }
    }
    return ExitCode::kOk;
}

// ---------------------------------------------------------------------------
// optimize-r and scaling

int cmd_optimize(Context& ctx, const std::string& objective, const std::string& mode, double r_min, double r_max) {
    const Scenario s = ctx.scenario();
    std::vector<DelayObjective> objectives;
    if (objective == "both") {
        objectives = {DelayObjective::MeanDelay, DelayObjective::Jitter};
    } else {
        objectives = {delay_objective_from_string(objective)};
    }
    OptimizeOptions opts;
    opts.mode = optimize_mode_from_string(mode);
    opts.r_min = r_min;
    opts.r_max = r_max;

    Table t{{"objective", "mode", "r_star", "s_safe_pps", "at_boundary", "s_safe_binary_pps", "gain"}, {}};
    for (auto obj : objectives) {
        opts.objective = obj;
        const OptimalR best = optimize_r(s, opts);
        double binary_bps;
        if (opts.mode == OptimizeMode::LargeN) {
            binary_bps = large_n_safe_throughput(s, 2.0, obj);
        } else {
            const auto c = capacity_report(s.with_r(2.0));
            binary_bps = obj == DelayObjective::MeanDelay ? c.s_sbmd_bps : c.s_sbdj_bps;
        }
        t.add({std::string(to_string(obj)), std::string(to_string(opts.mode)), best.r_star, pps(best.s_safe_bps, s),
               best.at_boundary, pps(binary_bps, s), best.s_safe_bps / binary_bps});
        if (std::ostream* o = ctx.info()) {
            *o << to_string(obj) << " (" << to_string(opts.mode) << "): r* = " << format_number(best.r_star)
               << ", safe throughput " << format_number(pps(best.s_safe_bps, s)) << " pkt/s vs "
               << format_number(pps(binary_bps, s)) << " pkt/s at r = 2\n";
        }
    }
    ctx.emit("optimize_r", t);
    return ExitCode::kOk;
}

int cmd_scaling(Context& ctx, const std::string& m_text, const std::string& mode) {
    const Scenario s = ctx.scenario();
    std::vector<int> ms;
    for (double v : parse_grid(m_text)) {
        if (v < 1 || v != std::floor(v)) throw UsageError("--m values must be positive integers");
        ms.push_back(static_cast<int>(v));
    }
    const OptimizeMode om = optimize_mode_from_string(mode);
    std::vector<ScalingRow> rows(ms.size());
    parallel_for(ms.size(), ctx.threads(), [&](std::size_t i) { rows[i] = scaling_sweep(s, {ms[i]}, om).front(); });
    Table t{{"m", "r_sbmd", "s_sbmd_per_m_pps", "r_sbdj", "s_sbdj_per_m_pps", "error"}, {}};
    for (const auto& r : rows) {
        t.add({std::int64_t{r.m}, r.r_sbmd, pps(r.s_sbmd_per_m_bps, s), r.r_sbdj, pps(r.s_sbdj_per_m_bps, s), r.error});
    }
    ctx.emit("scaling", t);
    if (std::ostream* o = ctx.info()) *o << "scaling over " << ms.size() << " values of M\n";
    return ExitCode::kOk;
}

// ---------------------------------------------------------------------------
// validate

struct Tolerances {
    double tau = 0.02;
    double rho = 0.03;
    double mean_delay = 0.05;
    double sd_delay = 0.05;
};

struct ValidateConfig {
    std::vector<double> loads_pps;
    std::vector<double> fractions;
    std::string fraction_of = "s_bbmd";
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::int64_t slots = 3'000'000;
    std::int64_t warmup = 100'000;
    Tolerances tol;
};

void read_validate_config(const std::string& path, ValidateConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
    try {
        if (doc.contains("loads_pps")) cfg.loads_pps = doc["loads_pps"].get<std::vector<double>>();
        if (doc.contains("load_fractions")) cfg.fractions = doc["load_fractions"].get<std::vector<double>>();
        if (doc.contains("fraction_of")) cfg.fraction_of = doc["fraction_of"].get<std::string>();
        if (doc.contains("seeds")) cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
        if (doc.contains("slots")) cfg.slots = doc["slots"].get<std::int64_t>();
        if (doc.contains("warmup_slots")) cfg.warmup = doc["warmup_slots"].get<std::int64_t>();
        if (doc.contains("tolerances")) {
            const json& t = doc["tolerances"];
            cfg.tol.tau = t.value("tau", cfg.tol.tau);
            cfg.tol.rho = t.value("rho", cfg.tol.rho);
            cfg.tol.mean_delay = t.value("mean_delay", cfg.tol.mean_delay);
            cfg.tol.sd_delay = t.value("sd_delay", cfg.tol.sd_delay);
        }
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
}

double reference_throughput_pps(const Scenario& s, const std::string& which) {
    const CapacityReport c = capacity_report(s);
    double bps;
    if (which == "s_bbmd") {
        bps = c.s_bbmd_bps;
    } else if (which == "s_bbdj") {
        bps = c.s_bbdj_bps;
    } else if (which == "s_sbmd") {
        bps = c.s_sbmd_bps;
    } else if (which == "s_sbdj") {
        bps = c.s_sbdj_bps;
    } else if (which == "s_s") {
        bps = c.s_s_bps;
    } else {
        throw UsageError("fraction_of must be one of s_s, s_bbmd, s_bbdj, s_sbmd, s_sbdj");
    }
    return pps(bps, s);
}

int cmd_validate(Context& ctx, ValidateConfig cfg) {
    const Scenario s = ctx.scenario();
    std::vector<double> loads = cfg.loads_pps;
    if (!cfg.fractions.empty()) {
        const double ref = reference_throughput_pps(s, cfg.fraction_of);
        for (double f : cfg.fractions) loads.push_back(f * ref);
    }
    if (loads.empty()) loads.push_back(s.offered_load_pps());
    if (cfg.seeds.empty()) throw UsageError("validate needs at least one seed");
    ctx.set_seeds(cfg.seeds);

    SimConfig base;
    base.total_slots = cfg.slots;
    base.warmup_slots = cfg.warmup;
    base.validate();

    // One simulation per (load, seed), pooled per load.
    std::vector<SimResult> sims(loads.size() * cfg.seeds.size());
    std::vector<std::string> sim_errors(sims.size());
    parallel_for(sims.size(), ctx.threads(), [&](std::size_t i) {
        SimConfig c = base;
        c.seed = cfg.seeds[i % cfg.seeds.size()];
        try {
            sims[i] = run(s.with_offered_load(loads[i / cfg.seeds.size()]), c);
        } catch (const Error& e) {
            sim_errors[i] = e.what();
        }
    });

    Table t{{"offered_load_pps", "quantity", "analytic", "simulated", "rel_error", "tolerance", "status", "reason"}, {}};
    bool failed = false;
    for (std::size_t li = 0; li < loads.size(); ++li) {
        const Scenario sl = s.with_offered_load(loads[li]);
        const LoadPoint lp = analyse_load(sl);

        StreamingMoments delay;
        double tau = 0.0, rho = 0.0;
        std::string sim_error;
        for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
            const std::size_t i = li * cfg.seeds.size() + k;
            if (!sim_errors[i].empty()) {
                sim_error = sim_errors[i];
                continue;
            }
            const auto& r = sims[i];
            delay.count += r.delay.count;
            delay.s1 += r.delay.s1;
            delay.s2 += r.delay.s2;
            delay.s3 += r.delay.s3;
            tau += r.tau_measured / cfg.seeds.size();
            rho += r.rho_time_measured / cfg.seeds.size();
        }

        const auto compare = [&](const char* name, double analytic, double simulated, double tol, const char* skip) {
            if (!lp.error.empty() || !sim_error.empty()) {
                t.add({loads[li], std::string(name), analytic, simulated, NAN, tol, std::string("fail"),
                       lp.error.empty() ? sim_error : lp.error});
                failed = true;
                return;
            }
            if (skip) {
                t.add({loads[li], std::string(name), analytic, simulated, NAN, tol, std::string("skip"),
                       std::string(skip)});
                return;
            }
            const double rel = std::abs(simulated - analytic) / std::abs(analytic);
            const bool ok = rel <= tol;
            failed = failed || !ok;
            t.add({loads[li], std::string(name), analytic, simulated, rel, tol, std::string(ok ? "pass" : "fail"),
                   std::string()});
        };

        const bool have = lp.op && lp.delay;
        const double a_tau = have ? lp.op->tau : NAN;
        const double a_rho = have ? lp.delay->rho : NAN;
        const double a_ed = have ? lp.delay->e_d_us.value() : NAN;
        const double a_sd = have ? moment_sd(lp.delay->var_d_us2) : NAN;
        compare("tau", a_tau, tau, cfg.tol.tau, nullptr);
        compare("rho", a_rho, rho, cfg.tol.rho, nullptr);
        compare("mean_delay_us", a_ed, delay.mean(), cfg.tol.mean_delay,
                have && lp.delay->e_d_us.is_divergent() ? "analytic mean divergent" : nullptr);
        compare("sd_delay_us", a_sd, std::sqrt(std::max(0.0, delay.variance())), cfg.tol.sd_delay,
                have && lp.delay->var_d_us2.is_divergent() ? "analytic variance divergent" : nullptr);
    }
    ctx.emit("validate", t);
    if (std::ostream* o = ctx.info()) {
        for (const auto& row : t.rows) {
            *o << std::get<std::string>(row[6]) << "  load " << format_number(std::get<double>(row[0])) << " "
               << std::get<std::string>(row[1]) << ": analytic " << format_number(std::get<double>(row[2]))
               << ", simulated " << format_number(std::get<double>(row[3]));
            const auto& reason = std::get<std::string>(row[7]);
            if (!reason.empty()) *o << " (" << reason << ")";
            *o << "\n";
        }
    }
    return failed ? ExitCode::kUsageOrInput : ExitCode::kOk;
}

// ---------------------------------------------------------------------------
// replay

std::vector<std::string> replay_args(const std::string& manifest_path, const std::string& out_dir) {
    std::ifstream in(manifest_path);
    if (!in) throw UsageError("cannot open manifest '" + manifest_path + "'");
    std::vector<std::string> args;
    try {
        args = json::parse(in).at("argv").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw UsageError("manifest '" + manifest_path + "': " + e.what());
    }
    if (!out_dir.empty()) {
        // Drop the recorded output directory; the new one is appended last.
        std::vector<std::string> kept;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--out") {
                ++i;
                continue;
            }
            if (args[i].rfind("--out=", 0) == 0) continue;
            kept.push_back(args[i]);
        }
        args = std::move(kept);
        args.push_back("--out");
        args.push_back(out_dir);
    }
    return args;
}

/// Options that select inputs and outputs rather than model parameters.
const std::set<std::string> kNotOverrides = {"help", "scenario", "out", "format", "quiet", "threads"};

json explicit_options(const CLI::App& app) {
    json o = json::object();
    for (const CLI::App* a : {&app, app.get_parent()}) {
        if (!a) continue;
        for (const CLI::Option* opt : a->get_options()) {
            std::string name = opt->get_name();
            name.erase(0, name.find_first_not_of('-'));
            if (opt->count() == 0 || kNotOverrides.count(name)) continue;
            const auto& res = opt->results();
            if (res.size() == 1) {
                o[name] = res.front();
            } else {
                o[name] = res;
            }
        }
    }
    return o;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacity, delay and simulation of exponential-backoff WLANs with multi-packet reception",
                 "wlancap"};
    app.set_version_flag("--version", WLANCAP_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--scenario", opt.scenario_path, "Scenario JSON file");
    app.add_option("--out", opt.out_dir, "Output directory (default: $" + std::string(kOutDirEnv) + ", else stdout)");
    app.add_option("--format", opt.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--quiet", opt.quiet, "Suppress human-readable summaries");
    app.add_option("--threads", opt.threads, "Worker threads (default: hardware concurrency)");
    app.add_option("--n", opt.n, "Override the number of stations")->check(CLI::PositiveNumber);
    app.add_option("--m", opt.m, "Override the MPR capability")->check(CLI::PositiveNumber);
    app.add_option("--w0", opt.w0, "Override the initial contention window")->check(CLI::PositiveNumber);
    app.add_option("--r", opt.r, "Override the backoff factor");
    app.add_option("--retry-limit", opt.retry_limit, "Override the retry limit K");
    app.add_option("--cw-max", opt.cw_max, "Override the contention window cap");
    app.add_option("--load", opt.load_pps, "Override the total offered load (packets/s)");

    auto* solve = app.add_subcommand("solve", "Capacity report and delay at the scenario's load");

    std::string axis = "load", grid;
    auto* sweep = app.add_subcommand("sweep", "Sweep the offered load, r or M and emit one row per point");
    sweep->add_option("--axis", axis, "Swept parameter")->check(CLI::IsMember({"load", "r", "m"}));
    sweep->add_option("--grid", grid, "Comma-separated values or start:stop:count")->required();

    SimFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Run the slotted simulator, one row per seed");
    simulate->add_option("--seed", sim.seeds, "Seed (repeatable)")->take_all();
    simulate->add_option("--slots", sim.slots, "Total slots per run including warmup");
    simulate->add_option("--warmup", sim.warmup, "Slots discarded before measuring");
    simulate->add_option("--collect", sim.collect,
                         "Extra statistics: delay-samples, pc-by-state, queue-samples (comma-separated)");
    simulate->add_flag("--saturated", sim.saturated, "Every station always has a packet");
    simulate->add_flag("--dump-delays", sim.dump_delays, "Write raw delay samples to delays_seed<k>.bin");

    std::string objective = "mean-delay", mode = "large-n";
    double r_min = 1.001, r_max = 16.0;
    auto* optimize = app.add_subcommand("optimize-r", "Backoff factor maximising the safe throughput");
    optimize->add_option("--objective", objective, "mean-delay, jitter or both");
    optimize->add_option("--mode", mode, "large-n or exact");
    optimize->add_option("--r-min", r_min, "Lower end of the search interval");
    optimize->add_option("--r-max", r_max, "Upper end of the search interval");

    std::string m_values = "1,2,3,4,5,6,7,8", scaling_mode = "large-n";
    auto* scaling = app.add_subcommand("scaling", "Optimal safe throughput per unit of MPR capability");
    scaling->add_option("--m-values", m_values, "Values of M (list or start:stop:count)");
    scaling->add_option("--mode", scaling_mode, "large-n or exact");

    ValidateConfig vcfg;
    std::string config_path, loads_text, fractions_text;
    auto* validate = app.add_subcommand("validate", "Compare analytic and simulated tau, rho, E[D] and sd[D]");
    validate->add_option("--config", config_path, "JSON file with loads, seeds, run lengths and tolerances");
    validate->add_option("--loads", loads_text, "Offered loads in packets/s (comma-separated)");
    validate->add_option("--fractions", fractions_text, "Loads as fractions of --fraction-of");
    std::string fraction_of;
    validate->add_option("--fraction-of", fraction_of, "s_s, s_bbmd (default), s_bbdj, s_sbmd or s_sbdj");
    std::vector<std::uint64_t> v_seeds;
    std::optional<std::int64_t> v_slots, v_warmup;
    validate->add_option("--seed", v_seeds, "Seed (repeatable)")->take_all();
    validate->add_option("--slots", v_slots, "Total slots per run");
    validate->add_option("--warmup", v_warmup, "Warmup slots per run");

    std::string manifest;
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("--manifest", manifest, "Manifest JSON file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitCode::kOk;
    } catch (const CLI::CallForVersion&) {
        out << WLANCAP_VERSION << "\n";
        return ExitCode::kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::kUsageOrInput;
    }

    if (replay->parsed()) {
        try {
            auto replayed = replay_args(manifest, opt.out_dir);
            if (opt.quiet) replayed.push_back("--quiet");
            return run(replayed, out, err);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n";
            return ExitCode::kUsageOrInput;
        }
    }

    if (opt.out_dir.empty()) {
        if (const char* env = std::getenv(kOutDirEnv); env && *env) opt.out_dir = env;
    }

    try {
        Context ctx(opt, args, out, err);
        const CLI::App* sub = app.get_subcommands().front();
        ctx.set_overrides(explicit_options(*sub));
        int code = ExitCode::kOk;
        if (sub == solve) {
            code = cmd_solve(ctx);
        } else if (sub == sweep) {
            code = cmd_sweep(ctx, axis, grid);
        } else if (sub == simulate) {
            code = cmd_simulate(ctx, sim);
        } else if (sub == optimize) {
            code = cmd_optimize(ctx, objective, mode, r_min, r_max);
        } else if (sub == scaling) {
            code = cmd_scaling(ctx, m_values, scaling_mode);
        } else if (sub == validate) {
            if (!config_path.empty()) read_validate_config(config_path, vcfg);
            if (!fraction_of.empty()) vcfg.fraction_of = fraction_of;
            if (!loads_text.empty()) vcfg.loads_pps = parse_grid(loads_text);
            if (!fractions_text.empty()) vcfg.fractions = parse_grid(fractions_text);
            if (!v_seeds.empty()) vcfg.seeds = v_seeds;
            if (v_slots) vcfg.slots = *v_slots;
            if (v_warmup) vcfg.warmup = *v_warmup;
            code = cmd_validate(ctx, vcfg);
        }
        // Sweeps along different axes can share an output directory.
        ctx.finish(sub->get_name(), sub == sweep ? "sweep_" + axis : std::string());
        return code;
    } catch (const ScenarioError& e) {
        err << "error: scenario field " << e.what() << "\n";
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return ExitCode::kUsageOrInput;
}

}  // namespace wlancap::cli
