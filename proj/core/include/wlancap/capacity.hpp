#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wlancap/model.hpp"

namespace wlancap {

struct BoundaryTau {
    double tau;
    /// False when no tau in (0, 1) reaches the target collision probability;
    /// tau is then reported as 1.
    bool reached;
};

/// The attempt probability at which p_c(tau) = 1 / r^exponent, exponent 1..3.
/// Exponent 2 bounds the mean delay, 3 the delay jitter, 1 the mean access
/// delay of the saturated queue.
BoundaryTau boundary_tau(const Scenario& scenario, int exponent);

/// Attempt probability with p_c(tau) equal to `target`, by bisection.
BoundaryTau tau_for_collision_prob(const Scenario& scenario, double target);

struct CapacityReport {
    double tau_s;
    double s_s_bps;
    double tau_star;
    double s_star_bps;
    double tau_bbmd;
    double s_bbmd_bps;
    double tau_bbdj;
    double s_bbdj_bps;
    double s_sbmd_bps;
    double s_sbdj_bps;
    int scenario_class;
    /// The delay boundary was replaced by the saturation point because the
    /// queue becomes unstable before p_c reaches 1/r^2 (or 1/r^3).
    bool bbmd_clamped;
    bool bbdj_clamped;
};

/// Saturation point, throughput peak, delay boundaries, safe throughputs and
/// the four-way classification of the S-tau geometry:
///   1: tau_s <= tau*
///   2: tau_bbmd <= tau* < tau_s and S_bbmd <= S_s
///   3: tau_bbmd <= tau* < tau_s and S_bbmd > S_s
///   4: tau* < tau_bbmd
/// Ties go to the lower class number.
CapacityReport capacity_report(const Scenario& scenario);

int classify(double tau_s, double tau_star, double tau_bbmd, double s_bbmd, double s_s);

enum class DelayObjective { MeanDelay, Jitter };
enum class OptimizeMode { LargeN, Exact };

std::string_view to_string(DelayObjective objective);
std::string_view to_string(OptimizeMode mode);
DelayObjective delay_objective_from_string(std::string_view name);
OptimizeMode optimize_mode_from_string(std::string_view name);

struct OptimizeOptions {
    DelayObjective objective = DelayObjective::MeanDelay;
    OptimizeMode mode = OptimizeMode::LargeN;
    double r_min = 1.001;
    double r_max = 16.0;
};

struct OptimalR {
    double r_star;
    /// Safe throughput (SBMD or SBDJ) at r_star, bits per second.
    double s_safe_bps;
    /// r_star sits on an end of the search interval rather than inside it.
    bool at_boundary;
};

/// Backoff factor maximising the safe throughput.
///
/// LargeN: the saturation point is taken where p_c = 1/r and the delay
/// boundary where p_c = 1/r^2 (1/r^3 for jitter); r* equates the two
/// throughputs and is found by bisection.
/// Exact: maximises min(S_boundary(r), S_s(r)) from capacity_report by
/// golden-section search seeded on a coarse grid.
OptimalR optimize_r(const Scenario& scenario, const OptimizeOptions& options = {});

/// Safe throughput min(S(boundary), S(saturation)) in the large-N
/// approximation for a given r; the function optimize_r maximises there.
double large_n_safe_throughput(const Scenario& scenario, double r, DelayObjective objective);

struct ScalingRow {
    int m;
    double r_sbmd;
    double s_sbmd_per_m_bps;
    double r_sbdj;
    double s_sbdj_per_m_bps;
    bool ok;
    std::string error;
};

/// Optimal safe throughput normalised by M for each MPR capability.
std::vector<ScalingRow> scaling_sweep(const Scenario& base, const std::vector<int>& m_values,
                                      OptimizeMode mode = OptimizeMode::LargeN);

struct SensitivityRow {
    double r;
    double s_s_bps;
    double s_sbmd_bps;
    double s_sbdj_bps;
    bool ok;
    std::string error;
};

/// Saturation and safe throughputs (exact model) across a grid of r.
std::vector<SensitivityRow> sensitivity_curve(const Scenario& scenario, const std::vector<double>& r_grid);

/// (max - min) / max over a column, ignoring rows that failed.
double relative_range(const std::vector<SensitivityRow>& rows, double SensitivityRow::*column);

}  // namespace wlancap
