#pragma once

// Access-delay transform evaluated in 200-digit binary floating point, and
// its first three derivatives at s = 0 by forward differences. A step of
// 1e-30 / E[X] makes the O(h) bias negligible. Each countdown factor
// (1 - z^W) / (W (1 - z)) loses about 30 digits to cancellation at that
// step, and the third difference divides by h^3 ~ 1e-90, so 100 digits would
// not be enough; 200 leave the result far below 1e-9 relative error.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>

#include "oracles.hpp"
#include "wlancap/model.hpp"

namespace oracle {

using mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

class MpTransform {
public:
    MpTransform(double tau, const wlancap::Scenario& s, int truncation) : s_(s), truncation_(truncation) {
        const auto p = slot_probs(tau, s.n() - 1, s.m());
        // Rebuild the last probability so the three sum to one at full
        // precision; otherwise the transform at s = h would differ from 1 by
        // the double rounding error, which swamps an O(h) difference.
        p_idle_ = mp(static_cast<double>(p.idle));
        p_coll_ = mp(static_cast<double>(p.coll));
        p_succ_ = 1 - p_idle_ - p_coll_;
        p_c_ = mp(static_cast<double>(collision_prob(tau, s.n(), s.m())));
    }

    /// E[exp(-s X)] over the first `truncation` attempts, attempt weights
    /// renormalised to that support.
    mp operator()(const mp& s) const { return evaluate(s, truncation_); }

    /// First three raw moments from forward differences with step h.
    ///
    /// Stages whose countdown spans many multiples of 1/h are not smooth on
    /// the scale of the step, so the differences only keep attempts whose
    /// window satisfies W h t_max < 1e-6. The renormalised series then
    /// differs from the full one by O((p_c r^3)^J), negligible for the
    /// parameter ranges the tests use.
    std::array<double, 3> moments(const mp& h) const {
        const auto& t = s_.timing();
        const double t_max = std::max({t.t_idle_us(), t.t_coll_us(), t.t_succ_us()});
        int kept = 0;
        mp window = s_.mac().w0();
        while (kept < truncation_) {
            mp w = window;
            if (s_.mac().cw_max()) w = std::min(w, mp(*s_.mac().cw_max()));
            if (w * h * t_max >= mp("1e-6")) break;
            ++kept;
            window *= s_.mac().r();
        }
        kept = std::max(kept, 1);
        const mp f0 = evaluate(mp(0), kept), f1 = evaluate(h, kept), f2 = evaluate(2 * h, kept),
                 f3 = evaluate(3 * h, kept);
        const mp m1 = -(f1 - f0) / h;
        const mp m2 = (f2 - 2 * f1 + f0) / (h * h);
        const mp m3 = -(f3 - 3 * f2 + 3 * f1 - f0) / (h * h * h);
        return {static_cast<double>(m1), static_cast<double>(m2), static_cast<double>(m3)};
    }

private:
    mp evaluate(const mp& s, int truncation) const {
        if (s == 0) return mp(1);
        const auto& t = s_.timing();
        const mp z = p_idle_ * exp(-s * t.t_idle_us()) + p_coll_ * exp(-s * t.t_coll_us()) +
                     p_succ_ * exp(-s * t.t_succ_us());
        const mp log_z = log(z);
        mp product = 1, weight = 1 - p_c_, mass = 0, value = 0;
        mp window = s_.mac().w0();
        for (int j = 1; j <= truncation; ++j) {
            mp w = window;
            if (s_.mac().cw_max()) w = std::min(w, mp(*s_.mac().cw_max()));
            product *= (1 - exp(w * log_z)) / (w * (1 - z));
            value += weight * product * exp(-s * (mp(j - 1) * t.t_coll_us() + t.t_succ_us()));
            mass += weight;
            weight *= p_c_;
            window *= s_.mac().r();
        }
        return value / mass;
    }

    wlancap::Scenario s_;
    int truncation_;
    mp p_idle_, p_coll_, p_succ_, p_c_;
};

}  // namespace oracle
