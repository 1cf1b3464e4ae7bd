#pragma once

// Slot decisions for the three schedulers: the base slot-shifting scheduler
// (BSS), the sleep-state variant (EASS-DPM) and the frequency-scaling
// variant (EASS-DVFS).

#include <eass/energy.hpp>
#include <eass/runtime.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>

namespace eass {

struct PolicyOptions {
    bool best_effort = false;
    std::size_t best_effort_level = 0; // ladder index; defaults to the top level
};

namespace detail {

inline Decision fill_idle(const Platform& platform, const PolicyOptions& opts) {
    Decision d;
    if (opts.best_effort) {
        d.kind = Decision::Kind::best_effort;
        d.level = std::min(opts.best_effort_level, platform.ladder.max_index());
        d.freq = platform.ladder.levels()[d.level];
    } else {
        d.kind = Decision::Kind::idle;
    }
    return d;
}

inline Decision run_at_max(std::size_t job, const Platform& platform) {
    Decision d;
    d.kind = Decision::Kind::run;
    d.job = job;
    d.level = platform.ladder.max_index();
    d.freq = platform.ladder.levels()[d.level];
    return d;
}

} // namespace detail

inline Decision bss_decide(const CoreState& cs, const Platform& platform, const PolicyOptions& opts = {}) {
    if (auto job = pick_edf_job(cs)) return detail::run_at_max(*job, platform);
    return detail::fill_idle(platform, opts);
}

/// How long the core may stay idle from now, in slots.
///
/// The current interval's spare capacity, extended (when the current
/// interval has no remaining execution) by the positive spare capacity of
/// following intervals up to and including the first one that still has
/// remaining execution.
inline Slot low_power_duration(const CoreTable& table) {
    if (!table.has_current()) return 0;
    const auto& ivs = table.intervals;
    std::int64_t duration = ivs[table.current].sc;
    if (table.rem_exec(table.current).is_zero()) {
        for (auto i = table.current + 1; i < ivs.size(); ++i) {
            duration += std::max<std::int64_t>(0, ivs[i].sc);
            if (!table.rem_exec(i).is_zero()) break;
        }
    }
    return std::max<std::int64_t>(duration, 0);
}

/// Deepest sleep state whose latency + residency fit in `duration` slots and
/// whose break-even time does not exceed the window.
inline std::optional<std::size_t> select_sleep_state(const Platform& platform, Slot duration) {
    const double window_s = static_cast<double>(duration) * platform.slot_seconds();
    for (auto i = platform.sleep_states.size(); i-- > 0;) {
        const auto& s = platform.sleep_states[i];
        if (s.min_residency_slots + s.latency_slots > duration) continue;
        if (s.break_even_s(platform.p_idle_w) > window_s) continue;
        return i;
    }
    return std::nullopt;
}

/// Runs ready work greedily at full speed; otherwise consolidates the idle
/// time the spare capacity allows into one sleep window.
inline Decision dpm_decide(const CoreState& cs, const Platform& platform, const PolicyOptions& opts = {}) {
    if (auto job = pick_edf_job(cs)) return detail::run_at_max(*job, platform);
    const Slot duration = low_power_duration(cs.table);
    if (duration > 0) {
        if (auto state = select_sleep_state(platform, duration)) {
            Decision d;
            d.kind = Decision::Kind::sleep;
            d.sleep_state = *state;
            d.duration = duration;
            return d;
        }
    }
    return detail::fill_idle(platform, opts);
}

/// Slack the job may spend by running slower: its interval's positive spare
/// capacity, its reserved spare capacity, and the spare capacity of leading
/// intervals that have nothing left to execute.
inline Work available_spare_capacity(const CoreTable& table, std::size_t job) {
    const auto j_iv = table.interval_of_job(job);
    Work spare = Work::slots(std::max<std::int64_t>(0, table.intervals[j_iv].sc)) + table.jobs[job].reserved_sc;
    for (auto i = table.current; i < table.intervals.size(); ++i) {
        if (i == j_iv || !table.rem_exec(i).is_zero() || table.intervals[i].sc <= 0) break;
        spare += Work::slots(table.intervals[i].sc);
    }
    return spare;
}

/// Lowest frequency that stretches `remaining` over remaining + spare,
/// rounded up to the Work grid.
inline NormalizedFrequency spread_frequency(Work remaining, Work spare) {
    if (remaining.is_zero()) return NormalizedFrequency::from_raw(1);
    const __int128 num = static_cast<__int128>(remaining.raw()) * Work::kScale;
    const __int128 den = static_cast<__int128>(remaining.raw()) + spare.raw();
    auto raw = static_cast<std::int64_t>((num + den - 1) / den);
    return NormalizedFrequency::from_raw(std::clamp<std::int64_t>(raw, 1, Work::kScale));
}

inline Decision dvfs_decide(const CoreState& cs, const Platform& platform, const PolicyOptions& opts = {}) {
    const auto& ladder = platform.ladder;
    auto job = pick_edf_job(cs);
    if (!job) {
        if (opts.best_effort) return detail::fill_idle(platform, opts);
        Decision d;
        d.kind = Decision::Kind::idle;
        d.idle_at_level = true;
        d.level = 0;
        d.freq = ladder.min_level();
        return d;
    }
    Decision d;
    d.kind = Decision::Kind::run;
    d.job = *job;
    d.ideal = spread_frequency(cs.table.jobs[*job].remaining, available_spare_capacity(cs.table, *job));
    d.level = ladder.select_index(std::max(d.ideal, ladder.min_level()));
    d.freq = ladder.levels()[d.level];
    return d;
}

inline Decision decide(Policy policy, const CoreState& cs, const Platform& platform, const PolicyOptions& opts) {
    switch (policy) {
    case Policy::bss: return bss_decide(cs, platform, opts);
    case Policy::eass_dpm: return dpm_decide(cs, platform, opts);
    case Policy::eass_dvfs: return dvfs_decide(cs, platform, opts);
    }
    return bss_decide(cs, platform, opts);
}

} // namespace eass
