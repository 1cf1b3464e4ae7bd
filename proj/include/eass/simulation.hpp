#pragma once

// Scenario -> per-core tables -> engine run.

#include <eass/engine.hpp>
#include <eass/workload.hpp>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace eass {

inline constexpr Slot kMaxHyperperiod = 4096;

/// The scenario's horizon, or the hyperperiod of its periodic tasks when the
/// horizon is left at zero.
inline Slot scenario_horizon(const Scenario& s) {
    if (s.horizon_slots > 0) return s.horizon_slots;
    if (s.horizon_slots < 0) throw InputError("negative horizon");
    Slot h = 1;
    for (const auto& t : s.tasks) {
        h = std::lcm(h, t.period);
        if (h > kMaxHyperperiod)
            throw InputError("hyperperiod exceeds " + std::to_string(kMaxHyperperiod) +
                             " slots; set horizon_slots explicitly");
    }
    return h;
}

inline void validate_scenario(const Scenario& s) {
    if (s.cores < 1) throw InputError("scenario needs at least one core");
    if (s.slot_length_us < 1) throw InputError("slot_length_us must be positive");
    for (const auto& t : s.tasks) {
        if (t.period < 1) throw InputError("task " + std::to_string(t.id) + " needs a positive period");
        if (t.wcet < 0 || t.wcet > t.period)
            throw InputError("task " + std::to_string(t.id) + " needs 0 <= wcet <= period");
        if (t.core < 0 || t.core >= s.cores)
            throw InputError("task " + std::to_string(t.id) + " assigned to missing core " + std::to_string(t.core));
    }
    for (const auto& a : s.admissions) {
        if (a.arrival < 0 || a.wcet < 0) throw InputError("admission with negative arrival or WCET");
        if (a.period && *a.period < 1) throw InputError("periodic admission needs a positive period");
    }
}

/// Jobs of every periodic task whose deadline lies within the horizon.
inline std::vector<std::vector<JobInstance>> expand_periodic(const Scenario& s, Slot horizon) {
    std::vector<std::vector<JobInstance>> per_core(static_cast<std::size_t>(s.cores));
    for (const auto& t : s.tasks) {
        std::int64_t k = 0;
        for (Slot r = 0; r + t.period <= horizon; r += t.period, ++k)
            per_core[static_cast<std::size_t>(t.core)].push_back(JobInstance::make(t.id, k, r, r + t.period, t.wcet));
    }
    return per_core;
}

/// Offline tables with spare capacities; throws if a core is infeasible.
inline std::vector<CoreTable> build_tables(const Scenario& s) {
    validate_scenario(s);
    const Slot horizon = scenario_horizon(s);
    auto per_core = expand_periodic(s, horizon);
    std::vector<CoreTable> tables;
    for (int c = 0; c < s.cores; ++c) {
        auto t = build_intervals(std::move(per_core[static_cast<std::size_t>(c)]), horizon, c);
        compute_spare_capacities(t);
        if (!verify_feasible(t)) throw InputError("offline task set on core " + std::to_string(c) + " is infeasible");
        tables.push_back(std::move(t));
    }
    return tables;
}

/// Queues the scenario's admissions; aperiodic task ids follow the largest
/// periodic id.
inline void submit_admissions(Engine& engine, const Scenario& s) {
    TaskId next = 0;
    for (const auto& t : s.tasks) next = std::max(next, t.id + 1);
    for (const auto& a : s.admissions) {
        if (a.period) {
            TaskSpec t;
            t.id = next++;
            t.wcet = a.wcet;
            t.period = *a.period;
            t.core = a.preferred_core.value_or(0);
            engine.submit_periodic(t, a.arrival);
        } else {
            engine.submit(AdmissionRequest{JobInstance::make(next++, 0, a.arrival, a.deadline, a.wcet), a.preferred_core});
        }
    }
}

/// The scenario's slot length and core count override the platform's.
inline SimResult simulate(const Scenario& s, Platform platform, const EngineOptions& options) {
    platform.slot_length_us = s.slot_length_us;
    platform.cores = s.cores;
    Engine engine(std::move(platform), build_tables(s), options);
    submit_admissions(engine, s);
    return engine.run();
}

} // namespace eass
