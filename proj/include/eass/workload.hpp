#pragma once

// UUnifast task-set generation and scenario assembly.

#include <eass/core_model.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace eass {

struct SlotRange {
    Slot lo = 0;
    Slot hi = 0;

    bool valid() const { return lo >= 0 && lo <= hi; }
    double mid() const { return 0.5 * static_cast<double>(lo + hi); }
    friend bool operator==(const SlotRange&, const SlotRange&) = default;
};

struct ScenarioAdmission {
    Slot arrival = 0;
    Slot wcet = 0;
    Slot deadline = 0;
    std::optional<int> preferred_core;
    std::optional<Slot> period; // set for a new periodic VM; deadline - arrival is then ignored

    friend bool operator==(const ScenarioAdmission&, const ScenarioAdmission&) = default;
};

/// A generated (or hand-written) test case: the offline periodic task set
/// with its core assignment plus the stream of run-time admissions.
struct Scenario {
    Slot horizon_slots = 0;
    Slot slot_length_us = 1000;
    int cores = 1;
    std::vector<TaskSpec> tasks;
    std::vector<ScenarioAdmission> admissions;
    std::uint64_t seed = 0;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct AperiodicSpec {
    double utilization = 0.0; // total over all cores
    SlotRange wcet{10, 15};
    SlotRange period{10, 15}; // relative-deadline window
};

/// Generation parameters; defaults follow the energy-usage experiment.
struct GenSpec {
    double utilization = 0.8; // total over all cores, in (0, cores]
    std::optional<int> n_tasks;
    SlotRange wcet{1, 15};
    SlotRange period{15, 50};
    AperiodicSpec aperiodic;
    int cores = 4;
    std::uint64_t seed = 1;
    SlotRange horizon{1800, 2200};
    Slot slot_length_us = 1000;
    int max_attempts = 1000;
};

/// UUnifast with an explicit source of uniform [0, 1) draws:
/// sum_{i+1} = sum_i * r^(1 / (n - i)), u_i = sum_i - sum_{i+1}.
template <class Draw>
std::vector<double> uunifast_with(int n, double total, Draw&& draw) {
    if (n < 1) throw InputError("uunifast needs n >= 1");
    if (!(total > 0.0)) throw InputError("uunifast needs a positive utilization");
    std::vector<double> u;
    u.reserve(static_cast<std::size_t>(n));
    double sum = total;
    for (int i = 1; i < n; ++i) {
        const double next = sum * std::pow(draw(), 1.0 / static_cast<double>(n - i));
        u.push_back(sum - next);
        sum = next;
    }
    u.push_back(sum);
    return u;
}

inline std::vector<double> uunifast(int n, double total, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return uunifast_with(n, total, [&] { return unit(rng); });
}

namespace detail {

inline Slot draw_in(std::mt19937_64& rng, SlotRange r) {
    return std::uniform_int_distribution<Slot>(r.lo, r.hi)(rng);
}

/// Worst-fit decreasing by utilization; returns false if a core exceeds 1.
inline bool partition_worst_fit(std::vector<TaskSpec>& tasks, int cores) {
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        // Cross-multiplied to compare C/T exactly.
        return tasks[a].wcet * tasks[b].period > tasks[b].wcet * tasks[a].period;
    });
    std::vector<double> load(static_cast<std::size_t>(cores), 0.0);
    for (auto i : order) {
        auto c = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
        tasks[i].core = static_cast<int>(c);
        load[c] += tasks[i].utilization();
    }
    return std::all_of(load.begin(), load.end(), [](double l) { return l <= 1.0 + 1e-12; });
}

} // namespace detail

/// Draws a partitioned periodic task set and an aperiodic admission stream.
inline Scenario generate_taskset(const GenSpec& spec) {
    if (spec.cores < 1) throw InputError("generator needs at least one core");
    if (!spec.wcet.valid() || !spec.period.valid() || !spec.horizon.valid() || !spec.aperiodic.wcet.valid() ||
        !spec.aperiodic.period.valid())
        throw InputError("generator ranges must satisfy 0 <= lo <= hi");
    if (spec.wcet.lo < 1 || spec.period.lo < 1 || spec.horizon.lo < 1)
        throw InputError("WCET, period and horizon ranges must start at 1 or above");
    if (!(spec.utilization > 0.0) || spec.utilization > static_cast<double>(spec.cores))
        throw InputError("utilization " + std::to_string(spec.utilization) + " unsatisfiable on " +
                         std::to_string(spec.cores) + " cores");
    if (spec.aperiodic.utilization < 0.0) throw InputError("negative aperiodic utilization");

    std::mt19937_64 rng(spec.seed);
    Scenario sc;
    sc.seed = spec.seed;
    sc.cores = spec.cores;
    sc.slot_length_us = spec.slot_length_us;
    sc.horizon_slots = detail::draw_in(rng, spec.horizon);

    const double typical = spec.wcet.mid() / spec.period.mid();
    const int n = spec.n_tasks.value_or(
        std::max(spec.cores, static_cast<int>(std::lround(spec.utilization / typical))));
    if (n < 1) throw InputError("task count must be positive");

    bool ok = false;
    for (int attempt = 0; attempt < spec.max_attempts && !ok; ++attempt) {
        const auto utils = uunifast(n, spec.utilization, rng);
        sc.tasks.clear();
        for (int i = 0; i < n; ++i) {
            TaskSpec t;
            t.id = i;
            t.kind = TaskKind::periodic;
            t.period = detail::draw_in(rng, spec.period);
            const auto c = static_cast<Slot>(std::lround(utils[static_cast<std::size_t>(i)] * static_cast<double>(t.period)));
            t.wcet = std::min(std::clamp(c, spec.wcet.lo, spec.wcet.hi), t.period);
            sc.tasks.push_back(t);
        }
        ok = detail::partition_worst_fit(sc.tasks, spec.cores);
    }
    if (!ok)
        throw InputError("no task set with per-core utilization <= 1 after " + std::to_string(spec.max_attempts) +
                         " attempts");

    const auto& ap = spec.aperiodic;
    if (ap.utilization > 0.0) {
        const auto count = static_cast<std::int64_t>(
            std::llround(ap.utilization * static_cast<double>(sc.horizon_slots) / ap.wcet.mid()));
        for (std::int64_t k = 0; k < count; ++k) {
            ScenarioAdmission a;
            a.wcet = detail::draw_in(rng, ap.wcet);
            const Slot window = std::max(detail::draw_in(rng, ap.period), a.wcet);
            if (window > sc.horizon_slots) continue;
            a.arrival = detail::draw_in(rng, SlotRange{0, sc.horizon_slots - window});
            a.deadline = a.arrival + window;
            a.preferred_core = static_cast<int>(detail::draw_in(rng, SlotRange{0, spec.cores - 1}));
            sc.admissions.push_back(a);
        }
        std::stable_sort(sc.admissions.begin(), sc.admissions.end(),
                         [](const ScenarioAdmission& a, const ScenarioAdmission& b) { return a.arrival < b.arrival; });
    }
    return sc;
}

} // namespace eass
