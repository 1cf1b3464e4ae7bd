#pragma once

// Per-core runtime state and the slot-level primitives shared by every
// policy: EDF selection, spare-capacity maintenance, best-effort fill.

#include <eass/core_model.hpp>
#include <eass/table.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string_view>
#include <utility>

namespace eass {

enum class Policy { bss, eass_dpm, eass_dvfs };

inline const char* to_string(Policy p) {
    switch (p) {
    case Policy::bss: return "BSS";
    case Policy::eass_dpm: return "EASS-DPM";
    case Policy::eass_dvfs: return "EASS-DVFS";
    }
    return "?";
}

inline std::optional<Policy> parse_policy(std::string_view s) {
    if (s == "BSS" || s == "bss") return Policy::bss;
    if (s == "EASS-DPM" || s == "eass-dpm" || s == "dpm") return Policy::eass_dpm;
    if (s == "EASS-DVFS" || s == "eass-dvfs" || s == "dvfs") return Policy::eass_dvfs;
    return std::nullopt;
}

/// Ready-queue key: EDF order with (task id, job index) tie-breaks.
struct ReadyKey {
    Slot deadline = 0;
    TaskId task = 0;
    std::int64_t index = 0;
    std::size_t job = 0;

    friend auto operator<=>(const ReadyKey&, const ReadyKey&) = default;
};

/// One slot's choice for a core.
struct Decision {
    enum class Kind { run, idle, sleep, best_effort };
    Kind kind = Kind::idle;
    std::size_t job = 0;
    NormalizedFrequency freq = NormalizedFrequency::max();
    std::size_t level = 0;
    std::size_t sleep_state = 0;
    Slot duration = 0;
    // c / (c + available spare) before ladder rounding; audited for DVFS runs.
    NormalizedFrequency ideal = NormalizedFrequency::max();
    bool idle_at_level = false;
};

struct CoreState {
    enum class Mode { idle, running, sleeping, best_effort };

    int core = 0;
    CoreTable table;
    std::set<ReadyKey> ready;
    std::set<std::pair<Slot, std::size_t>> pending; // (release, job)

    Mode mode = Mode::idle;
    std::optional<std::size_t> running_job;
    NormalizedFrequency freq = NormalizedFrequency::max();
    std::size_t sleep_state = 0;
    Slot sleep_remaining = 0;
    Slot wake_slot = 0;

    std::int64_t sc_updates = 0;

    friend bool operator==(const CoreState&, const CoreState&) = default;

    bool sleeping() const { return mode == Mode::sleeping && sleep_remaining > 0; }

    /// Slot from which the core can execute again.
    Slot available_from() const { return sleeping() ? wake_slot : table.now; }

    ReadyKey key_of(std::size_t job) const {
        const auto& j = table.jobs[job];
        return ReadyKey{j.deadline, j.task, j.index, job};
    }

    /// Queues a table job as pending or ready depending on its release.
    void enqueue(std::size_t job) {
        auto& j = table.jobs[job];
        if (j.complete()) return;
        if (j.release <= table.now) {
            j.state = JobState::ready;
            ready.insert(key_of(job));
        } else {
            j.state = JobState::pending;
            pending.emplace(j.release, job);
        }
    }

    void enqueue_all() {
        for (std::size_t i = 0; i < table.jobs.size(); ++i) enqueue(i);
    }

    /// Moves pending jobs released at or before table.now into the ready queue.
    void release_due() {
        while (!pending.empty() && pending.begin()->first <= table.now) {
            auto job = pending.begin()->second;
            pending.erase(pending.begin());
            table.jobs[job].state = JobState::ready;
            ready.insert(key_of(job));
        }
    }
};

inline CoreState make_core_state(CoreTable table) {
    CoreState cs;
    cs.core = table.core;
    cs.table = std::move(table);
    cs.enqueue_all();
    return cs;
}

/// Ready job with the earliest deadline, ties by task id then job index.
inline std::optional<std::size_t> pick_edf_job(const CoreState& cs) {
    if (cs.ready.empty()) return std::nullopt;
    return cs.ready.begin()->job;
}

/// Executes `job` for one slot at `f`: c decreases by f, capped at c.
/// Returns true when the job completed in this slot.
inline bool execute_slot(CoreState& cs, std::size_t job, NormalizedFrequency f) {
    auto& j = cs.table.jobs[job];
    j.remaining -= min(j.remaining, f.work_per_slot());
    if (!j.remaining.is_zero()) return false;
    cs.ready.erase(cs.key_of(job));
    j.state = JobState::complete;
    return true;
}

/// Spare-capacity bookkeeping after one slot on this core.
///
/// The current interval loses the elapsed slot. An executed job accrues f
/// as reserved spare capacity; each whole slot of it is returned to the
/// job's interval, and the credit cascades to earlier intervals (never past
/// the current one) while the interval just credited was borrowing.
inline void update_spare_capacity(CoreState& cs, std::optional<std::size_t> executed, NormalizedFrequency f) {
    auto& table = cs.table;
    ++cs.sc_updates;
    if (table.has_current()) table.intervals[table.current].sc -= 1;
    if (!executed) return;

    auto& job = table.jobs[*executed];
    job.reserved_sc += f.work_per_slot();
    while (job.reserved_sc >= Work::slots(1)) {
        job.reserved_sc -= Work::slots(1);
        auto idx = table.interval_of_job(*executed);
        for (;;) {
            const auto prev = table.intervals[idx].sc;
            table.intervals[idx].sc += 1;
            if (prev >= 0 || idx <= table.current) break;
            --idx;
        }
    }
    // Surplus from a job finishing mid-slot belongs to no one.
    if (job.complete()) job.reserved_sc = Work{};
}

/// Consumes the slot for best-effort work when enabled; the caller charges
/// energy. Guaranteed-job accounting is untouched beyond the usual sc
/// decrement done by update_spare_capacity.
inline bool run_best_effort(CoreState& cs, bool backlog_enabled) {
    if (!backlog_enabled) {
        cs.mode = CoreState::Mode::idle;
        return false;
    }
    cs.mode = CoreState::Mode::best_effort;
    return true;
}

} // namespace eass
