#pragma once

// Run-time admission of new jobs: the acceptance test over spare
// capacities, insertion into a core's table, and first-fit delegation
// across cores.

#include <eass/runtime.hpp>
#include <eass/table.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eass {

struct AdmissionRequest {
    JobInstance job; // release is the arrival slot
    std::optional<int> preferred_core;
};

struct AdmissionOutcome {
    bool accepted = false;
    int core = -1;
    bool delegated = false; // accepted somewhere other than the preferred core
    std::string reason;
};

/// Whether `job` can be added to this core without endangering any deadline.
///
/// A job released by the time the core can next execute is accepted iff the
/// positive spare capacity from now up to its deadline covers its WCET
/// (intervals split virtually at the deadline). `busy_until` marks slots
/// already committed to idling (a sleep window in progress); they are not
/// offered to the job. A job released later cannot use the spare capacity
/// before its release, so it is checked by an EDF simulation of the table
/// with the job added. The table is not modified.
inline bool acceptance_test(const CoreTable& table, const JobInstance& job, std::optional<Slot> busy_until = std::nullopt) {
    if (job.deadline > table.horizon || job.deadline <= table.now || !table.has_current()) return false;
    if (job.wcet == 0) return true;

    const Slot start = std::max(table.now, busy_until.value_or(table.now));
    if (job.release > start) {
        CoreTable trial;
        trial.horizon = table.horizon;
        trial.now = start;
        trial.jobs = table.jobs;
        trial.jobs.push_back(job);
        return verify_feasible(trial);
    }

    const Slot d = job.deadline;
    const auto& ivs = table.intervals;
    const auto last = table.interval_containing(d - 1);
    std::int64_t usable = 0;
    for (auto i = table.current; i <= last; ++i) {
        const auto& iv = ivs[i];
        if (iv.end <= d) {
            usable += std::max<std::int64_t>(0, iv.sc);
            continue;
        }
        // Deadline falls inside: re-derive sc for the front piece, whose
        // successor is the back piece holding all members.
        Work committed;
        for (auto j : iv.jobs) committed += table.jobs[j].committed();
        const std::int64_t carry = i + 1 < ivs.size() ? ivs[i + 1].sc : 0;
        const std::int64_t back = (iv.end - d) - detail::whole_slots(committed) + std::min<std::int64_t>(carry, 0);
        const std::int64_t front = (d - std::max(iv.start, table.now)) + std::min<std::int64_t>(back, 0);
        usable += std::max<std::int64_t>(0, front);
    }
    usable -= start - table.now;
    return usable >= job.wcet;
}

/// Adds `job` to the table, splitting the interval that contains its
/// deadline when no interval ends there, and re-evaluates sc from there
/// back to the current one. Returns the job's index in the table.
inline std::size_t insert_job(CoreTable& table, JobInstance job) {
    const auto before = table.intervals.size();
    const auto k = table.ensure_boundary(job.deadline);
    // A split leaves the back part holding the old interval's sc.
    const auto last = table.intervals.size() != before ? k + 1 : k;
    job.state = job.wcet == 0 ? JobState::complete : JobState::pending;
    table.jobs.push_back(std::move(job));
    const auto idx = table.jobs.size() - 1;
    table.intervals[k].jobs.push_back(idx);
    evaluate_spare_capacities(table, table.current, last);
    return idx;
}

/// Tries the preferred core, then the rest in ascending order; the first
/// core whose acceptance test passes takes the job. No state changes on
/// rejection.
inline AdmissionOutcome admit(std::span<CoreState> cores, const AdmissionRequest& request) {
    AdmissionOutcome out;
    const auto& job = request.job;
    if (job.wcet < 0) {
        out.reason = "negative WCET";
        return out;
    }
    if (cores.empty()) {
        out.reason = "no cores";
        return out;
    }
    if (job.deadline > cores.front().table.horizon) {
        out.reason = "deadline beyond table horizon";
        return out;
    }
    const Slot now = cores.front().table.now;
    if (std::max(job.release, now) + job.wcet > job.deadline) {
        out.reason = "window shorter than WCET";
        return out;
    }

    std::vector<int> order;
    if (request.preferred_core && *request.preferred_core >= 0 &&
        *request.preferred_core < static_cast<int>(cores.size()))
        order.push_back(*request.preferred_core);
    for (int c = 0; c < static_cast<int>(cores.size()); ++c)
        if (order.empty() || c != order.front()) order.push_back(c);

    for (int c : order) {
        auto& cs = cores[static_cast<std::size_t>(c)];
        std::optional<Slot> busy;
        if (cs.sleeping()) busy = cs.wake_slot;
        if (!acceptance_test(cs.table, job, busy)) continue;
        const auto idx = insert_job(cs.table, job);
        cs.enqueue(idx);
        out.accepted = true;
        out.core = c;
        out.delegated = c != order.front();
        out.reason = "accepted";
        return out;
    }
    out.reason = "insufficient spare capacity on every core";
    return out;
}

/// Admits every job of a new periodic task that fits before the horizon,
/// starting at `arrival`. All or nothing: on any rejection the cores are
/// restored to their prior state.
inline AdmissionOutcome admit_periodic(std::span<CoreState> cores, const TaskSpec& task, Slot arrival) {
    AdmissionOutcome out;
    if (task.period < 1 || task.wcet < 0 || task.wcet > task.period) {
        out.reason = "invalid periodic task";
        return out;
    }
    if (cores.empty()) {
        out.reason = "no cores";
        return out;
    }
    std::vector<CoreState> snapshot(cores.begin(), cores.end());
    const Slot horizon = cores.front().table.horizon;
    bool delegated = false;
    std::int64_t k = 0;
    for (Slot r = arrival; r + task.period <= horizon; r += task.period, ++k) {
        AdmissionRequest req{JobInstance::make(task.id, k, r, r + task.period, task.wcet), task.core};
        auto res = admit(cores, req);
        if (!res.accepted) {
            std::copy(snapshot.begin(), snapshot.end(), cores.begin());
            out.reason = "job " + std::to_string(k) + " rejected: " + res.reason;
            return out;
        }
        if (k == 0) out.core = res.core;
        delegated = delegated || res.delegated;
    }
    out.accepted = true;
    out.delegated = delegated;
    out.reason = "accepted";
    if (out.core < 0) out.core = task.core;
    return out;
}

} // namespace eass
