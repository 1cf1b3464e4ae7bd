#pragma once

// Annotated per-core scheduling table: capacity intervals, their spare
// capacities, and the offline feasibility check.

#include <eass/core_model.hpp>

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

namespace eass {

/// A contiguous slot range [start, end) closed by a unique job deadline.
/// Every member job has deadline == end; empty intervals have no members.
struct CapacityInterval {
    Slot start = 0;
    Slot end = 0;
    std::vector<std::size_t> jobs; // indices into CoreTable::jobs
    std::int64_t sc = 0;

    bool empty() const { return jobs.empty(); }
    Slot length() const { return end - start; }

    friend bool operator==(const CapacityInterval&, const CapacityInterval&) = default;
};

struct CoreTable {
    int core = 0;
    Slot horizon = 0;
    Slot now = 0;
    std::size_t current = 0;
    std::vector<JobInstance> jobs;
    std::vector<CapacityInterval> intervals;

    friend bool operator==(const CoreTable&, const CoreTable&) = default;

    bool has_current() const { return current < intervals.size(); }

    /// Interval whose end equals `deadline`, or intervals.size().
    std::size_t interval_ending_at(Slot deadline) const {
        auto it = std::lower_bound(intervals.begin(), intervals.end(), deadline,
                                   [](const CapacityInterval& iv, Slot d) { return iv.end < d; });
        if (it == intervals.end() || it->end != deadline) return intervals.size();
        return static_cast<std::size_t>(it - intervals.begin());
    }

    /// First interval with end > t, i.e. the one containing slot t.
    std::size_t interval_containing(Slot t) const {
        auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                                   [](Slot v, const CapacityInterval& iv) { return v < iv.end; });
        return static_cast<std::size_t>(it - intervals.begin());
    }

    std::size_t interval_of_job(std::size_t job) const {
        return interval_ending_at(jobs[job].deadline);
    }

    /// Remaining execution of the member jobs, released or not.
    Work rem_exec(std::size_t interval) const {
        Work sum;
        for (auto j : intervals[interval].jobs) sum += jobs[j].remaining;
        return sum;
    }

    /// Slots of `interval` still ahead of `now`.
    Slot remaining_length(std::size_t interval) const {
        const auto& iv = intervals[interval];
        return iv.end - std::max(iv.start, now);
    }

    void advance_to(Slot t) {
        now = t;
        while (current < intervals.size() && intervals[current].end <= now) ++current;
    }

    /// Makes `t` an interval boundary by splitting the interval containing it.
    /// The new front part carries no jobs; its sc must be re-evaluated by the
    /// caller. Returns the index of the interval ending at `t`.
    std::size_t ensure_boundary(Slot t) {
        assert(t > now && t <= horizon);
        if (auto k = interval_ending_at(t); k != intervals.size()) return k;
        auto k = interval_containing(t);
        assert(k < intervals.size() && intervals[k].start < t);
        CapacityInterval front;
        front.start = intervals[k].start;
        front.end = t;
        intervals[k].start = t;
        intervals.insert(intervals.begin() + static_cast<std::ptrdiff_t>(k), std::move(front));
        return k;
    }
};

/// Groups jobs into capacity intervals: one per unique deadline, starting at
/// the later of the previous end and the earliest member release, with gaps
/// filled by empty intervals so that [0, horizon) is tiled.
inline CoreTable build_intervals(std::vector<JobInstance> jobs, Slot horizon, int core = 0) {
    if (horizon < 0) throw InputError("negative horizon");
    for (const auto& j : jobs) {
        if (j.deadline > horizon)
            throw InputError("job " + j.label() + " has deadline " + std::to_string(j.deadline) +
                             " beyond horizon " + std::to_string(horizon));
        if (j.release < 0 || j.release >= j.deadline)
            throw InputError("job " + j.label() + " needs 0 <= release < deadline");
    }
    std::stable_sort(jobs.begin(), jobs.end(), [](const JobInstance& a, const JobInstance& b) {
        return std::tie(a.deadline, a.task, a.index) < std::tie(b.deadline, b.task, b.index);
    });

    CoreTable table;
    table.core = core;
    table.horizon = horizon;
    table.jobs = std::move(jobs);

    Slot prev_end = 0;
    std::size_t i = 0;
    while (i < table.jobs.size()) {
        const Slot d = table.jobs[i].deadline;
        CapacityInterval iv;
        iv.end = d;
        Slot earliest = d;
        for (; i < table.jobs.size() && table.jobs[i].deadline == d; ++i) {
            iv.jobs.push_back(i);
            earliest = std::min(earliest, table.jobs[i].release);
        }
        iv.start = std::max(prev_end, earliest);
        if (iv.start > prev_end) table.intervals.push_back(CapacityInterval{prev_end, iv.start, {}, 0});
        table.intervals.push_back(std::move(iv));
        prev_end = d;
    }
    if (prev_end < horizon) table.intervals.push_back(CapacityInterval{prev_end, horizon, {}, 0});
    return table;
}

namespace detail {

inline std::int64_t whole_slots(Work w) {
    assert(w.raw() % Work::kScale == 0);
    return w.raw() / Work::kScale;
}

} // namespace detail

/// Re-evaluates sc for intervals [first, last] back to front, using the
/// remaining interval lengths and the committed work of member jobs. The
/// interval after `last` (if any) supplies the borrowing term.
inline void evaluate_spare_capacities(CoreTable& table, std::size_t first, std::size_t last) {
    if (table.intervals.empty()) return;
    std::int64_t next = last + 1 < table.intervals.size() ? table.intervals[last + 1].sc : 0;
    for (std::size_t k = last + 1; k-- > first;) {
        auto& iv = table.intervals[k];
        Work committed;
        for (auto j : iv.jobs) committed += table.jobs[j].committed();
        iv.sc = table.remaining_length(k) - detail::whole_slots(committed) + std::min<std::int64_t>(next, 0);
        next = iv.sc;
    }
}

/// sc(I_i) = |I_i| - sum of member WCETs + min(sc(I_{i+1}), 0), back to front;
/// the last interval borrows nothing.
inline void compute_spare_capacities(CoreTable& table) {
    if (table.intervals.empty()) return;
    evaluate_spare_capacities(table, table.current, table.intervals.size() - 1);
}

/// EDF at full speed from `table.now` to the horizon; true iff every job
/// completes by its deadline. Jobs already marked missed are ignored.
inline bool verify_feasible(const CoreTable& table) {
    struct Pending {
        Slot deadline;
        TaskId task;
        std::int64_t index;
        Work left;
        bool operator>(const Pending& o) const {
            return std::tie(deadline, task, index) > std::tie(o.deadline, o.task, o.index);
        }
    };
    std::vector<const JobInstance*> order;
    for (const auto& j : table.jobs)
        if (!j.complete() && !j.missed) order.push_back(&j);
    std::sort(order.begin(), order.end(),
              [](const JobInstance* a, const JobInstance* b) { return a->release < b->release; });

    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> ready;
    std::size_t next = 0;
    for (Slot t = table.now; t < table.horizon; ++t) {
        for (; next < order.size() && order[next]->release <= t; ++next)
            ready.push({order[next]->deadline, order[next]->task, order[next]->index, order[next]->committed()});
        if (ready.empty()) continue;
        auto top = ready.top();
        ready.pop();
        if (top.deadline <= t) return false;
        top.left -= min(top.left, Work::slots(1));
        if (!top.left.is_zero()) ready.push(top);
    }
    return ready.empty() && next == order.size();
}

} // namespace eass
