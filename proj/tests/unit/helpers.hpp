#pragma once

#include <eass/table.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

namespace testing_support {

using eass::JobInstance;
using eass::Slot;

inline JobInstance job(eass::TaskId task, Slot r, Slot d, Slot c, std::int64_t index = 0) {
    return JobInstance::make(task, index, r, d, c);
}

inline eass::CoreTable built(std::vector<JobInstance> jobs, Slot horizon) {
    auto t = eass::build_intervals(std::move(jobs), horizon);
    eass::compute_spare_capacities(t);
    return t;
}

inline std::vector<std::int64_t> sc_of(const eass::CoreTable& t) {
    std::vector<std::int64_t> out;
    for (const auto& iv : t.intervals) out.push_back(iv.sc);
    return out;
}

/// Spare capacities recomputed from scratch: remaining interval length
/// minus the remaining (rounded-up) work of incomplete members, plus the
/// successor's deficit. Written against the raw fields only.
inline std::vector<std::int64_t> reference_sc(const eass::CoreTable& t) {
    std::vector<std::int64_t> out(t.intervals.size(), 0);
    std::int64_t next = 0;
    for (std::size_t k = t.intervals.size(); k-- > t.current;) {
        const auto& iv = t.intervals[k];
        const Slot len = iv.end - std::max(iv.start, t.now);
        std::int64_t work = 0;
        for (auto j : iv.jobs) {
            const auto& jb = t.jobs[j];
            if (jb.state == eass::JobState::complete) continue;
            const auto raw = jb.remaining.raw() + jb.reserved_sc.raw();
            work += (raw + eass::Work::kScale - 1) / eass::Work::kScale;
        }
        out[k] = len - work + std::min<std::int64_t>(next, 0);
        next = out[k];
    }
    return out;
}

} // namespace testing_support
