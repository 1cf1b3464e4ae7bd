#pragma once

// Shared domain types: slots, fixed-point work, tasks, jobs and the
// vCPU -> periodic task mapping.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace eass {

using Slot = std::int64_t;
using TaskId = std::int64_t;

/// Thrown for malformed or infeasible inputs (specs, scenarios, configs).
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Execution amount in fixed point, 1e-9 slot resolution.
///
/// Remaining execution and reserved spare capacity are tracked with this
/// type so that repeated fractional decrements stay exact and the integer
/// spare-capacity bookkeeping never drifts.
class Work {
  public:
    static constexpr std::int64_t kScale = 1'000'000'000;

    constexpr Work() = default;
    static constexpr Work from_raw(std::int64_t raw) { return Work{raw}; }
    static constexpr Work slots(std::int64_t n) { return Work{n * kScale}; }

    constexpr std::int64_t raw() const { return raw_; }
    constexpr double as_slots() const { return static_cast<double>(raw_) / kScale; }
    constexpr bool is_zero() const { return raw_ == 0; }

    constexpr Work& operator+=(Work o) { raw_ += o.raw_; return *this; }
    constexpr Work& operator-=(Work o) { raw_ -= o.raw_; return *this; }
    friend constexpr Work operator+(Work a, Work b) { return Work{a.raw_ + b.raw_}; }
    friend constexpr Work operator-(Work a, Work b) { return Work{a.raw_ - b.raw_}; }
    friend constexpr auto operator<=>(Work, Work) = default;

  private:
    constexpr explicit Work(std::int64_t raw) : raw_(raw) {}
    std::int64_t raw_ = 0;
};

inline constexpr Work min(Work a, Work b) { return a < b ? a : b; }

/// Core frequency during a slot relative to the maximum frequency.
///
/// Stored as the work (in Work units) a job completes in one slot at this
/// frequency; `value()` gives the fraction in (0, 1].
class NormalizedFrequency {
  public:
    constexpr NormalizedFrequency() = default;

    static constexpr NormalizedFrequency max() { return NormalizedFrequency{Work::kScale}; }

    /// Rounds up so the represented frequency is never below `f`.
    static NormalizedFrequency from_fraction(double f) {
        if (!(f > 0.0) || f > 1.0 + 1e-12)
            throw InputError("normalized frequency must lie in (0, 1], got " + std::to_string(f));
        auto raw = static_cast<std::int64_t>(std::ceil(f * static_cast<double>(Work::kScale) - 1e-6));
        return NormalizedFrequency{std::clamp<std::int64_t>(raw, 1, Work::kScale)};
    }

    /// Exact ratio of two integer frequencies, rounded up to the Work grid.
    static NormalizedFrequency from_ratio(std::int64_t num, std::int64_t den) {
        if (num <= 0 || den <= 0 || num > den)
            throw InputError("frequency ratio must lie in (0, 1]");
        __int128 scaled = static_cast<__int128>(num) * Work::kScale;
        auto raw = static_cast<std::int64_t>((scaled + den - 1) / den);
        return NormalizedFrequency{raw};
    }

    static constexpr NormalizedFrequency from_raw(std::int64_t raw) { return NormalizedFrequency{raw}; }

    constexpr Work work_per_slot() const { return Work::from_raw(raw_); }
    constexpr std::int64_t raw() const { return raw_; }
    constexpr double value() const { return static_cast<double>(raw_) / Work::kScale; }
    constexpr bool is_max() const { return raw_ == Work::kScale; }

    friend constexpr auto operator<=>(NormalizedFrequency, NormalizedFrequency) = default;

  private:
    constexpr explicit NormalizedFrequency(std::int64_t raw) : raw_(raw) {}
    std::int64_t raw_ = Work::kScale;
};

struct VcpuSpec {
    double utilization = 0.0; // reserved utilization U, in (0, 1)
    Slot max_latency = 0;     // maximum scheduling latency L, in slots
};

enum class TaskKind { periodic, aperiodic };

struct TaskSpec {
    TaskId id = 0;
    TaskKind kind = TaskKind::periodic;
    Slot wcet = 0;
    Slot period = 0; // zero for aperiodic tasks
    int core = 0;

    double utilization() const {
        return period > 0 ? static_cast<double>(wcet) / static_cast<double>(period) : 0.0;
    }

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

enum class JobState { pending, ready, running, complete };

struct JobInstance {
    TaskId task = 0;
    std::int64_t index = 0;
    Slot release = 0;
    Slot deadline = 0;
    Slot wcet = 0;
    Work remaining;   // c, in [0, wcet]
    Work reserved_sc; // fractional slack freed by slow execution, in [0, 1)
    JobState state = JobState::pending;
    bool missed = false;

    static JobInstance make(TaskId task, std::int64_t index, Slot release, Slot deadline, Slot wcet) {
        JobInstance j;
        j.task = task;
        j.index = index;
        j.release = release;
        j.deadline = deadline;
        j.wcet = wcet;
        j.remaining = Work::slots(wcet);
        j.state = wcet == 0 ? JobState::complete : JobState::pending;
        return j;
    }

    bool complete() const { return state == JobState::complete; }

    /// Work still charged against spare capacity: c + reserved_sc. Integral
    /// for incomplete jobs, zero once the job completes.
    Work committed() const { return complete() ? Work{} : remaining + reserved_sc; }

    std::string label() const { return std::to_string(task) + "." + std::to_string(index); }

    friend bool operator==(const JobInstance&, const JobInstance&) = default;
};

/// Maps a vCPU reservation onto a periodic task whose worst-case gap between
/// consecutive executions, 2(T - C), stays within the latency bound.
inline TaskSpec map_vcpu_to_task(const VcpuSpec& spec, Slot period_cap, TaskId id = 0, int core = 0) {
    if (!(spec.utilization > 0.0 && spec.utilization < 1.0))
        throw InputError("vCPU utilization must lie in (0, 1)");
    if (spec.max_latency < 1)
        throw InputError("vCPU max latency must be at least one slot");
    if (period_cap < 1)
        throw InputError("period cap must be at least one slot");

    const double bound = static_cast<double>(spec.max_latency) / (2.0 * (1.0 - spec.utilization));
    // Tolerances absorb binary rounding (0.8 * 20 must give 16, not 17).
    const auto largest = static_cast<Slot>(std::floor(bound + 1e-9));
    if (largest < 1)
        throw InputError("latency " + std::to_string(spec.max_latency) +
                         " unattainable at any integer period for utilization " +
                         std::to_string(spec.utilization));

    TaskSpec t;
    t.id = id;
    t.kind = TaskKind::periodic;
    t.core = core;
    t.period = std::min(largest, period_cap);
    t.wcet = static_cast<Slot>(std::ceil(spec.utilization * static_cast<double>(t.period) - 1e-9));
    t.wcet = std::clamp<Slot>(t.wcet, 1, t.period);
    return t;
}

} // namespace eass
