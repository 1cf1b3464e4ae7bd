#pragma once

// Slot-synchronized simulation engine. Each step runs the decision phase
// for every core (releases, admissions, policy choice) and then applies the
// execution, spare-capacity and energy effects of that slot.

#include <eass/energy.hpp>
#include <eass/guarantee.hpp>
#include <eass/policies.hpp>
#include <eass/runtime.hpp>
#include <eass/table.hpp>

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eass {

class DeadlineMiss : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct EngineOptions {
    Policy policy = Policy::bss;
    PolicyOptions policy_options;
    bool strict = false;          // throw DeadlineMiss on the first miss
    bool check_sc_oracle = false; // compare sc against a from-scratch evaluation every slot
    std::ostream* trace = nullptr;
    // Called with each policy decision before it takes effect.
    std::function<void(const CoreState&, const Decision&, Slot now)> observer;
};

struct AdmissionStats {
    std::int64_t offered = 0;
    std::int64_t accepted = 0;
    std::int64_t delegated = 0;
    std::int64_t rejected = 0;
};

/// Counters for the run-time invariants; all zero in a correct run.
struct AuditStats {
    std::int64_t frequency_below_ideal = 0; // DVFS level < c / (c + available)
    std::int64_t sleep_rule_breaks = 0;     // break-even or latency rule broken at sleep entry
    std::int64_t reserved_out_of_range = 0; // reserved_sc outside [0, 1) at a boundary
    std::int64_t sc_oracle_mismatches = 0;  // slots where incremental sc != reference
    std::int64_t negative_idle_sc = 0;      // no ready job but sc(I_curr) < 0
    std::int64_t sc_update_calls = 0;
    std::int64_t sleep_transitions_checked = 0;
    std::int64_t dvfs_slots_checked = 0;

    std::int64_t violations() const {
        return frequency_below_ideal + sleep_rule_breaks + reserved_out_of_range + sc_oracle_mismatches +
               negative_idle_sc;
    }
};

struct SimResult {
    Policy policy = Policy::bss;
    Slot horizon = 0;
    Slot slot_length_us = 0;
    int cores = 0;
    double total_energy_j = 0.0;
    double avg_power_w = 0.0;
    std::int64_t deadline_misses = 0;
    AdmissionStats admissions;
    std::int64_t sleep_transitions = 0;
    std::map<std::string, Slot> per_state_residency;
    std::vector<std::pair<std::int64_t, Slot>> freq_histogram; // (level in MHz, active slots)
    Slot best_effort_slots = 0;
    double runtime_wall_ms = 0.0;
    EnergyLedger ledger;
    AuditStats audit;
};

/// Compares each future interval's sc with a from-scratch re-evaluation over
/// the remaining lengths and committed work.
inline bool sc_matches_reference(const CoreTable& table) {
    std::int64_t next = 0;
    for (auto k = table.intervals.size(); k-- > table.current;) {
        Work committed;
        for (auto j : table.intervals[k].jobs) committed += table.jobs[j].committed();
        const auto ref = table.remaining_length(k) - detail::whole_slots(committed) + std::min<std::int64_t>(next, 0);
        if (ref != table.intervals[k].sc) return false;
        next = ref;
    }
    return true;
}

class Engine {
  public:
    Engine(Platform platform, std::vector<CoreTable> tables, EngineOptions options = {})
        : platform_(std::move(platform)), options_(options) {
        platform_.validate();
        if (tables.empty()) throw InputError("engine needs at least one core table");
        horizon_ = tables.front().horizon;
        for (auto& t : tables) {
            if (t.horizon != horizon_) throw InputError("core tables disagree on the horizon");
            cores_.push_back(make_core_state(std::move(t)));
        }
        ledger_ = EnergyLedger(static_cast<int>(cores_.size()), platform_);
        if (options_.trace) *options_.trace << "slot,core,action,job,f_slot,sc_current\n";
    }

    Slot now() const { return now_; }
    Slot horizon() const { return horizon_; }
    bool done() const { return now_ >= horizon_; }
    std::span<const CoreState> cores() const { return cores_; }
    std::span<CoreState> cores() { return cores_; }
    const EnergyLedger& ledger() const { return ledger_; }
    const AuditStats& audit() const { return audit_; }
    const AdmissionStats& admissions() const { return admissions_; }
    std::int64_t deadline_misses() const { return misses_; }
    const Platform& platform() const { return platform_; }

    /// Queues an aperiodic job; it is offered during the decision phase of
    /// the slot equal to its release.
    void submit(AdmissionRequest request) { queue_.push_back(Queued{std::move(request), std::nullopt}); }

    /// Queues a new periodic task, admitted all-or-nothing at `arrival`.
    void submit_periodic(const TaskSpec& task, Slot arrival) {
        AdmissionRequest req;
        req.job.release = arrival;
        req.preferred_core = task.core;
        queue_.push_back(Queued{std::move(req), task});
    }

    /// One slot on every core.
    void step() {
        if (done()) return;
        for (auto& cs : cores_) {
            cs.release_due();
            detect_misses(cs);
        }
        drain_admissions();
        for (auto& cs : cores_) step_core(cs);

        ++now_;
        for (auto& cs : cores_) {
            cs.table.advance_to(now_);
            if (cs.mode == CoreState::Mode::sleeping && --cs.sleep_remaining <= 0) {
                cs.mode = CoreState::Mode::idle;
                cs.sleep_remaining = 0;
            }
            if (options_.check_sc_oracle && !sc_matches_reference(cs.table)) ++audit_.sc_oracle_mismatches;
        }
    }

    SimResult run() {
        const auto t0 = std::chrono::steady_clock::now();
        while (!done()) step();
        for (auto& cs : cores_) {
            cs.release_due();
            detect_misses(cs);
        }
        SimResult r = result();
        r.runtime_wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

    SimResult result() const {
        SimResult r;
        r.policy = options_.policy;
        r.horizon = horizon_;
        r.slot_length_us = platform_.slot_length_us;
        r.cores = static_cast<int>(cores_.size());
        r.total_energy_j = ledger_.total_j();
        const double duration_s = static_cast<double>(horizon_) * platform_.slot_seconds();
        r.avg_power_w = duration_s > 0 ? r.total_energy_j / duration_s : 0.0;
        r.deadline_misses = misses_;
        r.admissions = admissions_;
        r.ledger = ledger_;
        r.audit = audit_;
        r.audit.sc_update_calls = 0;
        for (const auto& cs : cores_) r.audit.sc_update_calls += cs.sc_updates;

        const auto& levels = platform_.ladder.levels();
        const auto& levels_hz = platform_.ladder.levels_hz();
        std::vector<Slot> freq(levels.size(), 0);
        Slot run = 0, idle = 0;
        std::vector<Slot> sleep(platform_.sleep_states.size(), 0);
        for (const auto& c : ledger_.cores) {
            r.sleep_transitions += c.sleep_transitions;
            r.best_effort_slots += c.best_effort_slots;
            run += c.run_slots;
            idle += c.idle_slots;
            for (std::size_t i = 0; i < freq.size(); ++i) freq[i] += c.freq_slots[i];
            for (std::size_t i = 0; i < sleep.size(); ++i) sleep[i] += c.sleep_residency[i];
        }
        r.per_state_residency["run"] = run;
        r.per_state_residency["idle"] = idle;
        r.per_state_residency["best_effort"] = r.best_effort_slots;
        for (std::size_t i = 0; i < sleep.size(); ++i) r.per_state_residency[platform_.sleep_states[i].id] = sleep[i];
        for (std::size_t i = 0; i < freq.size(); ++i)
            r.freq_histogram.emplace_back(levels_hz[i] / 1'000'000, freq[i]);
        return r;
    }

  private:
    struct Queued {
        AdmissionRequest request;
        std::optional<TaskSpec> periodic;
    };

    void detect_misses(CoreState& cs) {
        while (!cs.ready.empty() && cs.ready.begin()->deadline <= now_) {
            const auto job = cs.ready.begin()->job;
            cs.ready.erase(cs.ready.begin());
            cs.table.jobs[job].missed = true;
            ++misses_;
            if (options_.strict)
                throw DeadlineMiss("job " + cs.table.jobs[job].label() + " on core " + std::to_string(cs.core) +
                                   " missed its deadline " + std::to_string(cs.table.jobs[job].deadline));
        }
    }

    void drain_admissions() {
        // Requests are kept in submission order; those due now are handled
        // in that order.
        for (auto it = queue_.begin(); it != queue_.end();) {
            if (it->request.job.release > now_) {
                ++it;
                continue;
            }
            ++admissions_.offered;
            AdmissionOutcome out = it->periodic ? admit_periodic(cores_, *it->periodic, now_)
                                                : admit(cores_, it->request);
            if (out.accepted) {
                ++admissions_.accepted;
                if (out.delegated) ++admissions_.delegated;
            } else {
                ++admissions_.rejected;
            }
            it = queue_.erase(it);
        }
    }

    void step_core(CoreState& cs) {
        auto& ledger = ledger_.cores[static_cast<std::size_t>(cs.core)];
        SlotActivity activity;
        std::optional<std::size_t> executed;
        NormalizedFrequency f = NormalizedFrequency::max();
        std::string action;

        if (cs.sleeping()) {
            activity.kind = SlotActivity::Kind::sleep;
            activity.sleep_state = cs.sleep_state;
            action = "sleep";
        } else {
            const Decision d = decide(options_.policy, cs, platform_, options_.policy_options);
            if (options_.observer) options_.observer(cs, d, now_);
            switch (d.kind) {
            case Decision::Kind::run:
                if (options_.policy == Policy::eass_dvfs) {
                    ++audit_.dvfs_slots_checked;
                    if (d.freq < d.ideal) ++audit_.frequency_below_ideal;
                }
                cs.mode = CoreState::Mode::running;
                cs.running_job = d.job;
                cs.freq = d.freq;
                executed = d.job;
                f = d.freq;
                execute_slot(cs, d.job, d.freq);
                activity.kind = SlotActivity::Kind::run;
                activity.level = d.level;
                action = "run";
                break;
            case Decision::Kind::sleep: {
                ++audit_.sleep_transitions_checked;
                const auto& s = platform_.sleep_states[d.sleep_state];
                const double window_s = static_cast<double>(d.duration) * platform_.slot_seconds();
                if (s.break_even_s(platform_.p_idle_w) > window_s ||
                    s.min_residency_slots + s.latency_slots > d.duration)
                    ++audit_.sleep_rule_breaks;
                cs.mode = CoreState::Mode::sleeping;
                cs.sleep_state = d.sleep_state;
                cs.sleep_remaining = d.duration;
                cs.wake_slot = now_ + d.duration;
                activity.kind = SlotActivity::Kind::sleep;
                activity.sleep_state = d.sleep_state;
                activity.sleep_entry = true;
                action = "sleep";
                break;
            }
            case Decision::Kind::best_effort:
                run_best_effort(cs, true);
                activity.kind = SlotActivity::Kind::best_effort;
                activity.level = d.level;
                f = d.freq;
                action = "best_effort";
                break;
            case Decision::Kind::idle:
                run_best_effort(cs, false);
                activity.kind = SlotActivity::Kind::idle;
                activity.idle_at_level = d.idle_at_level;
                activity.level = d.level;
                if (d.idle_at_level) f = d.freq;
                action = "idle";
                break;
            }
            if (d.kind != Decision::Kind::run) {
                cs.running_job.reset();
                if (cs.table.has_current() && cs.table.intervals[cs.table.current].sc < 0) ++audit_.negative_idle_sc;
            }
        }

        update_spare_capacity(cs, executed, f);
        if (executed) {
            const auto& r = cs.table.jobs[*executed].reserved_sc;
            if (r < Work{} || r >= Work::slots(1)) ++audit_.reserved_out_of_range;
        }
        account(ledger, activity, platform_);

        if (options_.trace) {
            *options_.trace << now_ << ',' << cs.core << ',' << action << ','
                            << (executed ? cs.table.jobs[*executed].label() : std::string{}) << ','
                            << f.value() << ','
                            << (cs.table.has_current() ? cs.table.intervals[cs.table.current].sc : 0) << '\n';
        }
    }

    Platform platform_;
    EngineOptions options_;
    Slot horizon_ = 0;
    Slot now_ = 0;
    std::vector<CoreState> cores_;
    EnergyLedger ledger_;
    std::deque<Queued> queue_;
    AdmissionStats admissions_;
    AuditStats audit_;
    std::int64_t misses_ = 0;
};

} // namespace eass
