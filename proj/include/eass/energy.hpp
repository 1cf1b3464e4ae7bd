#pragma once

// Platform power model (DVFS ladder, power curve, sleep states) and the
// per-core energy ledger.

#include <eass/core_model.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace eass {

class FrequencyLadder {
  public:
    FrequencyLadder() : FrequencyLadder(xeon_gold_5218()) {}

    /// Levels are normalized against f_max; f_max itself is always present.
    static FrequencyLadder from_hz(std::int64_t f_max_hz, std::vector<std::int64_t> levels_hz) {
        if (f_max_hz <= 0) throw InputError("ladder f_max_hz must be positive");
        levels_hz.push_back(f_max_hz);
        std::sort(levels_hz.begin(), levels_hz.end());
        levels_hz.erase(std::unique(levels_hz.begin(), levels_hz.end()), levels_hz.end());
        FrequencyLadder ladder(0);
        ladder.f_max_hz_ = f_max_hz;
        for (auto hz : levels_hz) {
            if (hz <= 0 || hz > f_max_hz)
                throw InputError("ladder level " + std::to_string(hz) + " Hz outside (0, f_max]");
            ladder.levels_.push_back(NormalizedFrequency::from_ratio(hz, f_max_hz));
        }
        ladder.levels_hz_ = std::move(levels_hz);
        return ladder;
    }

    /// 1.0 to 2.3 GHz in 100 MHz steps.
    static FrequencyLadder xeon_gold_5218() {
        std::vector<std::int64_t> hz;
        for (std::int64_t mhz = 1000; mhz <= 2300; mhz += 100) hz.push_back(mhz * 1'000'000);
        return from_hz(2'300'000'000, hz);
    }

    std::int64_t f_max_hz() const { return f_max_hz_; }
    const std::vector<NormalizedFrequency>& levels() const { return levels_; }
    const std::vector<std::int64_t>& levels_hz() const { return levels_hz_; }
    NormalizedFrequency min_level() const { return levels_.front(); }
    std::size_t max_index() const { return levels_.size() - 1; }

    /// Index of the smallest level >= `ideal` (the top level if none).
    std::size_t select_index(NormalizedFrequency ideal) const {
        auto it = std::lower_bound(levels_.begin(), levels_.end(), ideal);
        if (it == levels_.end()) return max_index();
        return static_cast<std::size_t>(it - levels_.begin());
    }

    NormalizedFrequency select(NormalizedFrequency ideal) const { return levels_[select_index(ideal)]; }

  private:
    explicit FrequencyLadder(int) {}
    std::int64_t f_max_hz_ = 0;
    std::vector<NormalizedFrequency> levels_;
    std::vector<std::int64_t> levels_hz_;
};

/// P(f) = P_static + P_dyn * f^alpha, in watts.
struct PowerCurve {
    double p_static_w = 1.0;
    double p_dyn_w = 2.0;
    double alpha = 3.0;

    double power(NormalizedFrequency f) const { return p_static_w + p_dyn_w * std::pow(f.value(), alpha); }
};

struct SleepState {
    std::string id;
    double power_w = 0.1;
    double transition_energy_j = 3e-3;
    Slot latency_slots = 1;
    Slot min_residency_slots = 1;

    /// Idle time after which sleeping saves net energy: E_tr / (P_idle - P_s).
    double break_even_s(double p_idle_w) const { return transition_energy_j / (p_idle_w - power_w); }
};

struct Platform {
    Slot slot_length_us = 1000;
    int cores = 4;
    FrequencyLadder ladder;
    PowerCurve curve;
    double p_idle_w = 1.0;
    /// Ordered shallow to deep.
    std::vector<SleepState> sleep_states{SleepState{"C6", 0.1, 3e-3, 1, 1}};

    double slot_seconds() const { return static_cast<double>(slot_length_us) * 1e-6; }

    void validate() const {
        if (slot_length_us <= 0) throw InputError("slot_length_us must be positive");
        if (cores < 1) throw InputError("platform needs at least one core");
        if (curve.alpha < 1.0) throw InputError("power exponent alpha must be >= 1");
        if (ladder.levels().empty()) throw InputError("empty frequency ladder");
        for (std::size_t i = 0; i < sleep_states.size(); ++i) {
            const auto& s = sleep_states[i];
            if (!(s.power_w < p_idle_w))
                throw InputError("sleep state " + s.id + " must draw less than idle power");
            if (s.latency_slots < 0 || s.min_residency_slots < 0 || s.transition_energy_j < 0)
                throw InputError("sleep state " + s.id + " has negative costs");
            if (i > 0) {
                const auto& p = sleep_states[i - 1];
                if (!(s.power_w < p.power_w) || s.transition_energy_j < p.transition_energy_j ||
                    s.latency_slots < p.latency_slots)
                    throw InputError("sleep states must be ordered shallow to deep");
            }
        }
    }
};

/// What a core did during one slot, as far as energy is concerned.
struct SlotActivity {
    enum class Kind { run, best_effort, idle, sleep };
    Kind kind = Kind::idle;
    std::size_t level = 0;           // ladder index for run / best_effort / scaled idle
    bool idle_at_level = false;      // idle charged at P(level) instead of P_idle
    std::size_t sleep_state = 0;
    bool sleep_entry = false;        // first slot of a sleep window
};

struct CoreLedger {
    double active_j = 0.0;
    double idle_j = 0.0;
    double sleep_j = 0.0;
    double transition_j = 0.0;
    Slot run_slots = 0;
    Slot best_effort_slots = 0;
    Slot idle_slots = 0;
    std::vector<Slot> sleep_residency; // per sleep state
    std::vector<Slot> freq_slots;      // active slots per ladder level
    std::int64_t sleep_transitions = 0;

    double total_j() const { return active_j + idle_j + sleep_j + transition_j; }

    Slot elapsed_slots() const {
        Slot s = run_slots + best_effort_slots + idle_slots;
        for (auto r : sleep_residency) s += r;
        return s;
    }
};

struct EnergyLedger {
    std::vector<CoreLedger> cores;

    EnergyLedger() = default;
    EnergyLedger(int n_cores, const Platform& platform) : cores(static_cast<std::size_t>(n_cores)) {
        for (auto& c : cores) {
            c.sleep_residency.assign(platform.sleep_states.size(), 0);
            c.freq_slots.assign(platform.ladder.levels().size(), 0);
        }
    }

    double total_j() const {
        double t = 0.0;
        for (const auto& c : cores) t += c.total_j();
        return t;
    }
};

/// Charges one slot of `activity` to `ledger`.
inline void account(CoreLedger& ledger, const SlotActivity& activity, const Platform& platform) {
    const double dt = platform.slot_seconds();
    switch (activity.kind) {
    case SlotActivity::Kind::run:
    case SlotActivity::Kind::best_effort: {
        ledger.active_j += platform.curve.power(platform.ladder.levels()[activity.level]) * dt;
        ledger.freq_slots[activity.level] += 1;
        if (activity.kind == SlotActivity::Kind::run) ++ledger.run_slots;
        else ++ledger.best_effort_slots;
        break;
    }
    case SlotActivity::Kind::idle:
        ledger.idle_j += (activity.idle_at_level ? platform.curve.power(platform.ladder.levels()[activity.level])
                                                 : platform.p_idle_w) * dt;
        ++ledger.idle_slots;
        break;
    case SlotActivity::Kind::sleep: {
        const auto& state = platform.sleep_states[activity.sleep_state];
        if (activity.sleep_entry) {
            ledger.transition_j += state.transition_energy_j;
            ++ledger.sleep_transitions;
        }
        ledger.sleep_j += state.power_w * dt;
        ledger.sleep_residency[activity.sleep_state] += 1;
        break;
    }
    }
}

} // namespace eass
