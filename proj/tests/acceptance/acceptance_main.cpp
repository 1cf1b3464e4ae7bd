// Acceptance checks. Usage: acceptance [criterion...]; no argument runs all.
// Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <eass/experiment.hpp>
#include <eass/simulation.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

using namespace eass;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// Shared random suite: 500 scenarios per utilization level, 4 cores.

constexpr int kSuiteCases = 500;
const double kUtils[] = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
const double kNewJobLevels[] = {0.1, 0.2, 0.5};
const Slot kSlotLengths[] = {1000, 3000, 10000};

Scenario suite_scenario(std::size_t ui, int c) {
    GenSpec g;
    g.cores = 4;
    g.utilization = kUtils[ui] * 4;
    g.aperiodic.utilization = kNewJobLevels[c % 3] * 4;
    g.slot_length_us = kSlotLengths[(c / 3) % 3];
    g.seed = splitmix64(0xACCE55ull + ui * 100000 + static_cast<std::uint64_t>(c));
    return generate_taskset(g);
}

struct RunHooks {
    std::function<void(const CoreState&, const Decision&, Slot)> observer;
    std::function<void(const Engine&)> after_step;
};

// Same wiring as simulate(), but stepping by hand so slot boundaries are visible.
SimResult run_with_hooks(const Scenario& s, Policy policy, const RunHooks& hooks, bool oracle = false) {
    Platform p;
    p.slot_length_us = s.slot_length_us;
    p.cores = s.cores;
    EngineOptions o;
    o.policy = policy;
    o.observer = hooks.observer;
    o.check_sc_oracle = oracle;
    Engine e(p, build_tables(s), o);
    submit_admissions(e, s);
    while (!e.done()) {
        e.step();
        if (hooks.after_step) hooks.after_step(e);
    }
    return e.run();
}

template <class F>
void for_suite(F&& f) {
    for (std::size_t ui = 0; ui < std::size(kUtils); ++ui)
        for (int c = 0; c < kSuiteCases; ++c) f(ui, c, suite_scenario(ui, c));
}

const Policy kPolicies[] = {Policy::bss, Policy::eass_dpm, Policy::eass_dvfs};

Outcome deadline_safety() {
    std::int64_t misses = 0, runs = 0, admitted = 0;
    for_suite([&](std::size_t, int, const Scenario& s) {
        for (auto p : kPolicies) {
            const auto r = run_with_hooks(s, p, {});
            misses += r.deadline_misses;
            admitted += r.admissions.accepted;
            ++runs;
        }
    });
    return {misses == 0, std::to_string(runs) + " runs, " + std::to_string(admitted) + " admitted jobs, " +
                             std::to_string(misses) + " deadline misses"};
}

// ---------------------------------------------------------------------------
// Spare capacity recomputed from the table contents alone.

std::vector<std::int64_t> reference_sc(const CoreTable& t) {
    std::vector<std::int64_t> sc(t.intervals.size(), 0);
    std::int64_t next = 0;
    for (auto k = t.intervals.size(); k-- > t.current;) {
        const auto& iv = t.intervals[k];
        const std::int64_t len = iv.end - std::max(iv.start, t.now);
        std::int64_t work = 0;
        for (auto j : iv.jobs) {
            const auto& job = t.jobs[j];
            if (job.state == JobState::complete) continue;
            const auto raw = job.remaining.raw() + job.reserved_sc.raw();
            work += (raw + Work::kScale - 1) / Work::kScale;
        }
        sc[k] = len - work + std::min<std::int64_t>(next, 0);
        next = sc[k];
    }
    return sc;
}

Outcome sc_oracle() {
    std::int64_t slots = 0, mismatches = 0, runs = 0;
    for (int i = 0; i < 100; ++i) {
        const auto ui = static_cast<std::size_t>(i % 7);
        const Scenario s = suite_scenario(ui, 10000 + i);
        const Policy p = i % 2 ? Policy::eass_dpm : Policy::bss;
        RunHooks h;
        h.after_step = [&](const Engine& e) {
            for (const auto& cs : e.cores()) {
                ++slots;
                const auto ref = reference_sc(cs.table);
                for (auto k = cs.table.current; k < cs.table.intervals.size(); ++k)
                    if (ref[k] != cs.table.intervals[k].sc) {
                        ++mismatches;
                        break;
                    }
            }
        };
        run_with_hooks(s, p, h);
        ++runs;
    }
    return {mismatches == 0, std::to_string(runs) + " runs, " + std::to_string(slots) + " core-slots checked, " +
                                 std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------------------
// Admission soundness against exhaustive search.

struct BruteJob {
    Slot release, deadline;
    int left;
};

// True iff some single-core schedule from `start` meets every deadline.
// Tries every choice (any released job, or idling) in every slot.
bool exhaustively_feasible(const std::vector<BruteJob>& jobs, Slot start, Slot horizon) {
    std::unordered_map<std::string, bool> memo;
    std::function<bool(Slot, std::vector<int>&)> go = [&](Slot t, std::vector<int>& left) -> bool {
        bool any = false;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (left[i] == 0) continue;
            any = true;
            const Slot from = std::max(t, jobs[i].release);
            if (from + left[i] > jobs[i].deadline) return false;
        }
        if (!any) return true;
        if (t >= horizon) return false;
        std::string key = std::to_string(t);
        for (int v : left) key += ',' + std::to_string(v);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        bool ok = go(t + 1, left); // idle
        for (std::size_t i = 0; !ok && i < jobs.size(); ++i) {
            if (left[i] == 0 || jobs[i].release > t) continue;
            --left[i];
            ok = go(t + 1, left);
            ++left[i];
        }
        memo[key] = ok;
        return ok;
    };
    std::vector<int> left;
    for (const auto& j : jobs) left.push_back(j.left);
    return go(start, left);
}

Outcome admission_soundness() {
    std::mt19937_64 rng(20240601);
    auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
    std::int64_t queries = 0, accepted = 0, false_pos = 0, false_neg = 0, future = 0, during_sleep = 0;
    int instances = 0;
    while (instances < 200) {
        Scenario s;
        s.cores = 1;
        s.horizon_slots = pick(10, 30);
        const int n = static_cast<int>(pick(1, 3));
        for (int i = 0; i < n; ++i) {
            TaskSpec t;
            t.id = i;
            t.period = pick(3, 12);
            t.wcet = pick(1, std::max<std::int64_t>(1, t.period / 2));
            s.tasks.push_back(t);
        }
        std::vector<CoreTable> tables;
        try {
            tables = build_tables(s);
        } catch (const InputError&) {
            continue; // offline set infeasible; draw again
        }
        ++instances;
        const Policy policy = instances % 2 ? Policy::eass_dpm : Policy::bss;
        Platform p;
        p.cores = 1;
        // Cheap sleep so short windows are taken and the sleep path is covered.
        p.sleep_states = {SleepState{"C1", 0.5, 1e-4, 0, 1}};
        EngineOptions o;
        o.policy = policy;
        Engine e(p, std::move(tables), o);
        const Slot advance = pick(0, s.horizon_slots - 2);
        for (Slot i = 0; i < advance; ++i) e.step();

        const auto& cs = e.cores()[0];
        const Slot now = e.now();
        const Slot start = cs.available_from();
        for (int q = 0; q < 6; ++q) {
            const Slot release = q % 2 ? now : pick(now, s.horizon_slots - 1);
            const Slot deadline = pick(release + 1, s.horizon_slots);
            const Slot wcet = pick(1, deadline - release);
            const auto job = JobInstance::make(100, q, release, deadline, wcet);

            std::optional<Slot> busy;
            if (cs.sleeping()) busy = cs.wake_slot;
            const bool acc = acceptance_test(cs.table, job, busy);

            std::vector<BruteJob> bj;
            for (const auto& j : cs.table.jobs) {
                if (j.state == JobState::complete || j.missed) continue;
                const auto raw = j.remaining.raw() + j.reserved_sc.raw();
                bj.push_back({j.release, j.deadline, static_cast<int>((raw + Work::kScale - 1) / Work::kScale)});
            }
            bj.push_back({release, deadline, static_cast<int>(wcet)});
            const bool truth = exhaustively_feasible(bj, start, s.horizon_slots);

            ++queries;
            accepted += acc;
            future += release > start;
            during_sleep += cs.sleeping();
            if (acc && !truth) ++false_pos;
            if (!acc && truth) ++false_neg;
        }
    }
    std::ostringstream d;
    d << instances << " instances, " << queries << " queries (" << future << " future releases, " << during_sleep
      << " while asleep), " << accepted << " accepted, " << false_pos << " false positives, " << false_neg
      << " false negatives";
    return {false_pos == 0, d.str()};
}

// ---------------------------------------------------------------------------
// Policy disciplines observed on the deadline-safety suite.

// Slack the running job may spend, recomputed from the table: positive sc of
// its own interval, its reserved slack, and positive sc of any leading
// intervals that have no work left.
double spendable_slots(const CoreTable& t, std::size_t job) {
    std::size_t own = t.intervals.size();
    for (std::size_t k = 0; k < t.intervals.size(); ++k)
        for (auto j : t.intervals[k].jobs)
            if (j == job) own = k;
    double spare = std::max<std::int64_t>(0, t.intervals[own].sc) +
                   static_cast<double>(t.jobs[job].reserved_sc.raw()) / Work::kScale;
    for (auto k = t.current; k < own; ++k) {
        double work = 0;
        for (auto j : t.intervals[k].jobs) work += static_cast<double>(t.jobs[j].remaining.raw());
        if (work > 0 || t.intervals[k].sc <= 0) break;
        spare += static_cast<double>(t.intervals[k].sc);
    }
    return spare;
}

Outcome dvfs_discipline() {
    std::int64_t checked = 0, violations = 0;
    double tightest = 1.0;
    const Platform ref;
    RunHooks h;
    h.observer = [&](const CoreState& cs, const Decision& d, Slot) {
        if (d.kind != Decision::Kind::run) return;
        ++checked;
        const double c = static_cast<double>(cs.table.jobs[d.job].remaining.raw()) / Work::kScale;
        const double ideal = c / (c + spendable_slots(cs.table, d.job));
        const double level = static_cast<double>(ref.ladder.levels_hz()[d.level]) /
                             static_cast<double>(ref.ladder.f_max_hz());
        tightest = std::min(tightest, level - ideal);
        if (level < ideal - 1e-9) ++violations;
    };
    for_suite([&](std::size_t, int, const Scenario& s) { run_with_hooks(s, Policy::eass_dvfs, h); });
    std::ostringstream d;
    d << checked << " running slots, " << violations << " below c/(c+spare), smallest margin " << tightest;
    return {violations == 0 && checked > 0, d.str()};
}

Outcome dpm_discipline() {
    std::int64_t sleeps = 0, violations = 0;
    const Platform ref;
    Slot slot_us = 0;
    RunHooks h;
    h.observer = [&](const CoreState&, const Decision& d, Slot) {
        if (d.kind != Decision::Kind::sleep) return;
        ++sleeps;
        const auto& st = ref.sleep_states.at(d.sleep_state);
        const double t_be = st.transition_energy_j / (ref.p_idle_w - st.power_w);
        const double window = static_cast<double>(d.duration) * static_cast<double>(slot_us) * 1e-6;
        if (t_be > window || st.min_residency_slots + st.latency_slots > d.duration) ++violations;
    };
    std::int64_t audited = 0;
    for_suite([&](std::size_t, int, const Scenario& s) {
        slot_us = s.slot_length_us;
        audited += run_with_hooks(s, Policy::eass_dpm, h).audit.sleep_rule_breaks;
    });
    std::ostringstream d;
    d << sleeps << " sleep transitions, " << violations << " violations (engine audit " << audited << ")";
    return {violations == 0 && audited == 0 && sleeps > 0, d.str()};
}

Outcome reserved_bound() {
    std::int64_t boundaries = 0, violations = 0, audited = 0;
    RunHooks h;
    h.after_step = [&](const Engine& e) {
        for (const auto& cs : e.cores())
            for (const auto& j : cs.table.jobs) {
                ++boundaries;
                if (j.reserved_sc.raw() < 0 || j.reserved_sc.raw() >= Work::kScale) ++violations;
            }
    };
    for_suite([&](std::size_t, int, const Scenario& s) {
        for (auto p : kPolicies) audited += run_with_hooks(s, p, h).audit.reserved_out_of_range;
    });
    std::ostringstream d;
    d << boundaries << " job-slot boundaries, " << violations << " outside [0, 1) (engine audit " << audited << ")";
    return {violations == 0 && audited == 0, d.str()};
}

// ---------------------------------------------------------------------------
// Full grid sweep: energy ordering, trend and determinism.

ExperimentGrid full_grid() {
    ExperimentGrid g;
    g.seed = 2024;
    return g;
}

Outcome energy_ordering_trend() {
    SweepOptions opts;
    opts.jobs = 4;
    const auto res = run_sweep(full_grid(), Platform{}, opts);

    // Cell means over new-job levels, computed from the run rows.
    std::map<std::tuple<double, Slot, Policy>, std::pair<double, int>> acc;
    for (const auto& r : res.runs) {
        auto& a = acc[{r.utilization, r.slot_length_us, r.policy}];
        a.first += r.avg_power_w;
        ++a.second;
    }
    auto mean = [&](double u, Slot sl, Policy p) {
        const auto& a = acc.at({u, sl, p});
        return a.first / a.second;
    };
    const auto grid = full_grid();
    bool ordered = true, taper = true;
    std::ostringstream d;
    for (auto p : {Policy::eass_dpm, Policy::eass_dvfs}) {
        for (auto sl : grid.slot_lengths_us) {
            for (double u : grid.utilizations)
                if (mean(u, sl, p) > mean(u, sl, Policy::bss)) ordered = false;
            const double lo = 100 * (1 - mean(0.2, sl, p) / mean(0.2, sl, Policy::bss));
            const double hi = 100 * (1 - mean(0.8, sl, p) / mean(0.8, sl, Policy::bss));
            if (!(lo > hi)) taper = false;
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s@%lldus %.1f%%->%.1f%%; ", to_string(p),
                          static_cast<long long>(sl), lo, hi);
            d << buf;
        }
    }
    d << (ordered ? "ordering holds" : "ordering broken") << ", " << (taper ? "taper holds" : "taper broken");
    return {ordered && taper && res.failures() == 0, d.str()};
}

Outcome determinism() {
    const auto grid = full_grid();
    SweepOptions serial;
    SweepOptions parallel;
    parallel.jobs = 4;
    const auto a = run_sweep(grid, Platform{}, serial);
    const auto b = run_sweep(grid, Platform{}, serial);
    const auto c = run_sweep(grid, Platform{}, parallel);
    const bool agg = aggregate_csv(a) == aggregate_csv(b) && aggregate_csv(a) == aggregate_csv(c);
    const bool runs = runs_csv(a) == runs_csv(b) && runs_csv(a) == runs_csv(c);
    std::ostringstream d;
    d << a.runs.size() << " runs x 3 sweeps (1, 1 and 4 workers): aggregate CSV "
      << (agg ? "identical" : "differs") << ", runs CSV " << (runs ? "identical" : "differs");
    return {agg && runs && a.failures() == 0, d.str()};
}

const std::vector<std::pair<std::string, Outcome (*)()>> kCriteria = {
    {"deadline_safety", deadline_safety},
    {"sc_oracle", sc_oracle},
    {"admission_soundness", admission_soundness},
    {"dvfs_level_discipline", dvfs_discipline},
    {"dpm_sleep_discipline", dpm_discipline},
    {"energy_ordering_trend", energy_ordering_trend},
    {"reserved_bound", reserved_bound},
    {"determinism", determinism},
};

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> wanted(argv + 1, argv + argc);
    if (wanted.empty())
        for (const auto& [name, fn] : kCriteria) wanted.push_back(name);
    int failed = 0;
    for (const auto& w : wanted) {
        auto it = std::find_if(kCriteria.begin(), kCriteria.end(), [&](const auto& c) { return c.first == w; });
        if (it == kCriteria.end()) {
            std::cout << "FAIL " << w << ": unknown criterion\n";
            ++failed;
            continue;
        }
        Outcome o;
        try {
            o = it->second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << it->first << ": " << o.detail << std::endl;
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
