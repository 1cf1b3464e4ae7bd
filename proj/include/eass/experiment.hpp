#pragma once

// Parameter sweeps: grid expansion, parallel execution with a deterministic
// merge, tidy/aggregate CSV output and the policy comparison table.

#include <eass/io.hpp>
#include <eass/simulation.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace eass {

inline constexpr const char* kCsvSchema = "# eass-csv v1";

struct ExperimentGrid {
    std::vector<double> utilizations{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}; // per core
    std::vector<double> new_job_utilizations{0.1, 0.2, 0.5};           // per core
    std::vector<Slot> slot_lengths_us{1000, 3000, 10000};
    int cases_per_cell = 10;
    int repetitions = 3;
    std::vector<Policy> policies{Policy::bss, Policy::eass_dpm, Policy::eass_dvfs};
    int cores = 4;
    std::uint64_t seed = 1;
    GenSpec generator; // ranges; utilization, cores and seed are overwritten per case

    std::size_t run_count() const {
        return utilizations.size() * new_job_utilizations.size() * slot_lengths_us.size() *
               static_cast<std::size_t>(cases_per_cell) * static_cast<std::size_t>(repetitions) * policies.size();
    }

    void validate() const {
        if (utilizations.empty() || new_job_utilizations.empty() || slot_lengths_us.empty() || policies.empty())
            throw InputError("grid lists must be non-empty");
        if (cases_per_cell < 1 || repetitions < 1) throw InputError("cases_per_cell and repetitions must be >= 1");
        if (cores < 1) throw InputError("grid needs at least one core");
    }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of one generated case; independent of slot length, policy and repetition.
inline std::uint64_t case_seed(std::uint64_t base, std::size_t u_idx, std::size_t n_idx, int case_idx) {
    auto s = splitmix64(base);
    s = splitmix64(s ^ u_idx);
    s = splitmix64(s ^ (n_idx << 16));
    return splitmix64(s ^ (static_cast<std::uint64_t>(case_idx) << 32));
}

inline Scenario grid_case(const ExperimentGrid& g, std::size_t u_idx, std::size_t n_idx, int case_idx) {
    GenSpec spec = g.generator;
    spec.cores = g.cores;
    spec.utilization = g.utilizations[u_idx] * g.cores;
    spec.aperiodic.utilization = g.new_job_utilizations[n_idx] * g.cores;
    spec.seed = case_seed(g.seed, u_idx, n_idx, case_idx);
    return generate_taskset(spec);
}

struct RunRow {
    double utilization = 0.0;
    double new_job_utilization = 0.0;
    Slot slot_length_us = 0;
    int case_idx = 0;
    int repetition = 0;
    Policy policy = Policy::bss;
    std::uint64_t seed = 0;
    Slot horizon = 0;
    double total_energy_j = 0.0;
    double avg_power_w = 0.0;
    std::int64_t deadline_misses = 0;
    AdmissionStats admissions;
    std::int64_t sleep_transitions = 0;
    std::int64_t audit_violations = 0;
    std::string error;
};

struct AggregateRow {
    double utilization = 0.0;
    double new_job_utilization = 0.0;
    Slot slot_length_us = 0;
    Policy policy = Policy::bss;
    std::int64_t runs = 0;
    double mean_avg_power_w = 0.0;
    std::int64_t deadline_misses = 0;
};

struct SweepResult {
    std::vector<RunRow> runs;
    std::vector<AggregateRow> aggregate;

    std::int64_t deadline_misses() const {
        std::int64_t m = 0;
        for (const auto& r : runs) m += r.deadline_misses;
        return m;
    }
    std::int64_t failures() const {
        std::int64_t f = 0;
        for (const auto& r : runs) f += r.error.empty() ? 0 : 1;
        return f;
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Runs fn(i) for i in [0, n) on `jobs` threads; results are written by index.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

} // namespace detail

struct SweepOptions {
    int jobs = 1;
    PolicyOptions policy_options;
    bool strict = false;
};

/// Runs every (utilization, new-job level, slot length, case, repetition,
/// policy) combination. Row order follows the grid, not completion order.
inline SweepResult run_sweep(const ExperimentGrid& grid, const Platform& platform, const SweepOptions& opts = {}) {
    grid.validate();
    const auto nu = grid.utilizations.size(), nn = grid.new_job_utilizations.size(),
               ns = grid.slot_lengths_us.size(), np = grid.policies.size();
    const auto nc = static_cast<std::size_t>(grid.cases_per_cell), nr = static_cast<std::size_t>(grid.repetitions);

    // One work item per generated case; it runs every slot length,
    // repetition and policy so generation happens once.
    const std::size_t per_case = ns * nr * np;
    SweepResult out;
    out.runs.resize(nu * nn * nc * per_case);
    detail::parallel_for(nu * nn * nc, opts.jobs, [&](std::size_t item) {
        const auto ci = item % nc, ni = (item / nc) % nn, ui = item / (nc * nn);
        std::optional<Scenario> scenario;
        std::string gen_error;
        try {
            scenario = grid_case(grid, ui, ni, static_cast<int>(ci));
        } catch (const std::exception& e) {
            gen_error = e.what();
        }
        // Output order: u, n, slot, case, rep, policy.
        for (std::size_t si = 0; si < ns; ++si)
            for (std::size_t ri = 0; ri < nr; ++ri)
                for (std::size_t pi = 0; pi < np; ++pi) {
                    const auto idx = ((((ui * nn + ni) * ns + si) * nc + ci) * nr + ri) * np + pi;
                    RunRow& row = out.runs[idx];
                    row.utilization = grid.utilizations[ui];
                    row.new_job_utilization = grid.new_job_utilizations[ni];
                    row.slot_length_us = grid.slot_lengths_us[si];
                    row.case_idx = static_cast<int>(ci);
                    row.repetition = static_cast<int>(ri);
                    row.policy = grid.policies[pi];
                    row.seed = case_seed(grid.seed, ui, ni, static_cast<int>(ci));
                    if (!scenario) {
                        row.error = gen_error;
                        continue;
                    }
                    try {
                        Scenario s = *scenario;
                        s.slot_length_us = row.slot_length_us;
                        EngineOptions eo;
                        eo.policy = row.policy;
                        eo.policy_options = opts.policy_options;
                        eo.strict = opts.strict;
                        const auto r = simulate(s, platform, eo);
                        row.horizon = r.horizon;
                        row.total_energy_j = r.total_energy_j;
                        row.avg_power_w = r.avg_power_w;
                        row.deadline_misses = r.deadline_misses;
                        row.admissions = r.admissions;
                        row.sleep_transitions = r.sleep_transitions;
                        row.audit_violations = r.audit.violations();
                    } catch (const std::exception& e) {
                        row.error = e.what();
                    }
                }
    });

    for (std::size_t ui = 0; ui < nu; ++ui)
        for (std::size_t ni = 0; ni < nn; ++ni)
            for (std::size_t si = 0; si < ns; ++si)
                for (std::size_t pi = 0; pi < np; ++pi) {
                    AggregateRow a;
                    a.utilization = grid.utilizations[ui];
                    a.new_job_utilization = grid.new_job_utilizations[ni];
                    a.slot_length_us = grid.slot_lengths_us[si];
                    a.policy = grid.policies[pi];
                    double sum = 0.0;
                    for (std::size_t ci = 0; ci < nc; ++ci)
                        for (std::size_t ri = 0; ri < nr; ++ri) {
                            const auto& r = out.runs[((((ui * nn + ni) * ns + si) * nc + ci) * nr + ri) * np + pi];
                            if (!r.error.empty()) continue;
                            sum += r.avg_power_w;
                            a.deadline_misses += r.deadline_misses;
                            ++a.runs;
                        }
                    if (a.runs > 0) a.mean_avg_power_w = sum / static_cast<double>(a.runs);
                    out.aggregate.push_back(a);
                }
    return out;
}

inline std::string runs_csv(const SweepResult& r) {
    std::ostringstream os;
    os << kCsvSchema << " runs\n";
    os << "utilization,new_job_utilization,slot_length_us,case,repetition,policy,seed,horizon_slots,"
          "total_energy_j,avg_power_w,deadline_misses,offered,accepted,delegated,rejected,sleep_transitions,"
          "audit_violations,error\n";
    for (const auto& x : r.runs) {
        std::string err = x.error;
        for (auto& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        os << detail::fmt_double(x.utilization) << ',' << detail::fmt_double(x.new_job_utilization) << ','
           << x.slot_length_us << ',' << x.case_idx << ',' << x.repetition << ',' << to_string(x.policy) << ','
           << x.seed << ',' << x.horizon << ',' << detail::fmt_double(x.total_energy_j) << ','
           << detail::fmt_double(x.avg_power_w) << ',' << x.deadline_misses << ',' << x.admissions.offered << ','
           << x.admissions.accepted << ',' << x.admissions.delegated << ',' << x.admissions.rejected << ','
           << x.sleep_transitions << ',' << x.audit_violations << ',' << err << '\n';
    }
    return os.str();
}

inline std::string aggregate_csv(const SweepResult& r) {
    std::ostringstream os;
    os << kCsvSchema << " aggregate\n";
    os << "utilization,new_job_utilization,slot_length_us,policy,runs,mean_avg_power_w,deadline_misses\n";
    for (const auto& a : r.aggregate)
        os << detail::fmt_double(a.utilization) << ',' << detail::fmt_double(a.new_job_utilization) << ','
           << a.slot_length_us << ',' << to_string(a.policy) << ',' << a.runs << ','
           << detail::fmt_double(a.mean_avg_power_w) << ',' << a.deadline_misses << '\n';
    return os.str();
}

inline std::vector<AggregateRow> parse_aggregate_csv(std::istream& in) {
    std::vector<AggregateRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() < 7) throw InputError("malformed aggregate row: " + line);
        AggregateRow a;
        try {
            a.utilization = std::stod(f[0]);
            a.new_job_utilization = std::stod(f[1]);
            a.slot_length_us = std::stoll(f[2]);
            auto p = parse_policy(f[3]);
            if (!p) throw InputError("unknown policy " + f[3]);
            a.policy = *p;
            a.runs = std::stoll(f[4]);
            a.mean_avg_power_w = std::stod(f[5]);
            a.deadline_misses = std::stoll(f[6]);
        } catch (const std::logic_error&) {
            throw InputError("malformed aggregate row: " + line);
        }
        rows.push_back(a);
    }
    return rows;
}

struct ReductionRow {
    double utilization = 0.0;
    Slot slot_length_us = 0;
    Policy policy = Policy::eass_dpm;
    double baseline_w = 0.0;
    double policy_w = 0.0;
    double reduction_pct = 0.0;
};

inline double reduction_pct(double baseline_w, double policy_w) {
    return baseline_w > 0.0 ? 100.0 * (baseline_w - policy_w) / baseline_w : 0.0;
}

/// Percentage power reduction of each energy-aware policy against BSS per
/// (utilization, slot length), averaging cell means over new-job levels.
/// Cells lacking a policy entry are skipped with a warning on `warn`.
inline std::vector<ReductionRow> compare(const std::vector<AggregateRow>& rows, std::ostream* warn = &std::cerr) {
    using Key = std::tuple<double, Slot>;
    std::map<Key, std::map<Policy, std::pair<double, int>>> cells;
    std::map<Key, std::map<Policy, std::size_t>> seen;
    for (const auto& a : rows) {
        if (a.runs == 0) continue;
        auto& acc = cells[{a.utilization, a.slot_length_us}][a.policy];
        acc.first += a.mean_avg_power_w;
        acc.second += 1;
    }
    bool any_baseline = false;
    std::vector<ReductionRow> out;
    for (const auto& [key, by_policy] : cells) {
        auto base = by_policy.find(Policy::bss);
        if (base == by_policy.end()) {
            if (warn)
                *warn << "warning: no BSS baseline for utilization " << detail::fmt_double(std::get<0>(key))
                      << ", slot length " << std::get<1>(key) << " us\n";
            continue;
        }
        any_baseline = true;
        const double b = base->second.first / base->second.second;
        for (Policy p : {Policy::eass_dpm, Policy::eass_dvfs}) {
            auto it = by_policy.find(p);
            if (it == by_policy.end()) {
                if (warn)
                    *warn << "warning: " << to_string(p) << " missing for utilization "
                          << detail::fmt_double(std::get<0>(key)) << ", slot length " << std::get<1>(key)
                          << " us; row omitted\n";
                continue;
            }
            const double w = it->second.first / it->second.second;
            out.push_back(ReductionRow{std::get<0>(key), std::get<1>(key), p, b, w, reduction_pct(b, w)});
        }
    }
    if (!any_baseline) throw InputError("no BSS baseline rows in the sweep results");
    return out;
}

inline std::string reductions_csv(const std::vector<ReductionRow>& rows) {
    std::ostringstream os;
    os << kCsvSchema << " compare\n";
    os << "utilization,slot_length_us,policy,bss_avg_power_w,policy_avg_power_w,reduction_pct\n";
    for (const auto& r : rows)
        os << detail::fmt_double(r.utilization) << ',' << r.slot_length_us << ',' << to_string(r.policy) << ','
           << detail::fmt_double(r.baseline_w) << ',' << detail::fmt_double(r.policy_w) << ','
           << detail::fmt_double(r.reduction_pct) << '\n';
    return os.str();
}

inline ExperimentGrid grid_from_json(const Json& j) {
    return detail::guarded("grid", [&] {
        ExperimentGrid g;
        g.utilizations = detail::get_or(j, "utilizations", g.utilizations);
        g.new_job_utilizations = detail::get_or(j, "new_job_utilizations", g.new_job_utilizations);
        g.slot_lengths_us = detail::get_or(j, "slot_lengths_us", g.slot_lengths_us);
        g.cases_per_cell = detail::get_or(j, "cases_per_cell", g.cases_per_cell);
        g.repetitions = detail::get_or(j, "repetitions", g.repetitions);
        g.cores = detail::get_or(j, "cores", g.cores);
        g.seed = detail::get_or<std::uint64_t>(j, "seed", g.seed);
        if (j.contains("policies")) {
            g.policies.clear();
            for (const auto& p : j.at("policies")) {
                auto parsed = parse_policy(p.get<std::string>());
                if (!parsed) throw InputError("unknown policy " + p.get<std::string>());
                g.policies.push_back(*parsed);
            }
        }
        if (j.contains("generator")) g.generator = genspec_from_json(j.at("generator"));
        g.validate();
        return g;
    });
}

} // namespace eass
