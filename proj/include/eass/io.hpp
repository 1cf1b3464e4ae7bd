#pragma once

// JSON file formats: scenario, platform, generator spec, results and the
// capacity-table dump.

#include <eass/energy.hpp>
#include <eass/engine.hpp>
#include <eass/table.hpp>
#include <eass/workload.hpp>

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace eass {

using Json = nlohmann::ordered_json;

namespace detail {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline SlotRange range_from_json(const Json& j, const char* key, SlotRange fallback) {
    if (!j.contains(key)) return fallback;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw InputError(std::string(key) + " must be a [lo, hi] pair");
    return SlotRange{r[0].get<Slot>(), r[1].get<Slot>()};
}

inline Json range_to_json(SlotRange r) { return Json::array({r.lo, r.hi}); }

/// Runs a parser and turns library exceptions into InputError.
template <class F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(what + ": " + e.what());
    }
}

} // namespace detail

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return detail::guarded(path, [&] { return Json::parse(in); });
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

// ---- scenario ----

inline Json to_json(const Scenario& s) {
    Json tasks = Json::array();
    for (const auto& t : s.tasks) tasks.push_back({{"id", t.id}, {"core", t.core}, {"wcet", t.wcet}, {"period", t.period}});
    Json adm = Json::array();
    for (const auto& a : s.admissions) {
        Json o = {{"arrival", a.arrival}, {"wcet", a.wcet}, {"deadline", a.deadline}};
        o["preferred_core"] = a.preferred_core ? Json(*a.preferred_core) : Json(nullptr);
        if (a.period) o["period"] = *a.period;
        adm.push_back(std::move(o));
    }
    return {{"horizon_slots", s.horizon_slots}, {"slot_length_us", s.slot_length_us}, {"cores", s.cores},
            {"tasks", tasks}, {"admissions", adm}, {"seed", s.seed}};
}

inline Scenario scenario_from_json(const Json& j) {
    return detail::guarded("scenario", [&] {
        Scenario s;
        s.horizon_slots = detail::get_or<Slot>(j, "horizon_slots", 0);
        s.slot_length_us = detail::get_or<Slot>(j, "slot_length_us", 1000);
        s.cores = detail::get_or<int>(j, "cores", 1);
        s.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
        if (j.contains("tasks")) {
            for (const auto& t : j.at("tasks")) {
                TaskSpec spec;
                spec.id = t.at("id").get<TaskId>();
                spec.core = detail::get_or<int>(t, "core", 0);
                spec.wcet = t.at("wcet").get<Slot>();
                spec.period = t.at("period").get<Slot>();
                s.tasks.push_back(spec);
            }
        }
        if (j.contains("admissions")) {
            for (const auto& a : j.at("admissions")) {
                ScenarioAdmission adm;
                adm.arrival = a.at("arrival").get<Slot>();
                adm.wcet = a.at("wcet").get<Slot>();
                if (a.contains("period") && !a.at("period").is_null()) adm.period = a.at("period").get<Slot>();
                adm.deadline = adm.period && !a.contains("deadline") ? adm.arrival + *adm.period : a.at("deadline").get<Slot>();
                if (a.contains("preferred_core") && !a.at("preferred_core").is_null())
                    adm.preferred_core = a.at("preferred_core").get<int>();
                s.admissions.push_back(adm);
            }
        }
        return s;
    });
}

// ---- platform ----

inline Json to_json(const Platform& p) {
    Json levels = p.ladder.levels_hz();
    Json sleeps = Json::array();
    for (const auto& s : p.sleep_states)
        sleeps.push_back({{"id", s.id},
                          {"p_w", s.power_w},
                          {"e_tr_j", s.transition_energy_j},
                          {"latency_slots", s.latency_slots},
                          {"residency_slots", s.min_residency_slots}});
    return {{"slot_length_us", p.slot_length_us},
            {"cores", p.cores},
            {"ladder", {{"f_max_hz", p.ladder.f_max_hz()}, {"levels_hz", levels}}},
            {"power", {{"p_static_w", p.curve.p_static_w}, {"p_dyn_w", p.curve.p_dyn_w}, {"alpha", p.curve.alpha}, {"p_idle_w", p.p_idle_w}}},
            {"sleep_states", sleeps}};
}

/// Missing keys keep the defaults.
inline Platform platform_from_json(const Json& j) {
    return detail::guarded("platform", [&] {
        Platform p;
        p.slot_length_us = detail::get_or<Slot>(j, "slot_length_us", p.slot_length_us);
        p.cores = detail::get_or<int>(j, "cores", p.cores);
        if (j.contains("ladder")) {
            const auto& l = j.at("ladder");
            p.ladder = FrequencyLadder::from_hz(l.at("f_max_hz").get<std::int64_t>(),
                                                detail::get_or<std::vector<std::int64_t>>(l, "levels_hz", {}));
        }
        if (j.contains("power")) {
            const auto& w = j.at("power");
            p.curve.p_static_w = detail::get_or<double>(w, "p_static_w", p.curve.p_static_w);
            p.curve.p_dyn_w = detail::get_or<double>(w, "p_dyn_w", p.curve.p_dyn_w);
            p.curve.alpha = detail::get_or<double>(w, "alpha", p.curve.alpha);
            p.p_idle_w = detail::get_or<double>(w, "p_idle_w", p.curve.p_static_w);
        }
        if (j.contains("sleep_states")) {
            p.sleep_states.clear();
            for (const auto& s : j.at("sleep_states"))
                p.sleep_states.push_back(SleepState{s.at("id").get<std::string>(), s.at("p_w").get<double>(),
                                                    s.at("e_tr_j").get<double>(),
                                                    detail::get_or<Slot>(s, "latency_slots", 0),
                                                    detail::get_or<Slot>(s, "residency_slots", 0)});
        }
        p.validate();
        return p;
    });
}

// ---- generator spec ----

inline GenSpec genspec_from_json(const Json& j) {
    return detail::guarded("generator spec", [&] {
        GenSpec g;
        g.utilization = detail::get_or<double>(j, "utilization", g.utilization);
        if (j.contains("n_tasks") && !j.at("n_tasks").is_null()) g.n_tasks = j.at("n_tasks").get<int>();
        g.wcet = detail::range_from_json(j, "wcet_range", g.wcet);
        g.period = detail::range_from_json(j, "period_range", g.period);
        g.cores = detail::get_or<int>(j, "cores", g.cores);
        g.seed = detail::get_or<std::uint64_t>(j, "seed", g.seed);
        g.horizon = detail::range_from_json(j, "horizon_range", g.horizon);
        g.slot_length_us = detail::get_or<Slot>(j, "slot_length_us", g.slot_length_us);
        g.max_attempts = detail::get_or<int>(j, "max_attempts", g.max_attempts);
        if (j.contains("aperiodic")) {
            const auto& a = j.at("aperiodic");
            g.aperiodic.utilization = detail::get_or<double>(a, "utilization", 0.0);
            g.aperiodic.wcet = detail::range_from_json(a, "wcet_range", g.aperiodic.wcet);
            g.aperiodic.period = detail::range_from_json(a, "period_range", g.aperiodic.period);
        }
        return g;
    });
}

inline Json to_json(const GenSpec& g) {
    return {{"utilization", g.utilization},
            {"n_tasks", g.n_tasks ? Json(*g.n_tasks) : Json(nullptr)},
            {"wcet_range", detail::range_to_json(g.wcet)},
            {"period_range", detail::range_to_json(g.period)},
            {"aperiodic",
             {{"utilization", g.aperiodic.utilization},
              {"wcet_range", detail::range_to_json(g.aperiodic.wcet)},
              {"period_range", detail::range_to_json(g.aperiodic.period)}}},
            {"cores", g.cores},
            {"seed", g.seed},
            {"horizon_range", detail::range_to_json(g.horizon)},
            {"slot_length_us", g.slot_length_us},
            {"max_attempts", g.max_attempts}};
}

// ---- results ----

inline Json to_json(const SimResult& r) {
    Json residency = Json::object();
    for (const auto& [k, v] : r.per_state_residency) residency[k] = v;
    Json hist = Json::object();
    for (const auto& [mhz, slots] : r.freq_histogram) hist[std::to_string(mhz)] = slots;
    const auto& a = r.audit;
    return {{"policy", to_string(r.policy)},
            {"horizon_slots", r.horizon},
            {"slot_length_us", r.slot_length_us},
            {"cores", r.cores},
            {"total_energy_j", r.total_energy_j},
            {"avg_power_w", r.avg_power_w},
            {"deadline_misses", r.deadline_misses},
            {"admissions",
             {{"offered", r.admissions.offered},
              {"accepted", r.admissions.accepted},
              {"delegated", r.admissions.delegated},
              {"rejected", r.admissions.rejected}}},
            {"sleep_transitions", r.sleep_transitions},
            {"per_state_residency", residency},
            {"freq_histogram", hist},
            {"best_effort_slots", r.best_effort_slots},
            {"runtime_wall_ms", r.runtime_wall_ms},
            {"audit",
             {{"frequency_below_ideal", a.frequency_below_ideal},
              {"sleep_rule_breaks", a.sleep_rule_breaks},
              {"reserved_out_of_range", a.reserved_out_of_range},
              {"sc_oracle_mismatches", a.sc_oracle_mismatches},
              {"negative_idle_sc", a.negative_idle_sc}}}};
}

/// Per-core arrays of {start, end, sc, job_ids}; job ids are "task.index".
inline Json table_dump(const std::vector<CoreTable>& tables) {
    Json out = Json::array();
    for (const auto& t : tables) {
        Json core = Json::array();
        for (const auto& iv : t.intervals) {
            Json ids = Json::array();
            for (auto j : iv.jobs) ids.push_back(t.jobs[j].label());
            core.push_back({{"start", iv.start}, {"end", iv.end}, {"sc", iv.sc}, {"job_ids", ids}});
        }
        out.push_back(std::move(core));
    }
    return out;
}

} // namespace eass
