// eass: generate scenarios, run one simulation, sweep a grid, compare policies.

#include <eass/experiment.hpp>
#include <eass/io.hpp>
#include <eass/simulation.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace eass;

namespace {

constexpr int kExitMiss = 1;
constexpr int kExitInput = 2;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string platform_file;
    std::string trace_file;
    bool strict = false;
    int jobs = 1;
};

Platform load_platform(const Globals& g) {
    return g.platform_file.empty() ? Platform{} : platform_from_json(read_json_file(g.platform_file));
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir + ": " + ec.message());
}

int cmd_generate(const Globals& g, const std::string& spec_file, const std::string& out_dir, std::optional<int> cases) {
    const Json j = read_json_file(spec_file);
    GenSpec spec = genspec_from_json(j);
    if (g.seed) spec.seed = *g.seed;
    const int n = cases.value_or(detail::guarded("generator spec", [&] { return detail::get_or<int>(j, "cases", 1); }));
    if (n < 1) throw InputError("cases must be >= 1");
    ensure_dir(out_dir);
    const auto base = spec.seed;
    for (int i = 0; i < n; ++i) {
        GenSpec s = spec;
        s.seed = n == 1 ? base : splitmix64(base + static_cast<std::uint64_t>(i));
        const auto scenario = generate_taskset(s);
        char name[32];
        std::snprintf(name, sizeof name, "case_%03d.json", i);
        write_text_file((fs::path(out_dir) / name).string(), to_json(scenario).dump(2) + "\n");
    }
    std::cerr << "wrote " << n << " scenario file(s) to " << out_dir << "\n";
    return 0;
}

int cmd_run(const Globals& g, const std::string& scenario_file, const std::string& policy_name, bool best_effort,
            const std::string& dump_file, const std::string& out_file) {
    auto policy = parse_policy(policy_name);
    if (!policy) throw InputError("unknown policy " + policy_name);
    Scenario scenario = scenario_from_json(read_json_file(scenario_file));
    Platform platform = load_platform(g);

    if (!dump_file.empty()) write_text_file(dump_file, table_dump(build_tables(scenario)).dump(2) + "\n");

    EngineOptions opts;
    opts.policy = *policy;
    opts.strict = g.strict;
    opts.policy_options.best_effort = best_effort;
    opts.policy_options.best_effort_level = platform.ladder.max_index();
    std::ofstream trace;
    if (!g.trace_file.empty()) {
        trace.open(g.trace_file);
        if (!trace) throw InputError("cannot write " + g.trace_file);
        opts.trace = &trace;
    }
    const SimResult r = simulate(scenario, platform, opts);
    const std::string text = to_json(r).dump(2) + "\n";
    if (out_file.empty())
        std::cout << text;
    else
        write_text_file(out_file, text);
    return r.deadline_misses == 0 ? 0 : kExitMiss;
}

int cmd_sweep(const Globals& g, const std::string& grid_file, const std::string& out_dir, bool best_effort) {
    ExperimentGrid grid = grid_from_json(read_json_file(grid_file));
    if (g.seed) grid.seed = *g.seed;
    const Platform platform = load_platform(g);
    SweepOptions opts;
    opts.jobs = g.jobs;
    opts.strict = false;
    opts.policy_options.best_effort = best_effort;
    opts.policy_options.best_effort_level = platform.ladder.max_index();
    const auto res = run_sweep(grid, platform, opts);
    ensure_dir(out_dir);
    write_text_file((fs::path(out_dir) / "runs.csv").string(), runs_csv(res));
    write_text_file((fs::path(out_dir) / "aggregate.csv").string(), aggregate_csv(res));
    std::cerr << res.runs.size() << " runs, " << res.aggregate.size() << " aggregate rows, "
              << res.deadline_misses() << " deadline misses, " << res.failures() << " failed runs\n";
    if (res.failures() > 0) return kExitInput;
    return res.deadline_misses() == 0 ? 0 : kExitMiss;
}

int cmd_compare(const std::string& results_dir, const std::string& out_file) {
    const auto path = fs::path(results_dir) / "aggregate.csv";
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    const auto text = reductions_csv(compare(parse_aggregate_csv(in)));
    if (out_file.empty())
        std::cout << text;
    else
        write_text_file(out_file, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-aware slot-shifting scheduler simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Override the base seed");
    app.add_option("--platform", g.platform_file, "Platform JSON (defaults to the built-in model)");
    app.add_option("--trace", g.trace_file, "Write a per-core, per-slot CSV trace (run only)");
    app.add_flag("--strict", g.strict, "Abort on the first deadline miss");
    app.add_option("--jobs", g.jobs, "Parallel workers for sweep")->check(CLI::PositiveNumber);

    std::string spec_file, out_dir;
    std::optional<int> cases;
    auto* gen = app.add_subcommand("generate", "Write scenario files from a generator spec");
    gen->add_option("spec", spec_file, "Generator spec JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("-o,--out", out_dir, "Output directory")->required();
    gen->add_option("--cases", cases, "Number of scenarios (overrides the spec's \"cases\")");

    std::string scenario_file, policy = "BSS", dump_file, out_file;
    bool best_effort = false;
    auto* run = app.add_subcommand("run", "Simulate one scenario and print the result as JSON");
    run->add_option("scenario", scenario_file, "Scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("-p,--policy", policy, "BSS, EASS-DPM or EASS-DVFS");
    run->add_flag("--best-effort", best_effort, "Fill idle slots with best-effort work at the top level");
    run->add_option("--dump-table", dump_file, "Write the offline capacity table as JSON");
    run->add_option("-o,--out", out_file, "Write the result here instead of stdout");

    std::string grid_file, sweep_dir;
    auto* sweep = app.add_subcommand(
        "sweep",
        "Run a parameter grid; writes runs.csv and aggregate.csv.\n"
        "Slot length changes energy only through per-slot scaling and the sleep\n"
        "break-even check; kernel interrupt and context-switch costs are not modelled.");
    sweep->add_option("grid", grid_file, "Grid JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--out", sweep_dir, "Output directory")->required();
    sweep->add_flag("--best-effort", best_effort, "Fill idle slots with best-effort work");

    std::string results_dir, compare_out;
    auto* cmp = app.add_subcommand("compare", "Power reduction of each EASS policy against BSS");
    cmp->add_option("results", results_dir, "Directory holding aggregate.csv")->required();
    cmp->add_option("-o,--out", compare_out, "Write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (*gen) return cmd_generate(g, spec_file, out_dir, cases);
        if (*run) return cmd_run(g, scenario_file, policy, best_effort, dump_file, out_file);
        if (*sweep) return cmd_sweep(g, grid_file, sweep_dir, best_effort);
        if (*cmp) return cmd_compare(results_dir, compare_out);
    } catch (const DeadlineMiss& e) {
        std::cerr << "deadline miss: " << e.what() << "\n";
        return kExitMiss;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
