// paretonas: cost analysis, fair sampling plans, supernet simulation,
// NSGA-II / random search and front comparison.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or input error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "paretonas/archspace.hpp"
#include "paretonas/costmodel.hpp"
#include "paretonas/errors.hpp"
#include "paretonas/evaluators.hpp"
#include "paretonas/fairsampler.hpp"
#include "paretonas/kernels.hpp"
#include "paretonas/search.hpp"
#include "paretonas/serialize.hpp"
#include "paretonas/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace paretonas;

namespace {

/// Bad input from the user: reported and mapped to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json load_json_file(const fs::path& path) {
    if (!fs::exists(path)) {
        throw InputError(fmt::format("file not found: {}", path.string()));
    }
    auto j = json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) {
        throw InputError(fmt::format("{}: not valid JSON", path.string()));
    }
    return j;
}

bool looks_like_path(const std::string& ref) {
    return ref.find('/') != std::string::npos || ref.ends_with(".json") || fs::exists(ref);
}

ArchDescriptor resolve_arch(const std::string& ref, const SearchSpace& space) {
    for (const auto& name : preset_names()) {
        if (ref == name) return decode(preset_chromosome(name), space);
    }
    if (looks_like_path(ref)) {
        return arch_from_json(load_json_file(ref));
    }
    if (ref.find('-') != std::string::npos || ref.find(',') != std::string::npos) {
        return decode(Chromosome::parse(ref), space);
    }
    throw InputError(fmt::format("unknown preset '{}' (known: baseline, nasc-net)", ref));
}

// ---------------------------------------------------------------- cost

struct CostArgs {
    std::string arch;
    bool as_json = false;
    int flops_multiplier = 1;
};

int run_cost(const CostArgs& a) {
    const auto space = build_search_space();
    const auto report = count_cost(resolve_arch(a.arch, space));
    std::cout << (a.as_json ? cost_report_json(report, a.flops_multiplier) + "\n"
                            : format_cost_table(report, a.flops_multiplier));
    return 0;
}

// ---------------------------------------------------------- export-arch

struct ExportArgs {
    std::string arch;
    std::string output;
};

int run_export(const ExportArgs& a) {
    const auto space = build_search_space();
    const auto text = arch_to_json(resolve_arch(a.arch, space)).dump(2) + "\n";
    if (a.output.empty()) {
        std::cout << text;
    } else {
        write_text_file(a.output, text);
    }
    return 0;
}

// ---------------------------------------------------------- sample-plan

struct PlanArgs {
    std::uint64_t seed = 0;
    int count = 1;
};

int run_sample_plan(const PlanArgs& a) {
    if (a.count < 1) throw InputError("--count must be >= 1");
    const auto space = build_search_space();
    RandomStream rng(a.seed);
    ordered_json plans = ordered_json::array();
    for (int k = 0; k < a.count; ++k) {
        const auto plan = sample_plan(space, rng);
        validate_plan(plan, space);
        plans.push_back(plan_to_json(plan));
    }
    std::cout << (a.count == 1 ? plans.front() : plans).dump() << "\n";
    return 0;
}

// ---------------------------------------------------- simulate-supernet

struct SimArgs {
    std::int64_t steps = 2000;
    double lr = 0.1;
    double noise = 0.05;
    std::uint64_t seed = 0;
    std::size_t samples = 200;
    std::uint64_t sample_seed = 1;
    double threshold = 0.7;
    std::string state_out;
};

int run_simulate(const SimArgs& a) {
    const auto space = build_search_space();
    SupernetSim sim(space, {a.lr, a.noise, a.seed});
    train_supernet_sim(sim, space, a.steps);
    RandomStream rng(a.sample_seed);
    const auto rc = ranking_consistency(sim, space, a.samples, rng);

    std::int64_t lo = sim.visit_count()[0][0], hi = lo;
    for (const auto& row : sim.visit_count()) {
        for (const auto v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    ordered_json j{{"steps", a.steps},
                   {"visit_count_min", lo},
                   {"visit_count_max", hi},
                   {"kendall_tau", rc.tau},
                   {"degenerate", rc.degenerate},
                   {"threshold", a.threshold},
                   {"passes_threshold", !rc.degenerate && rc.tau >= a.threshold}};
    if (rc.degenerate) {
        std::cerr << "warning: supernet scores are constant; tau reported as 0\n";
    }
    if (!a.state_out.empty()) {
        write_text_file(a.state_out, sim.to_json() + "\n");
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------- search

struct SearchArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> population;
    std::optional<int> iterations;
    std::optional<int> workers;
    std::optional<std::string> evaluator;
    std::optional<std::uint64_t> surrogate_seed;
    std::optional<std::int64_t> sim_steps;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::string> worker_cmd;
    std::optional<int> timeout_ms;
    bool embed_arch = false;
    std::string baseline;
    std::optional<int> budget;
    std::string out_dir;
    bool resume = false;
    int stop_after = 0;
};

struct EvaluatorChoice {
    std::string type = "surrogate";
    std::uint64_t surrogate_seed = 0;
    std::int64_t sim_steps = 2000;
    std::uint64_t sim_seed = 0;
    std::string worker_cmd;
    int timeout_ms = 30000;
    bool embed_arch = false;

    ordered_json to_json() const {
        ordered_json j{{"type", type}};
        if (type == "surrogate") j["seed"] = surrogate_seed;
        if (type == "supernet") j["sim_seed"] = sim_seed, j["sim_steps"] = sim_steps;
        if (type == "bridge") j["worker_cmd"] = worker_cmd, j["timeout_ms"] = timeout_ms, j["embed_arch"] = embed_arch;
        return j;
    }
};

std::unique_ptr<AccuracyEvaluator> make_evaluator(const EvaluatorChoice& e, const SearchSpace& space) {
    if (e.type == "surrogate") {
        return std::make_unique<SurrogateEvaluator>(space, e.surrogate_seed);
    }
    if (e.type == "supernet") {
        SupernetSim sim(space, {0.1, 0.05, e.sim_seed});
        train_supernet_sim(sim, space, e.sim_steps);
        return supernet_evaluator(std::move(sim));
    }
    if (e.type == "bridge") {
        if (e.worker_cmd.empty()) throw InputError("--evaluator bridge needs --worker-cmd");
        return std::make_unique<PinningEvaluator>(std::make_unique<BridgeEvaluator>(
            e.worker_cmd, space, BridgeOptions{std::chrono::milliseconds(e.timeout_ms), e.embed_arch}));
    }
    throw InputError(fmt::format("unknown evaluator '{}' (surrogate, supernet, bridge)", e.type));
}

void write_manifest(const fs::path& dir, const std::string& mode, const SearchConfig& config,
                    const EvaluatorChoice& ev, const std::string& started, const std::vector<std::string>& outputs,
                    const std::string& config_path, const ordered_json& extra) {
    ordered_json j;
    j["tool"] = "paretonas";
    j["version"] = kVersion;
    j["mode"] = mode;
    j["seed"] = config.seed;
    j["config"] = config_to_json(config);
    j["evaluator"] = ev.to_json();
    j["inputs"] = config_path.empty() ? ordered_json::array() : ordered_json::array({config_path});
    j["outputs"] = outputs;
    j["started_at"] = started;
    j["finished_at"] = utc_now();
    for (const auto& [k, v] : extra.items()) j[k] = v;
    write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

int run_search_cmd(const SearchArgs& a) {
    const auto started = utc_now();
    const auto space = build_search_space();

    // Precedence: flags > config file > defaults.
    SearchConfig config;
    EvaluatorChoice ev;
    std::string baseline = a.baseline;
    std::optional<int> budget = a.budget;
    if (!a.config_path.empty()) {
        const auto file = load_json_file(a.config_path);
        config = config_from_json(file, config);
        if (const auto it = file.find("evaluator"); it != file.end()) {
            const auto& e = *it;
            ev.type = e.value("type", ev.type);
            ev.surrogate_seed = e.value("seed", ev.surrogate_seed);
            ev.sim_steps = e.value("sim_steps", ev.sim_steps);
            ev.sim_seed = e.value("sim_seed", ev.sim_seed);
            ev.worker_cmd = e.value("worker_cmd", ev.worker_cmd);
            ev.timeout_ms = e.value("timeout_ms", ev.timeout_ms);
            ev.embed_arch = e.value("embed_arch", ev.embed_arch);
        }
        if (baseline.empty()) baseline = file.value("baseline", std::string{});
        if (!budget && file.contains("budget")) budget = file["budget"].get<int>();
    }
    if (a.seed) config.seed = *a.seed;
    if (a.population) config.population_size = *a.population;
    if (a.iterations) config.iterations = *a.iterations;
    if (a.workers) config.workers = *a.workers;
    if (a.evaluator) ev.type = *a.evaluator;
    if (a.surrogate_seed) ev.surrogate_seed = *a.surrogate_seed;
    if (a.sim_steps) ev.sim_steps = *a.sim_steps;
    if (a.sim_seed) ev.sim_seed = *a.sim_seed;
    if (a.worker_cmd) ev.worker_cmd = *a.worker_cmd;
    if (a.timeout_ms) ev.timeout_ms = *a.timeout_ms;
    if (a.embed_arch) ev.embed_arch = true;
    validate(config);

    fs::path out = a.out_dir;
    if (out.empty()) {
        const char* env = std::getenv("PARETONAS_OUT_DIR");
        out = env && *env ? env : "paretonas-out";
    }
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) {
        throw std::runtime_error(fmt::format("cannot create output directory {}", out.string()));
    }

    auto evaluator = make_evaluator(ev, space);

    if (!baseline.empty()) {
        if (baseline != "random") throw InputError(fmt::format("unknown baseline '{}'", baseline));
        const int n = budget.value_or(config.population_size * config.iterations);
        RandomStream rng(config.seed);
        const auto result = random_search(n, space, *evaluator, rng, config.workers);
        write_text_file(out / "front.csv", front_csv(result.archive));
        write_text_file(out / "evaluations.csv", log_csv(result.log));
        write_text_file(out / "scatter.csv", scatter_csv(result.log));
        write_manifest(out, "random", config, ev, started, {"front.csv", "evaluations.csv", "scatter.csv"},
                       a.config_path, {{"budget", n}, {"evaluator_calls", result.evaluator_calls}});
        std::cout << fmt::format("random search: {} evaluations, {} front points -> {}\n", result.log.size(),
                                 result.archive.size(), out.string());
        return 0;
    }

    SearchHooks hooks;
    const auto checkpoint = out / "checkpoint.json";
    if (a.resume) {
        auto state = checkpoint_from_json(load_json_file(checkpoint));
        // A resumed run keeps the checkpoint's configuration unless flags changed it.
        if (a.config_path.empty() && !a.seed && !a.population) {
            const int iterations = a.iterations.value_or(state.config.iterations);
            const int workers = config.workers;
            config = state.config;
            config.iterations = iterations;
            config.workers = workers;
        }
        hooks.resume_from = std::move(state);
    }
    hooks.stop_after = a.stop_after;
    hooks.on_iteration = [&](const SearchState& s) { write_text_file(checkpoint, checkpoint_to_json(s).dump() + "\n"); };

    const auto result = run_search(config, space, *evaluator, hooks);
    const auto front = pareto_front(result.archive);
    write_text_file(out / "front.csv", front_csv(front));
    write_text_file(out / "archive.csv", front_csv(result.archive));
    write_text_file(out / "evaluations.csv", log_csv(result.log));
    write_text_file(out / "scatter.csv", scatter_csv(result.log));
    const double hv = hypervolume(front, {0.0, static_cast<double>(max_macs(space))});
    write_manifest(out, "nsga2", config, ev, started,
                   {"front.csv", "archive.csv", "evaluations.csv", "scatter.csv", "checkpoint.json"}, a.config_path,
                   {{"completed_iterations", result.completed_iterations},
                    {"evaluations_logged", result.log.size()},
                    {"evaluator_calls_this_session", result.evaluator_calls},
                    {"resumed", a.resume},
                    {"front_hypervolume", hv}});
    std::cout << fmt::format("nsga2: {} iterations, {} evaluations logged, {} front points, hypervolume {:.6f} -> {}\n",
                             result.completed_iterations, result.log.size(), front.size(), hv, out.string());
    return 0;
}

// -------------------------------------------------------------- compare

struct CompareArgs {
    std::string front_a;
    std::string front_b;
    std::optional<double> macs_ref;
    bool as_json = false;
};

std::vector<Individual> load_front(const std::string& path) {
    if (!fs::exists(path)) throw InputError(fmt::format("file not found: {}", path));
    const auto text = read_text_file(path);
    std::vector<Individual> points;
    try {
        points = parse_front_csv(text);
    } catch (const ValidationError& e) {
        if (text.find_first_not_of(" \r\n\t") == std::string::npos) {
            throw InputError(fmt::format("{}: no points", path));
        }
        throw InputError(fmt::format("{}: {}", path, e.what()));
    }
    if (points.empty()) throw InputError(fmt::format("{}: no points", path));
    return points;
}

std::size_t dominated_count(std::span<const Individual> by, std::span<const Individual> targets) {
    std::size_t n = 0;
    for (const auto& t : targets) {
        for (const auto& b : by) {
            if (dominates(b, t)) {
                ++n;
                break;
            }
        }
    }
    return n;
}

int run_compare(const CompareArgs& a) {
    const auto pa = load_front(a.front_a);
    const auto pb = load_front(a.front_b);
    const double ref = a.macs_ref.value_or(static_cast<double>(max_macs(build_search_space())));
    const HypervolumeReference reference{0.0, ref};
    const double hva = hypervolume(pa, reference);
    const double hvb = hypervolume(pb, reference);
    const auto a_dominates = dominated_count(pa, pb);
    const auto b_dominates = dominated_count(pb, pa);
    const char* verdict = hva > hvb ? "A" : (hvb > hva ? "B" : "tie");
    if (a.as_json) {
        ordered_json j{{"macs_reference", ref},
                       {"a", {{"path", a.front_a}, {"points", pa.size()}, {"hypervolume", hva}, {"dominates_of_other", a_dominates}}},
                       {"b", {{"path", a.front_b}, {"points", pb.size()}, {"hypervolume", hvb}, {"dominates_of_other", b_dominates}}},
                       {"larger_hypervolume", verdict}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << fmt::format("A {}: {} points, hypervolume {:.6f}, dominates {} of B's points\n", a.front_a,
                                 pa.size(), hva, a_dominates);
        std::cout << fmt::format("B {}: {} points, hypervolume {:.6f}, dominates {} of A's points\n", a.front_b,
                                 pb.size(), hvb, b_dominates);
        std::cout << fmt::format("larger hypervolume: {}\n", verdict);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"paretonas: multi-objective architecture search over a unidirectional-kernel MobileNetV2 space"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CostArgs cost;
    auto* cost_cmd = app.add_subcommand("cost", "Parameter and MAC counts for a preset, chromosome or architecture JSON");
    cost_cmd->add_option("arch", cost.arch, "Preset name (baseline, nasc-net), chromosome (4-4-...), or JSON path")
        ->required();
    cost_cmd->add_flag("--json", cost.as_json, "Emit JSON instead of a table");
    cost_cmd->add_option("--flops-multiplier", cost.flops_multiplier, "Report FLOPs as this multiple of MACs")
        ->check(CLI::IsMember({1, 2}));

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export-arch", "Write the architecture JSON for a preset or chromosome");
    export_cmd->add_option("arch", exp.arch, "Preset name or chromosome")->required();
    export_cmd->add_option("-o,--output", exp.output, "Output file (default: stdout)");

    PlanArgs plan;
    auto* plan_cmd = app.add_subcommand("sample-plan", "Emit fair sampling plans (6 models, no shared blocks)");
    plan_cmd->add_option("--seed", plan.seed, "Random seed");
    plan_cmd->add_option("--count", plan.count, "Number of plans (>1 emits a JSON array)");

    SimArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate-supernet", "Train the tabular supernet stand-in and report ranking consistency");
    sim_cmd->add_option("--steps", sim.steps, "Mini-batch steps")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--lr", sim.lr, "Learning rate");
    sim_cmd->add_option("--noise", sim.noise, "Gradient noise scale");
    sim_cmd->add_option("--seed", sim.seed, "Simulation seed (latent table and training noise)");
    sim_cmd->add_option("--samples", sim.samples, "Chromosomes sampled for Kendall tau");
    sim_cmd->add_option("--sample-seed", sim.sample_seed, "Seed for the sampled chromosomes");
    sim_cmd->add_option("--threshold", sim.threshold, "Tau threshold reported as pass/fail");
    sim_cmd->add_option("--state-out", sim.state_out, "Write the trained tables as JSON");

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Run NSGA-II (or a random-search baseline) and write artifacts");
    search_cmd->add_option("--config", search.config_path, "JSON config file");
    search_cmd->add_option("--seed", search.seed, "Search seed");
    search_cmd->add_option("--population", search.population, "Population size P");
    search_cmd->add_option("--iterations", search.iterations, "Iterations I");
    search_cmd->add_option("--workers", search.workers, "Evaluation threads (default: all processors)");
    search_cmd->add_option("--evaluator", search.evaluator, "surrogate | supernet | bridge");
    search_cmd->add_option("--surrogate-seed", search.surrogate_seed, "Seed of the surrogate landscape");
    search_cmd->add_option("--sim-steps", search.sim_steps, "Training steps for the supernet evaluator");
    search_cmd->add_option("--sim-seed", search.sim_seed, "Seed for the supernet evaluator");
    search_cmd->add_option("--worker-cmd", search.worker_cmd, "Shell command starting a bridge worker");
    search_cmd->add_option("--timeout-ms", search.timeout_ms, "Bridge reply timeout");
    search_cmd->add_flag("--embed-arch", search.embed_arch, "Send the architecture JSON with each bridge request");
    search_cmd->add_option("--baseline", search.baseline, "Run a baseline instead of NSGA-II (random)");
    search_cmd->add_option("--budget", search.budget, "Random-search budget (default P*I)");
    search_cmd->add_option("--out-dir", search.out_dir, "Output directory (default $PARETONAS_OUT_DIR or ./paretonas-out)");
    search_cmd->add_flag("--resume", search.resume, "Continue from <out-dir>/checkpoint.json");
    search_cmd->add_option("--stop-after", search.stop_after, "Stop after this many completed iterations");

    CompareArgs cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "Compare two front CSVs by normalized hypervolume and dominance");
    cmp_cmd->add_option("front_a", cmp.front_a, "First front CSV")->required();
    cmp_cmd->add_option("front_b", cmp.front_b, "Second front CSV")->required();
    cmp_cmd->add_option("--macs-ref", cmp.macs_ref, "MACs normalizer (default: all-max-choice architecture)");
    cmp_cmd->add_flag("--json", cmp.as_json, "Emit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*cost_cmd) return run_cost(cost);
        if (*export_cmd) return run_export(exp);
        if (*plan_cmd) return run_sample_plan(plan);
        if (*sim_cmd) return run_simulate(sim);
        if (*search_cmd) return run_search_cmd(search);
        if (*cmp_cmd) return run_compare(cmp);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
