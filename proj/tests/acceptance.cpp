// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "paretonas/costmodel.hpp"
#include "paretonas/evaluators.hpp"
#include "paretonas/fairsampler.hpp"
#include "paretonas/search.hpp"
#include "paretonas/serialize.hpp"

using namespace paretonas;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Run {
    int code;
    std::string output;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string("'") + PARETONAS_CLI_PATH + "' " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

int failures = 0;

void report(const std::string& name, const std::function<std::string(bool&)>& check) {
    bool ok = false;
    std::string detail;
    try {
        detail = check(ok);
    } catch (const std::exception& e) {
        ok = false;
        detail = fmt::format("exception: {}", e.what());
    }
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

} // namespace

int main() {
    const auto space = build_search_space();
    const auto tmp = fs::temp_directory_path() / "paretonas_acceptance";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    report("cost-model", [&](bool& ok) {
        const auto t0 = Clock::now();
        const auto b = cli("cost baseline --json");
        const auto n = cli("cost nasc-net --json");
        const double elapsed = seconds_since(t0) / 2.0;
        if (b.code != 0 || n.code != 0) return fmt::format("cli failed: {}{}", b.output, n.output);
        const auto jb = nlohmann::json::parse(b.output);
        const auto jn = nlohmann::json::parse(n.output);
        const double bp = jb["params"].get<double>() / 1e6, bm = jb["macs"].get<double>() / 1e9;
        const double np = jn["params"].get<double>() / 1e6, nm = jn["macs"].get<double>() / 1e9;
        ok = within(bp, 3.31, 0.05) && within(bm, 2.03, 0.10) && within(np, 3.01, 0.05) && within(nm, 1.53, 0.10) &&
             elapsed < 1.0;
        return fmt::format("baseline {:.3f}M / {:.3f}G, nasc-net {:.3f}M / {:.3f}G, {:.3f} s per call", bp, bm, np,
                           nm, elapsed);
    });

    report("savings-ratios", [&](bool& ok) {
        const auto b = count_cost(decode(preset_chromosome("baseline"), space));
        const auto n = count_cost(decode(preset_chromosome("nasc-net"), space));
        const double macs_ratio = static_cast<double>(n.macs) / static_cast<double>(b.macs);
        const double params_saving = 1.0 - static_cast<double>(n.params) / static_cast<double>(b.params);
        ok = std::abs(macs_ratio - 0.75) <= 0.03 && std::abs(params_saving - 0.09) <= 0.02;
        return fmt::format("macs ratio {:.4f}, params saving {:.2f}%", macs_ratio, 100.0 * params_saving);
    });

    report("space-size", [&](bool& ok) {
        const auto size = space_size(space);
        ok = size == boost::multiprecision::cpp_int("3656158440062976");
        return fmt::format("{}", size.str());
    });

    report("schedule", [&](bool& ok) {
        bool monotone = true;
        for (int i = 1; i < 70; ++i) monotone &= exploitation_ratio(i) <= exploitation_ratio(i + 1);
        const double a10 = exploitation_ratio(10), a15 = exploitation_ratio(15), a70 = exploitation_ratio(70);
        ok = a10 == 0.0 && a15 == 0.0 && std::abs(a70 - 0.8) < 1e-12 && monotone;
        return fmt::format("alpha(10)={} alpha(15)={} alpha(70)={:.15g} monotone={}", a10, a15, a70, monotone);
    });

    report("fairness", [&](bool& ok) {
        SupernetSim sim(space, SimConfig{});
        train_supernet_sim(sim, space, 100);
        int cells = 0, exact = 0;
        for (const auto& row : sim.visit_count())
            for (auto v : row) {
                ++cells;
                exact += v == 100 ? 1 : 0;
            }
        RandomStream rng(2024);
        int valid = 0;
        for (int k = 0; k < 1000; ++k) {
            try {
                validate_plan(sample_plan(space, rng), space);
                ++valid;
            } catch (const std::exception&) {
            }
        }
        ok = cells == 120 && exact == 120 && valid == 1000;
        return fmt::format("{}/{} cells at 100 visits, {}/1000 plans valid", exact, cells, valid);
    });

    report("sorting-oracle", [&](bool& ok) {
        RandomStream rng(77);
        int matched = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const auto n = static_cast<std::size_t>(rng.uniform_int(1, 32));
            std::vector<Individual> pop(n);
            for (auto& p : pop) {
                p.accuracy = rng.uniform_int(0, 8) / 8.0;
                p.macs = rng.uniform_int(1, 9);
            }
            // brute force: repeatedly peel points no remaining point dominates
            std::set<std::size_t> remaining;
            for (std::size_t i = 0; i < n; ++i) remaining.insert(i);
            std::vector<std::set<std::size_t>> expected;
            while (!remaining.empty()) {
                std::set<std::size_t> front;
                for (auto i : remaining) {
                    bool dominated = false;
                    for (auto j : remaining) {
                        const auto& a = pop[j];
                        const auto& b = pop[i];
                        if (a.accuracy >= b.accuracy && a.macs <= b.macs && (a.accuracy > b.accuracy || a.macs < b.macs))
                            dominated = true;
                    }
                    if (!dominated) front.insert(i);
                }
                for (auto i : front) remaining.erase(i);
                expected.push_back(front);
            }
            const auto fronts = fast_nondominated_sort(pop);
            bool same = fronts.size() == expected.size();
            for (std::size_t r = 0; same && r < fronts.size(); ++r)
                same = std::set<std::size_t>(fronts[r].begin(), fronts[r].end()) == expected[r];
            matched += same ? 1 : 0;
        }
        ok = matched == 200;
        return fmt::format("{}/200 populations match", matched);
    });

    report("search-efficacy", [&](bool& ok) {
        const HypervolumeReference ref{0.0, static_cast<double>(max_macs(space))};
        int wins = 0;
        double slowest = 0.0;
        std::string rows;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto t0 = Clock::now();
            SurrogateEvaluator ev(space, seed);
            SearchConfig config;
            config.seed = seed;
            const auto nsga = run_search(config, space, ev);
            RandomStream rng(seed);
            const auto rs = random_search(64 * 70, space, ev, rng);
            const double hv_n = hypervolume(pareto_front(nsga.archive), ref);
            const double hv_r = hypervolume(rs.archive, ref);
            slowest = std::max(slowest, seconds_since(t0));
            wins += hv_n > hv_r ? 1 : 0;
            rows += fmt::format(" {}:{:.3f}/{:.3f}", seed, hv_n, hv_r);
            if (nsga.log.size() != 4480 || rs.log.size() != 4480) return std::string("wrong evaluation count");
        }
        ok = wins >= 8 && slowest < 60.0;
        return fmt::format("NSGA-II wins {}/10, slowest pair {:.2f} s; hv nsga/rs{}", wins, slowest, rows);
    });

    report("ranking-consistency", [&](bool& ok) {
        SupernetSim sim(space, SimConfig{});
        train_supernet_sim(sim, space, 2000);
        RandomStream rng(12345);
        const auto rc = ranking_consistency(sim, space, 200, rng);
        ok = !rc.degenerate && rc.tau >= 0.7;
        return fmt::format("tau = {:.4f} over 200 chromosomes", rc.tau);
    });

    report("determinism", [&](bool& ok) {
        const std::string common = " --seed 11";
        const auto a = (tmp / "a").string(), b = (tmp / "b").string(), c = (tmp / "c").string();
        if (cli("search" + common + " --out-dir '" + a + "'").code != 0 ||
            cli("search" + common + " --out-dir '" + b + "'").code != 0 ||
            cli("search" + common + " --out-dir '" + c + "' --stop-after 35").code != 0 ||
            cli("search --resume --out-dir '" + c + "'").code != 0)
            return std::string("cli search failed");
        const auto fa = read_text_file(tmp / "a" / "front.csv");
        const bool cli_same = fa == read_text_file(tmp / "b" / "front.csv");
        const bool cli_resume = fa == read_text_file(tmp / "c" / "front.csv");

        // resume from every checkpoint of one run, through the on-disk format
        SurrogateEvaluator ev(space, 0);
        SearchConfig config;
        config.seed = 11;
        std::vector<std::string> checkpoints;
        SearchHooks record;
        record.on_iteration = [&](const SearchState& s) { checkpoints.push_back(checkpoint_to_json(s).dump()); };
        const auto full = run_search(config, space, ev, record);
        const auto expected = front_csv(pareto_front(full.archive));
        int resumed_ok = 0;
        for (std::size_t k = 0; k + 1 < checkpoints.size(); ++k) {
            SearchHooks resume;
            resume.resume_from = checkpoint_from_json(nlohmann::json::parse(checkpoints[k]));
            const auto r = run_search(config, space, ev, resume);
            resumed_ok += front_csv(pareto_front(r.archive)) == expected && log_csv(r.log) == log_csv(full.log);
        }
        const int points = static_cast<int>(checkpoints.size()) - 1;
        ok = cli_same && cli_resume && resumed_ok == points;
        return fmt::format("cli repeat identical={}, cli resume@35 identical={}, library resume identical at {}/{} "
                           "iterations",
                           cli_same, cli_resume, resumed_ok, points);
    });

    fs::remove_all(tmp);
    std::cout << (failures == 0 ? "ALL PASS" : fmt::format("{} FAILED", failures)) << std::endl;
    return failures == 0 ? 0 : 1;
}
