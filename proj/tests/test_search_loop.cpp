#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "paretonas/costmodel.hpp"
#include "paretonas/errors.hpp"
#include "paretonas/search.hpp"
#include "paretonas/serialize.hpp"

using namespace paretonas;

namespace {

class CountingEvaluator final : public AccuracyEvaluator {
  public:
    explicit CountingEvaluator(const SearchSpace& space) : inner_(space, 0) {}
    double evaluate(const Chromosome& c) override {
        {
            std::lock_guard lock(mutex_);
            ++counts[c];
        }
        return inner_.evaluate(c);
    }
    std::string name() const override { return "counting"; }
    std::map<Chromosome, int> counts;

  private:
    SurrogateEvaluator inner_;
    std::mutex mutex_;
};

class FailingEvaluator final : public AccuracyEvaluator {
  public:
    double evaluate(const Chromosome&) override { throw std::runtime_error("disk on fire"); }
    std::string name() const override { return "failing"; }
};

std::vector<oracle::Point> points_of(std::span<const Individual> pop) {
    std::vector<oracle::Point> pts;
    for (const auto& p : pop) pts.push_back({p.accuracy, p.macs});
    return pts;
}

} // namespace

TEST(SearchLoop, DefaultRunLogsEveryCandidate) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    SearchConfig config;
    config.seed = 1;
    const auto r = run_search(config, space, ev);
    EXPECT_EQ(r.log.size(), 64u * 70u);
    EXPECT_EQ(r.completed_iterations, 70);
    EXPECT_LE(r.archive.size(), 64u);
    std::set<Chromosome> distinct;
    for (const auto& row : r.log) distinct.insert(row.chromosome);
    EXPECT_EQ(r.evaluator_calls, distinct.size());
}

TEST(SearchLoop, RandomNewcomersFollowSchedule) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    SearchConfig config;
    config.seed = 9;
    config.iterations = 16;
    const auto r = run_search(config, space, ev);
    // Iterations 1..15 are pure random draws; iteration 16 opens with 63 of them.
    RandomStream rng(9);
    for (std::size_t k = 0; k < 15u * 64u + 63u; ++k) ASSERT_EQ(r.log[k].chromosome, random_chromosome(space, rng)) << k;
    for (std::size_t k = 0; k < r.log.size(); ++k) EXPECT_EQ(r.log[k].iteration, static_cast<int>(k / 64 + 1));
}

TEST(SearchLoop, SameSeedSameEverything) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    SearchConfig config;
    config.seed = 4;
    config.iterations = 30;
    const auto a = run_search(config, space, ev);
    config.workers = 3; // thread count must not matter
    const auto b = run_search(config, space, ev);
    EXPECT_EQ(log_csv(a.log), log_csv(b.log));
    EXPECT_EQ(front_csv(a.archive), front_csv(b.archive));
    config.seed = 5;
    EXPECT_NE(log_csv(run_search(config, space, ev).log), log_csv(a.log));
}

TEST(SearchLoop, KillAndResumeIsBitIdentical) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    SearchConfig config;
    config.seed = 6;
    config.iterations = 40;
    const auto full = run_search(config, space, ev);
    for (int stop : {1, 15, 16, 33}) {
        SearchState saved;
        SearchHooks first;
        first.stop_after = stop;
        first.on_iteration = [&](const SearchState& s) { saved = s; };
        const auto partial = run_search(config, space, ev, first);
        EXPECT_EQ(partial.completed_iterations, stop);

        // round trip through the on-disk format, as a real restart would
        SearchHooks second;
        second.resume_from = checkpoint_from_json(nlohmann::json::parse(checkpoint_to_json(saved).dump()));
        const auto resumed = run_search(config, space, ev, second);
        EXPECT_EQ(log_csv(resumed.log), log_csv(full.log)) << "stop " << stop;
        EXPECT_EQ(front_csv(resumed.archive), front_csv(full.archive)) << "stop " << stop;
    }
}

TEST(SearchLoop, ResumeRejectsDifferentConfig) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    SearchConfig config;
    config.population_size = 8;
    config.iterations = 3;
    SearchState saved;
    SearchHooks hooks;
    hooks.on_iteration = [&](const SearchState& s) { saved = s; };
    run_search(config, space, ev, hooks);
    config.seed = 1;
    SearchHooks resume;
    resume.resume_from = saved;
    EXPECT_THROW(run_search(config, space, ev, resume), ValidationError);
}

TEST(SearchLoop, EachChromosomeEvaluatedOnce) {
    // A 4-layer space has 1296 members, so repeats are frequent.
    const auto space = build_prefix_space(4);
    CountingEvaluator ev(space);
    SearchConfig config;
    config.population_size = 32;
    config.iterations = 50;
    const auto r = run_search(config, space, ev);
    std::size_t cached_rows = 0;
    for (const auto& row : r.log) cached_rows += row.cached ? 1 : 0;
    EXPECT_GT(cached_rows, 0u);
    for (const auto& [c, n] : ev.counts) EXPECT_EQ(n, 1) << c.to_string();
    EXPECT_EQ(ev.counts.size(), r.evaluator_calls);
    EXPECT_EQ(r.log.size() - cached_rows, r.evaluator_calls);
}

TEST(SearchLoop, ArchiveInvariantsAndMonotoneHypervolume) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    SearchConfig config;
    config.seed = 12;
    const HypervolumeReference ref{0.0, static_cast<double>(max_macs(space))};
    double last_hv = -1.0;
    SearchHooks hooks;
    hooks.on_iteration = [&](const SearchState& s) {
        ASSERT_LE(s.archive.size(), 64u);
        std::set<Chromosome> unique;
        for (const auto& m : s.archive) unique.insert(m.chromosome);
        EXPECT_EQ(unique.size(), s.archive.size());
        const auto fronts = oracle::peel_fronts(points_of(s.archive));
        for (std::size_t r = 0; r < fronts.size(); ++r)
            for (auto i : fronts[r]) EXPECT_EQ(s.archive[i].rank, static_cast<int>(r));
        const double hv = hypervolume(pareto_front(s.archive), ref);
        EXPECT_GE(hv, last_hv) << "iteration " << s.completed_iterations;
        last_hv = hv;
    };
    run_search(config, space, ev, hooks);
    EXPECT_GT(last_hv, 0.0);
}

TEST(SearchLoop, FindsTrueFrontOnToySpace) {
    const auto space = build_prefix_space(3); // 216 members
    SupernetSim sim(space, {1.0, 0.0, 5});
    train_supernet_sim(sim, space, 1); // learned == latent
    SupernetEvaluator ev(sim);

    std::vector<Individual> everything;
    for (int a = 1; a <= 6; ++a)
        for (int b = 1; b <= 6; ++b)
            for (int c = 1; c <= 6; ++c) {
                const Chromosome g({a, b, c});
                Individual x;
                x.chromosome = g;
                x.accuracy = logistic(sim.latent_sum(g));
                x.macs = flops_objective(g, space);
                everything.push_back(x);
            }
    const auto fronts = oracle::peel_fronts(points_of(everything));
    std::set<Chromosome> truth;
    for (auto i : fronts[0]) truth.insert(everything[i].chromosome);

    SearchConfig config;
    config.population_size = 32;
    config.iterations = 40;
    const auto r = run_search(config, space, ev);
    std::set<Chromosome> found;
    for (const auto& m : pareto_front(r.archive)) found.insert(m.chromosome);
    EXPECT_EQ(found, truth);
}

TEST(SearchLoop, UntrainedSupernetScoresEverythingEqually) {
    const auto space = build_search_space();
    SupernetEvaluator ev(SupernetSim(space, SimConfig{}));
    SearchConfig config;
    config.population_size = 8;
    config.iterations = 3;
    const auto r = run_search(config, space, ev);
    for (const auto& row : r.log) EXPECT_EQ(row.accuracy, 0.5);
    const auto front = pareto_front(r.archive);
    std::int64_t cheapest = r.log.front().macs;
    for (const auto& row : r.log) cheapest = std::min(cheapest, row.macs);
    for (const auto& m : front) EXPECT_EQ(m.macs, cheapest);
}

TEST(SearchLoop, EvaluatorFailureSurfaces) {
    const auto space = build_search_space();
    FailingEvaluator ev;
    SearchConfig config;
    config.population_size = 8;
    config.iterations = 2;
    try {
        run_search(config, space, ev);
        FAIL();
    } catch (const EvaluatorError& e) {
        EXPECT_NE(std::string(e.what()).find("disk on fire"), std::string::npos);
    }
}

TEST(RandomSearch, BudgetAndMutualNonDominance) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    RandomStream rng(3);
    const auto r = random_search(500, space, ev, rng);
    EXPECT_EQ(r.log.size(), 500u);
    for (const auto& row : r.log) EXPECT_EQ(row.iteration, 0);
    for (const auto& a : r.archive)
        for (const auto& b : r.archive) EXPECT_FALSE(dominates(a, b));
    RandomStream one(4);
    EXPECT_EQ(random_search(1, space, ev, one).archive.size(), 1u);
    EXPECT_THROW(random_search(0, space, ev, one), ArgumentError);
}
