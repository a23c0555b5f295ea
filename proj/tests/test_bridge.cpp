#include <chrono>
#include <future>
#include <string>

#include <gtest/gtest.h>

#include "paretonas/errors.hpp"
#include "paretonas/evaluators.hpp"
#include "paretonas/search.hpp"
#include "paretonas/serialize.hpp"

using namespace paretonas;
using namespace std::chrono_literals;

namespace {

std::string worker(const std::string& mode, const std::string& arg = "") {
    return std::string("'") + PARETONAS_WORKER_PATH + "' " + mode + (arg.empty() ? "" : " " + arg);
}

std::vector<Chromosome> sample(int n, std::uint64_t seed) {
    const auto space = build_search_space();
    RandomStream rng(seed);
    std::vector<Chromosome> out;
    for (int i = 0; i < n; ++i) out.push_back(random_chromosome(space, rng));
    return out;
}

// Runs f on another thread and fails instead of hanging forever.
template <typename F>
void within(std::chrono::seconds limit, F f) {
    auto fut = std::async(std::launch::async, f);
    ASSERT_EQ(fut.wait_for(limit), std::future_status::ready) << "bridge call did not return";
    fut.get();
}

} // namespace

TEST(Bridge, SurrogateWorkerMatchesNativeBitForBit) {
    const auto space = build_search_space();
    SurrogateEvaluator native(space, 7);
    BridgeEvaluator bridge(worker("surrogate", "7"));
    const auto batch = sample(200, 1);
    const auto remote = bridge.evaluate_batch(batch, 4);
    ASSERT_EQ(remote.size(), batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(remote[i], native.evaluate(batch[i]));
    EXPECT_EQ(bridge.evaluate(batch[3]), native.evaluate(batch[3]));
    EXPECT_EQ(bridge.requests_sent(), 201);
}

TEST(Bridge, OutOfOrderRepliesMatchedById) {
    const auto space = build_search_space();
    SurrogateEvaluator native(space, 3);
    BridgeEvaluator bridge(worker("reorder", "3"));
    const auto batch = sample(50, 2);
    const auto remote = bridge.evaluate_batch(batch, 1);
    for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(remote[i], native.evaluate(batch[i]));
}

TEST(Bridge, EmbeddedArchitectureReachesWorker) {
    BridgeEvaluator with(worker("arch-check"), build_search_space(), BridgeOptions{5000ms, true});
    BridgeEvaluator without(worker("arch-check"), build_search_space(), BridgeOptions{5000ms, false});
    const auto g = preset_chromosome("baseline");
    EXPECT_EQ(with.evaluate(g), 1.0);
    EXPECT_EQ(without.evaluate(g), 0.0);
}

TEST(Bridge, SearchThroughBridgeEqualsNativeSearch) {
    const auto space = build_search_space();
    SearchConfig config;
    config.population_size = 16;
    config.iterations = 20;
    config.seed = 5;
    SurrogateEvaluator native(space, 11);
    BridgeEvaluator bridge(worker("surrogate", "11"));
    const auto a = run_search(config, space, native);
    const auto b = run_search(config, space, bridge);
    EXPECT_EQ(front_csv(pareto_front(a.archive)), front_csv(pareto_front(b.archive)));
    EXPECT_EQ(log_csv(a.log), log_csv(b.log));
    EXPECT_EQ(static_cast<std::size_t>(bridge.requests_sent()), b.evaluator_calls);
}

TEST(BridgeFaults, RangeViolationNamesRequest) {
    BridgeEvaluator bridge(worker("range"));
    const auto g = preset_chromosome("nasc-net");
    within(20s, [&] {
        try {
            bridge.evaluate(g);
            FAIL();
        } catch (const AccuracyRangeError& e) {
            EXPECT_EQ(e.request_id(), 1);
            EXPECT_NE(std::string(e.what()).find(g.to_string()), std::string::npos) << e.what();
        }
    });
}

TEST(BridgeFaults, MalformedLineIsProtocolError) {
    BridgeEvaluator bridge(worker("malformed"));
    within(20s, [&] {
        try {
            bridge.evaluate(preset_chromosome("baseline"));
            FAIL();
        } catch (const AccuracyRangeError&) {
            FAIL() << "wrong class";
        } catch (const ProtocolError& e) {
            EXPECT_NE(std::string(e.what()).find("malformed"), std::string::npos);
        }
    });
}

TEST(BridgeFaults, SilentWorkerTimesOut) {
    BridgeEvaluator bridge(worker("silent"), BridgeOptions{300ms, false});
    const auto start = std::chrono::steady_clock::now();
    within(20s, [&] {
        try {
            bridge.evaluate(preset_chromosome("baseline"));
            FAIL();
        } catch (const EvaluatorTimeout& e) {
            EXPECT_EQ(e.request_id(), 1);
        }
    });
    EXPECT_LT(std::chrono::steady_clock::now() - start, 10s);
}

TEST(BridgeFaults, ExitingWorkerIsWorkerExited) {
    BridgeEvaluator bridge(worker("exit"));
    within(20s, [&] { EXPECT_THROW(bridge.evaluate_batch(sample(10, 3), 1), WorkerExited); });
}

TEST(BridgeFaults, ReportedErrorCarriesMessage) {
    BridgeEvaluator bridge(worker("error"));
    within(20s, [&] {
        try {
            bridge.evaluate(preset_chromosome("baseline"));
            FAIL();
        } catch (const WorkerReportedError& e) {
            EXPECT_NE(std::string(e.what()).find("out of memory"), std::string::npos);
            EXPECT_EQ(e.request_id(), 1);
        }
    });
}

TEST(BridgeFaults, BadHandshakeAndMissingCommand) {
    BridgeEvaluator bad(worker("bad-handshake"));
    within(20s, [&] { EXPECT_THROW(bad.evaluate(preset_chromosome("baseline")), ProtocolError); });
    BridgeEvaluator missing("/nonexistent/worker-binary");
    within(20s, [&] { EXPECT_THROW(missing.evaluate(preset_chromosome("baseline")), WorkerExited); });
}

TEST(BridgeFaults, RestartsAfterFailure) {
    BridgeEvaluator bridge(worker("exit-after", "2"));
    const auto batch = sample(3, 4);
    within(30s, [&] {
        EXPECT_EQ(bridge.evaluate(batch[0]), 0.25);
        EXPECT_EQ(bridge.evaluate(batch[1]), 0.25);
        EXPECT_THROW(bridge.evaluate(batch[2]), WorkerExited);
        // a fresh worker answers again
        EXPECT_EQ(bridge.evaluate(batch[2]), 0.25);
    });
}

TEST(BridgeFaults, SearchSurfacesEvaluatorError) {
    const auto space = build_search_space();
    BridgeEvaluator bridge(worker("error"));
    SearchConfig config;
    config.population_size = 8;
    config.iterations = 3;
    within(30s, [&] { EXPECT_THROW(run_search(config, space, bridge), EvaluatorError); });
}
