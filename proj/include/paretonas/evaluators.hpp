#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "paretonas/archspace.hpp"
#include "paretonas/fairsampler.hpp"
#include "paretonas/latent.hpp"

namespace paretonas {

/// Accuracy objective. Implementations must tolerate concurrent calls to
/// evaluate_batch from the search loop.
class AccuracyEvaluator {
  public:
    virtual ~AccuracyEvaluator() = default;

    virtual double evaluate(const Chromosome& chromosome) = 0;

    /// Default: evaluate() over the batch on `workers` OpenMP threads.
    virtual std::vector<double> evaluate_batch(std::span<const Chromosome> batch, int workers);

    virtual std::string name() const = 0;
};

/// logistic(sum_l q[l][g_l] + sum_l w[l][g_l][g_{l+1}] - 0.08*L), tables from
/// make_latent_tables(space, seed). Summation order: all q terms in layer
/// order, then all w terms in layer order.
double surrogate_accuracy(const Chromosome& chromosome, const LatentTables& tables);

/// Canonical-space convenience form.
double surrogate_accuracy(const Chromosome& chromosome, std::uint64_t seed);

class SurrogateEvaluator final : public AccuracyEvaluator {
  public:
    SurrogateEvaluator(const SearchSpace& space, std::uint64_t seed);

    double evaluate(const Chromosome& chromosome) override;
    std::string name() const override { return "surrogate"; }

  private:
    SearchSpace space_;
    LatentTables tables_;
};

/// Scores candidates with a (trained) supernet simulation.
class SupernetEvaluator final : public AccuracyEvaluator {
  public:
    explicit SupernetEvaluator(SupernetSim sim) : sim_(std::move(sim)) {}

    double evaluate(const Chromosome& chromosome) override { return supernet_evaluate(sim_, chromosome); }
    std::string name() const override { return "supernet"; }

  private:
    SupernetSim sim_;
};

std::unique_ptr<AccuracyEvaluator> supernet_evaluator(SupernetSim sim);

/// Remembers the first accuracy returned per chromosome, so a
/// non-deterministic backend looks pure for the rest of the session.
class PinningEvaluator final : public AccuracyEvaluator {
  public:
    explicit PinningEvaluator(std::unique_ptr<AccuracyEvaluator> inner) : inner_(std::move(inner)) {}

    double evaluate(const Chromosome& chromosome) override;
    std::vector<double> evaluate_batch(std::span<const Chromosome> batch, int workers) override;
    std::string name() const override { return "pinned-" + inner_->name(); }

  private:
    std::unique_ptr<AccuracyEvaluator> inner_;
    std::mutex mutex_;
    std::unordered_map<Chromosome, double, ChromosomeHash> pinned_;
};

struct BridgeOptions {
    std::chrono::milliseconds timeout{30000};
    /// Attach the decoded architecture JSON to each request.
    bool embed_arch = false;
};

/// Talks to a worker process over its stdin/stdout (spawned through
/// /bin/sh -c). Batches are pipelined; replies are matched by id and may
/// arrive in any order. After any failure the worker is restarted on the
/// next call.
class BridgeEvaluator final : public AccuracyEvaluator {
  public:
    BridgeEvaluator(std::string command, BridgeOptions options = {});
    /// Same, with the space used for `embed_arch`.
    BridgeEvaluator(std::string command, SearchSpace space, BridgeOptions options);
    ~BridgeEvaluator() override;

    BridgeEvaluator(const BridgeEvaluator&) = delete;
    BridgeEvaluator& operator=(const BridgeEvaluator&) = delete;

    double evaluate(const Chromosome& chromosome) override;
    std::vector<double> evaluate_batch(std::span<const Chromosome> batch, int workers) override;
    std::string name() const override { return "bridge"; }

    std::int64_t requests_sent() const { return next_id_ - 1; }

  private:
    struct Worker;

    void ensure_started();
    void stop();
    std::vector<double> exchange(std::span<const Chromosome> batch);

    std::string command_;
    std::optional<SearchSpace> space_;
    BridgeOptions options_;
    std::mutex mutex_;
    std::unique_ptr<Worker> worker_;
    std::int64_t next_id_ = 1;
};

std::unique_ptr<AccuracyEvaluator> bridge_evaluator(const std::string& command, std::chrono::milliseconds timeout);

} // namespace paretonas
