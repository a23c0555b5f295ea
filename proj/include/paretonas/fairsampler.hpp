#pragma once

// Strict-fairness supernet sampling and a tabular stand-in for supernet
// training.
//
// Each mini-batch step samples C models without replacement per layer, so
// every choice block on every layer is trained exactly once per step. The
// simulation replaces weights by one learned score per (layer, choice) that
// is pulled towards a hidden latent quality.

#include <cstdint>
#include <string>
#include <vector>

#include "paretonas/archspace.hpp"
#include "paretonas/latent.hpp"
#include "paretonas/rng.hpp"

namespace paretonas {

struct SamplingPlan {
    std::vector<Chromosome> step_models;
};

/// Throws ValidationError if some layer's genes across the plan are not a
/// permutation of 1..C.
void validate_plan(const SamplingPlan& plan, const SearchSpace& space);

/// Requires every layer to offer the same number of choices C; returns C models.
SamplingPlan sample_plan(const SearchSpace& space, RandomStream& rng);

struct SimConfig {
    double learning_rate = 0.1;
    double noise_scale = 0.05;
    std::uint64_t seed = 0;
};

class SupernetSim {
  public:
    SupernetSim(const SearchSpace& space, SimConfig config);

    const SimConfig& config() const { return config_; }
    const std::vector<std::vector<double>>& latent_quality() const { return latent_; }
    const std::vector<std::vector<double>>& learned_score() const { return learned_; }
    const std::vector<std::vector<std::int64_t>>& visit_count() const { return visits_; }
    std::int64_t steps_trained() const { return steps_; }

    /// Overrides the hidden quality table (tests and toy problems).
    void set_latent_quality(std::vector<std::vector<double>> q);

    /// One mini-batch step given an already drawn plan.
    void apply_plan(const SamplingPlan& plan);

    /// Sum of latent quality along the chromosome's blocks.
    double latent_sum(const Chromosome& chromosome) const;

    std::string to_json() const;

  private:
    friend void train_supernet_sim(SupernetSim&, const SearchSpace&, std::int64_t);

    SimConfig config_;
    std::vector<std::vector<double>> latent_;
    std::vector<std::vector<double>> learned_;
    std::vector<std::vector<std::int64_t>> visits_;
    RandomStream plan_rng_;
    RandomStream noise_rng_;
    std::int64_t steps_ = 0;
};

/// s <- s + lr*((q - s) + noise_scale*N(0,1)) for every block of every model
/// in each of `steps` freshly drawn plans. Throws ArgumentError if steps < 1.
void train_supernet_sim(SupernetSim& sim, const SearchSpace& space, std::int64_t steps);

/// logistic(sum of learned scores). Throws ValidationError for bad genes.
double supernet_evaluate(const SupernetSim& sim, const Chromosome& chromosome);

struct RankCorrelation {
    double tau = 0.0;
    bool degenerate = false;
};

/// Kendall tau-b between supernet scores and latent sums over n random
/// chromosomes. n_samples must be >= 10.
RankCorrelation ranking_consistency(const SupernetSim& sim, const SearchSpace& space, std::size_t n_samples,
                                    RandomStream& rng);

} // namespace paretonas
