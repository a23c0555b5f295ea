#pragma once

// NSGA-II adapted for architecture search: accuracy (maximize) versus MACs
// (minimize), a population that moves from pure random exploration to
// crossover/mutation exploitation on a fixed schedule, and an elitist
// archive truncated by non-dominated sorting and crowding distance.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paretonas/archspace.hpp"
#include "paretonas/evaluators.hpp"
#include "paretonas/rng.hpp"

namespace paretonas {

inline constexpr double kInfiniteCrowding = std::numeric_limits<double>::infinity();

struct Individual {
    Chromosome chromosome;
    double accuracy = 0.0;
    std::int64_t macs = 0;
    std::int64_t params = 0;
    int rank = -1;
    double crowding = 0.0;
};

/// a.accuracy >= b.accuracy and a.macs <= b.macs, one of them strict.
bool dominates(const Individual& a, const Individual& b);

struct SearchConfig {
    int population_size = 64;
    int iterations = 70;
    int tournament_size = 2;
    int mutation_min_spots = 1;
    int mutation_max_spots = 4;
    int crossover_spots = 2;
    std::uint64_t seed = 0;
    int workers = 0; // evaluation threads; 0 = runtime default. Does not affect results.

    friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

/// Throws ArgumentError for P < 4, I < 1 or inconsistent operator settings.
void validate(const SearchConfig& config);

/// Share of each generation produced by crossover + mutation:
/// 0 before iteration 15, (i - 15) / 68.75 afterwards, clamped to [0, 1].
double exploitation_ratio(int iteration);

/// Number of random newcomers in a generation: round((1 - alpha) * P).
int exploration_count(int iteration, int population_size);

/// Fronts as index lists into `population`; front 0 is the non-dominated set.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const Individual> population);

/// Crowding distance per member of `front` (same order). Boundary members of
/// either objective get +inf; a zero objective range contributes 0.
std::vector<double> crowding_distance(std::span<const Individual> front);

/// Sorts, then writes rank and crowding into every individual.
void assign_rank_and_crowding(std::span<Individual> population);

/// Crowded comparison among `entrants`: lower rank, then larger crowding,
/// then a uniform pick among the tied. Returns the winner's position.
std::size_t crowded_winner(std::span<const Individual* const> entrants, RandomStream& rng);

/// Draws `tournament_size` members (distinct while the archive allows) and
/// returns the crowded-comparison winner. Throws StateError when empty.
const Individual& tournament_select(std::span<const Individual> archive, int tournament_size, RandomStream& rng);

std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b,
                                               std::span<const std::size_t> spots);

/// Swaps genes at `spots` distinct uniformly chosen positions.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, RandomStream& rng,
                                            int spots = 2);

/// Resamples k distinct positions (k uniform in [min_spots, max_spots],
/// capped by length) to a value different from the current one.
Chromosome mutate(const Chromosome& g, const SearchSpace& space, RandomStream& rng, int min_spots = 1,
                  int max_spots = 4);

/// Keeps at most `capacity` individuals: whole fronts while they fit, then
/// the cut front by descending crowding distance. Rank and crowding of the
/// result are recomputed on the survivors.
std::vector<Individual> select_survivors(std::vector<Individual> pool, std::size_t capacity);

/// Rank-0 members sorted by (macs asc, accuracy desc, chromosome).
std::vector<Individual> pareto_front(std::span<const Individual> population);

struct EvaluationRecord {
    int iteration = 0;
    Chromosome chromosome;
    double accuracy = 0.0;
    std::int64_t macs = 0;
    std::int64_t params = 0;
    bool cached = false;
};

/// Everything needed to continue a run bit-exactly.
struct SearchState {
    SearchConfig config;
    int completed_iterations = 0;
    std::vector<Individual> archive;
    std::vector<EvaluationRecord> log;
    std::string rng_state;
};

struct SearchResult {
    std::vector<Individual> archive;
    std::vector<EvaluationRecord> log;
    std::size_t evaluator_calls = 0;
    int completed_iterations = 0;
};

struct SearchHooks {
    /// Called after every completed iteration (checkpointing).
    std::function<void(const SearchState&)> on_iteration;
    /// Continue from a checkpointed state instead of starting fresh.
    std::optional<SearchState> resume_from;
    /// Stop after this many completed iterations in total (0 = run all).
    int stop_after = 0;
};

/// Evaluator failures propagate as EvaluatorError subclasses; the state
/// handed to the last on_iteration call stays valid for resuming.
SearchResult run_search(const SearchConfig& config, const SearchSpace& space, AccuracyEvaluator& evaluator,
                        const SearchHooks& hooks = {});

/// `budget` uniform random chromosomes; archive = their Pareto front.
SearchResult random_search(int budget, const SearchSpace& space, AccuracyEvaluator& evaluator, RandomStream& rng,
                           int workers = 0);

struct HypervolumeReference {
    double accuracy = 0.0;
    double macs = 1.0;
};

/// Area dominated by `front` inside the reference box, with MACs normalized
/// by reference.macs. Throws ArgumentError for points outside the box.
double hypervolume(std::span<const Individual> front, const HypervolumeReference& reference);

/// MACs of the all-max-choice architecture; the default normalizer.
std::int64_t max_macs(const SearchSpace& space);

} // namespace paretonas
