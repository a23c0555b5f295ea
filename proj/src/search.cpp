#include "paretonas/search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "paretonas/costmodel.hpp"
#include "paretonas/errors.hpp"
#include "paretonas/kernels.hpp"

namespace paretonas {

bool dominates(const Individual& a, const Individual& b) {
    return a.accuracy >= b.accuracy && a.macs <= b.macs && (a.accuracy > b.accuracy || a.macs < b.macs);
}

void validate(const SearchConfig& c) {
    if (c.population_size < 4) {
        throw ArgumentError(fmt::format("population size must be >= 4, got {}", c.population_size));
    }
    if (c.iterations < 1) {
        throw ArgumentError(fmt::format("iterations must be >= 1, got {}", c.iterations));
    }
    if (c.tournament_size < 1) {
        throw ArgumentError("tournament size must be >= 1");
    }
    if (c.mutation_min_spots < 1 || c.mutation_max_spots < c.mutation_min_spots) {
        throw ArgumentError("mutation spot range must satisfy 1 <= min <= max");
    }
    if (c.crossover_spots < 1) {
        throw ArgumentError("crossover needs at least one spot");
    }
}

double exploitation_ratio(int iteration) {
    if (iteration < 1) {
        throw ArgumentError(fmt::format("iteration must be >= 1, got {}", iteration));
    }
    if (iteration < 15) {
        return 0.0;
    }
    return std::clamp((iteration - 15) / 68.75, 0.0, 1.0);
}

int exploration_count(int iteration, int population_size) {
    return static_cast<int>(std::lround((1.0 - exploitation_ratio(iteration)) * population_size));
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const Individual> population) {
    const std::size_t n = population.size();
    std::vector<std::vector<std::size_t>> dominated_by_me(n);
    std::vector<std::size_t> dominator_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(population[i], population[j])) {
                dominated_by_me[i].push_back(j);
                ++dominator_count[j];
            } else if (dominates(population[j], population[i])) {
                dominated_by_me[j].push_back(i);
                ++dominator_count[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (dominator_count[i] == 0) current.push_back(i);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (const auto p : current) {
            for (const auto q : dominated_by_me[p]) {
                if (--dominator_count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const Individual> front) {
    const std::size_t n = front.size();
    std::vector<double> distance(n, 0.0);
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), kInfiniteCrowding);
        return distance;
    }
    const std::array<std::function<double(const Individual&)>, 2> objectives = {
        [](const Individual& x) { return x.accuracy; },
        [](const Individual& x) { return static_cast<double>(x.macs); },
    };
    std::vector<std::size_t> order(n);
    for (const auto& value : objectives) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return value(front[a]) < value(front[b]); });
        distance[order.front()] = kInfiniteCrowding;
        distance[order.back()] = kInfiniteCrowding;
        const double range = value(front[order.back()]) - value(front[order.front()]);
        if (range <= 0.0) continue;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            distance[order[k]] += (value(front[order[k + 1]]) - value(front[order[k - 1]])) / range;
        }
    }
    return distance;
}

void assign_rank_and_crowding(std::span<Individual> population) {
    const auto fronts = fast_nondominated_sort(population);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        std::vector<Individual> members;
        members.reserve(fronts[r].size());
        for (const auto i : fronts[r]) members.push_back(population[i]);
        const auto d = crowding_distance(members);
        for (std::size_t k = 0; k < fronts[r].size(); ++k) {
            population[fronts[r][k]].rank = static_cast<int>(r);
            population[fronts[r][k]].crowding = d[k];
        }
    }
}

std::size_t crowded_winner(std::span<const Individual* const> entrants, RandomStream& rng) {
    if (entrants.empty()) {
        throw StateError("crowded_winner: no entrants");
    }
    std::vector<std::size_t> best{0};
    for (std::size_t i = 1; i < entrants.size(); ++i) {
        const auto& e = *entrants[i];
        const auto& b = *entrants[best.front()];
        if (e.rank < b.rank || (e.rank == b.rank && e.crowding > b.crowding)) {
            best.assign(1, i);
        } else if (e.rank == b.rank && e.crowding == b.crowding) {
            best.push_back(i);
        }
    }
    if (best.size() == 1) {
        return best.front();
    }
    return best[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(best.size()) - 1))];
}

namespace {

/// k distinct positions out of n, in draw order (partial Fisher-Yates).
std::vector<std::size_t> distinct_positions(std::size_t n, std::size_t k, RandomStream& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i), static_cast<int>(n) - 1));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

} // namespace

const Individual& tournament_select(std::span<const Individual> archive, int tournament_size, RandomStream& rng) {
    if (archive.empty()) {
        throw StateError("tournament_select: archive is empty");
    }
    const auto t = static_cast<std::size_t>(tournament_size);
    std::vector<std::size_t> picks;
    if (archive.size() >= t) {
        picks = distinct_positions(archive.size(), t, rng);
    } else {
        for (std::size_t i = 0; i < t; ++i) {
            picks.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(archive.size()) - 1)));
        }
    }
    std::vector<const Individual*> entrants;
    for (const auto p : picks) entrants.push_back(&archive[p]);
    return *entrants[crowded_winner(entrants, rng)];
}

std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b,
                                               std::span<const std::size_t> spots) {
    if (a.size() != b.size()) {
        throw ValidationError("crossover: parents differ in length");
    }
    Chromosome x = a;
    Chromosome y = b;
    for (const auto s : spots) {
        if (s >= a.size()) {
            throw ArgumentError(fmt::format("crossover spot {} outside chromosome", s + 1));
        }
        std::swap(x[s], y[s]);
    }
    return {std::move(x), std::move(y)};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, RandomStream& rng,
                                            int spots) {
    const auto positions = distinct_positions(a.size(), static_cast<std::size_t>(spots), rng);
    return crossover_at(a, b, positions);
}

Chromosome mutate(const Chromosome& g, const SearchSpace& space, RandomStream& rng, int min_spots, int max_spots) {
    validate(g, space);
    const int k = rng.uniform_int(min_spots, max_spots);
    Chromosome out = g;
    for (const auto s : distinct_positions(g.size(), static_cast<std::size_t>(k), rng)) {
        const int choices = space.choice_count(s);
        if (choices < 2) {
            throw ValidationError(fmt::format("mutate: layer {} has a single choice", s + 1));
        }
        // Uniform over the other choices: skip over the current value.
        int v = rng.uniform_int(1, choices - 1);
        if (v >= out[s]) ++v;
        out[s] = v;
    }
    return out;
}

std::vector<Individual> select_survivors(std::vector<Individual> pool, std::size_t capacity) {
    const auto fronts = fast_nondominated_sort(pool);
    std::vector<Individual> survivors;
    survivors.reserve(std::min(capacity, pool.size()));
    for (const auto& front : fronts) {
        if (survivors.size() + front.size() <= capacity) {
            for (const auto i : front) survivors.push_back(pool[i]);
            continue;
        }
        std::vector<Individual> members;
        for (const auto i : front) members.push_back(pool[i]);
        const auto d = crowding_distance(members);
        std::vector<std::size_t> order(members.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
        for (std::size_t k = 0; survivors.size() < capacity; ++k) {
            survivors.push_back(members[order[k]]);
        }
        break;
    }
    assign_rank_and_crowding(survivors);
    return survivors;
}

std::vector<Individual> pareto_front(std::span<const Individual> population) {
    std::vector<Individual> front;
    const auto fronts = fast_nondominated_sort(population);
    if (fronts.empty()) {
        return front;
    }
    for (const auto i : fronts.front()) front.push_back(population[i]);
    const auto d = crowding_distance(front);
    for (std::size_t k = 0; k < front.size(); ++k) {
        front[k].rank = 0;
        front[k].crowding = d[k];
    }
    std::sort(front.begin(), front.end(), [](const Individual& a, const Individual& b) {
        if (a.macs != b.macs) return a.macs < b.macs;
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.chromosome < b.chromosome;
    });
    return front;
}

namespace {

struct Objectives {
    double accuracy;
    CostSummary cost;
};

/// Evaluates each distinct uncached chromosome once; fills the caches.
class EvaluationCache {
  public:
    EvaluationCache(const SearchSpace& space, AccuracyEvaluator& evaluator, int workers)
        : space_(space), evaluator_(evaluator), workers_(workers) {}

    void seed(const EvaluationRecord& r) { known_.emplace(r.chromosome, Objectives{r.accuracy, {r.params, r.macs}}); }

    std::vector<EvaluationRecord> evaluate(int iteration, std::span<const Chromosome> candidates) {
        std::vector<Chromosome> pending;
        std::unordered_set<Chromosome, ChromosomeHash> pending_set;
        for (const auto& c : candidates) {
            validate(c, space_);
            if (!known_.contains(c) && pending_set.insert(c).second) pending.push_back(c);
        }
        if (!pending.empty()) {
            const auto costs = kernels::batch_costs_parallel(pending, space_, workers_);
            std::vector<double> accuracies;
            try {
                accuracies = evaluator_.evaluate_batch(pending, workers_);
            } catch (const EvaluatorError&) {
                throw;
            } catch (const std::exception& e) {
                throw EvaluatorError(fmt::format("iteration {}: evaluator '{}' failed: {}", iteration,
                                                 evaluator_.name(), e.what()));
            }
            if (accuracies.size() != pending.size()) {
                throw EvaluatorError(fmt::format("iteration {}: evaluator returned {} results for {} requests",
                                                 iteration, accuracies.size(), pending.size()));
            }
            for (std::size_t k = 0; k < pending.size(); ++k) {
                if (!(accuracies[k] >= 0.0 && accuracies[k] <= 1.0)) {
                    throw EvaluatorError(fmt::format("iteration {}: accuracy {} for {} outside [0, 1]", iteration,
                                                     accuracies[k], pending[k].to_string()));
                }
                known_.emplace(pending[k], Objectives{accuracies[k], costs[k]});
            }
            calls_ += pending.size();
        }
        std::unordered_set<Chromosome, ChromosomeHash> fresh(pending.begin(), pending.end());
        std::vector<EvaluationRecord> records;
        records.reserve(candidates.size());
        for (const auto& c : candidates) {
            const auto& o = known_.at(c);
            // Only the first occurrence of a freshly evaluated chromosome counts as a miss.
            const bool cached = fresh.erase(c) == 0;
            records.push_back({iteration, c, o.accuracy, o.cost.macs, o.cost.params, cached});
        }
        return records;
    }

    std::size_t calls() const { return calls_; }

  private:
    const SearchSpace& space_;
    AccuracyEvaluator& evaluator_;
    int workers_;
    std::unordered_map<Chromosome, Objectives, ChromosomeHash> known_;
    std::size_t calls_ = 0;
};

Individual to_individual(const EvaluationRecord& r) {
    return Individual{r.chromosome, r.accuracy, r.macs, r.params, -1, 0.0};
}

bool same_run(SearchConfig a, SearchConfig b) {
    a.workers = b.workers = 0;
    a.iterations = b.iterations = 0;
    return a == b;
}

} // namespace

SearchResult run_search(const SearchConfig& config, const SearchSpace& space, AccuracyEvaluator& evaluator,
                        const SearchHooks& hooks) {
    validate(config);
    const auto P = static_cast<std::size_t>(config.population_size);
    RandomStream rng(config.seed);
    EvaluationCache cache(space, evaluator, config.workers);
    SearchState state;
    state.config = config;

    if (hooks.resume_from) {
        const auto& saved = *hooks.resume_from;
        if (!same_run(saved.config, config)) {
            throw ValidationError("resume: checkpoint was written with a different search configuration");
        }
        state.completed_iterations = saved.completed_iterations;
        state.archive = saved.archive;
        state.log = saved.log;
        rng.load_state(saved.rng_state);
        for (const auto& r : state.log) cache.seed(r);
    }

    const int last = hooks.stop_after > 0 ? std::min(hooks.stop_after, config.iterations) : config.iterations;
    for (int i = state.completed_iterations + 1; i <= last; ++i) {
        const auto n_random = state.archive.empty() ? P : static_cast<std::size_t>(exploration_count(i, config.population_size));
        std::vector<Chromosome> candidates;
        candidates.reserve(P);
        while (candidates.size() < n_random) {
            candidates.push_back(random_chromosome(space, rng));
        }
        while (candidates.size() < P) {
            const auto& a = tournament_select(state.archive, config.tournament_size, rng);
            const auto& b = tournament_select(state.archive, config.tournament_size, rng);
            auto [x, y] = crossover(a.chromosome, b.chromosome, rng, config.crossover_spots);
            candidates.push_back(mutate(x, space, rng, config.mutation_min_spots, config.mutation_max_spots));
            if (candidates.size() < P) {
                candidates.push_back(mutate(y, space, rng, config.mutation_min_spots, config.mutation_max_spots));
            }
        }

        auto records = cache.evaluate(i, candidates);

        // Merge: archive first, then newcomers; a chromosome keeps its first copy.
        std::vector<Individual> pool = state.archive;
        std::unordered_set<Chromosome, ChromosomeHash> present;
        for (const auto& m : pool) present.insert(m.chromosome);
        for (const auto& r : records) {
            if (present.insert(r.chromosome).second) pool.push_back(to_individual(r));
        }
        state.archive = select_survivors(std::move(pool), P);
        state.log.insert(state.log.end(), std::make_move_iterator(records.begin()),
                         std::make_move_iterator(records.end()));
        state.completed_iterations = i;
        state.rng_state = rng.save_state();
        if (hooks.on_iteration) {
            hooks.on_iteration(state);
        }
    }

    return SearchResult{std::move(state.archive), std::move(state.log), cache.calls(), state.completed_iterations};
}

SearchResult random_search(int budget, const SearchSpace& space, AccuracyEvaluator& evaluator, RandomStream& rng,
                           int workers) {
    if (budget < 1) {
        throw ArgumentError(fmt::format("random search budget must be >= 1, got {}", budget));
    }
    std::vector<Chromosome> candidates;
    candidates.reserve(static_cast<std::size_t>(budget));
    for (int k = 0; k < budget; ++k) {
        candidates.push_back(random_chromosome(space, rng));
    }
    EvaluationCache cache(space, evaluator, workers);
    auto records = cache.evaluate(0, candidates);

    std::vector<Individual> pool;
    std::unordered_set<Chromosome, ChromosomeHash> present;
    for (const auto& r : records) {
        if (present.insert(r.chromosome).second) pool.push_back(to_individual(r));
    }
    return SearchResult{pareto_front(pool), std::move(records), cache.calls(), 1};
}

double hypervolume(std::span<const Individual> front, const HypervolumeReference& reference) {
    if (!(reference.macs > 0.0)) {
        throw ArgumentError("hypervolume: reference MACs must be positive");
    }
    std::vector<std::pair<double, double>> points; // (normalized macs, accuracy gain)
    points.reserve(front.size());
    for (const auto& p : front) {
        if (p.accuracy < reference.accuracy || static_cast<double>(p.macs) > reference.macs) {
            throw ArgumentError(fmt::format("hypervolume: point ({}, {}) lies outside the reference box", p.accuracy,
                                            p.macs));
        }
        points.emplace_back(static_cast<double>(p.macs) / reference.macs, p.accuracy - reference.accuracy);
    }
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    // Sweep in increasing cost; only points improving accuracy add area.
    double area = 0.0;
    double best = 0.0;
    std::vector<std::pair<double, double>> steps;
    for (const auto& p : points) {
        if (p.second > best || steps.empty()) {
            if (p.second > best) best = p.second;
            steps.push_back(p);
        }
    }
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const double next = k + 1 < steps.size() ? steps[k + 1].first : 1.0;
        area += steps[k].second * (next - steps[k].first);
    }
    return area;
}

std::int64_t max_macs(const SearchSpace& space) { return flops_objective(max_choice_chromosome(space), space); }

} // namespace paretonas
