#include "paretonas/fairsampler.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "paretonas/errors.hpp"
#include "paretonas/kernels.hpp"

namespace paretonas {

namespace {

int uniform_choice_count(const SearchSpace& space) {
    const int c = space.choice_count(0);
    for (std::size_t l = 1; l < space.num_layers(); ++l) {
        if (space.choice_count(l) != c) {
            throw ValidationError(fmt::format("fair sampling needs equal menus; layer {} has {} choices, layer 1 has {}",
                                              l + 1, space.choice_count(l), c));
        }
    }
    return c;
}

// Salts so the plan and noise streams of one sim do not overlap.
constexpr std::uint64_t kPlanStreamKey = 0x706c616e;
constexpr std::uint64_t kNoiseStreamKey = 0x6e6f6973;

} // namespace

void validate_plan(const SamplingPlan& plan, const SearchSpace& space) {
    const int c = uniform_choice_count(space);
    if (plan.step_models.size() != static_cast<std::size_t>(c)) {
        throw ValidationError(fmt::format("plan has {} models, expected {}", plan.step_models.size(), c));
    }
    for (const auto& model : plan.step_models) {
        validate(model, space);
    }
    for (std::size_t l = 0; l < space.num_layers(); ++l) {
        std::vector<bool> seen(static_cast<std::size_t>(c) + 1, false);
        for (const auto& model : plan.step_models) {
            const auto g = static_cast<std::size_t>(model[l]);
            if (seen[g]) {
                throw ValidationError(fmt::format("plan reuses choice {} at layer {}", g, l + 1));
            }
            seen[g] = true;
        }
    }
}

SamplingPlan sample_plan(const SearchSpace& space, RandomStream& rng) {
    const int c = uniform_choice_count(space);
    const std::size_t layers = space.num_layers();

    // remaining[l] is the shrinking candidate set for layer l.
    std::vector<std::vector<int>> remaining(layers);
    for (auto& r : remaining) {
        for (int g = 1; g <= c; ++g) {
            r.push_back(g);
        }
    }
    SamplingPlan plan;
    plan.step_models.reserve(static_cast<std::size_t>(c));
    for (int step = 0; step < c; ++step) {
        std::vector<int> genes(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            auto& r = remaining[l];
            const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(r.size()) - 1));
            genes[l] = r[pick];
            r.erase(r.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        plan.step_models.emplace_back(std::move(genes));
    }
    return plan;
}

SupernetSim::SupernetSim(const SearchSpace& space, SimConfig config)
    : config_(config),
      latent_(make_latent_tables(space, config.seed).quality),
      plan_rng_(RandomStream::derive(config.seed, kPlanStreamKey)),
      noise_rng_(RandomStream::derive(config.seed, kNoiseStreamKey)) {
    if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0) || config.noise_scale < 0.0) {
        throw ArgumentError("sim config needs 0 < lr <= 1 and noise >= 0");
    }
    for (const auto& row : latent_) {
        learned_.emplace_back(row.size(), 0.0);
        visits_.emplace_back(row.size(), 0);
    }
}

void SupernetSim::set_latent_quality(std::vector<std::vector<double>> q) {
    if (q.size() != latent_.size()) {
        throw ValidationError("latent table layer count mismatch");
    }
    for (std::size_t l = 0; l < q.size(); ++l) {
        if (q[l].size() != latent_[l].size()) {
            throw ValidationError(fmt::format("latent table row {} has wrong width", l + 1));
        }
    }
    latent_ = std::move(q);
}

void SupernetSim::apply_plan(const SamplingPlan& plan) {
    const double lr = config_.learning_rate;
    for (const auto& model : plan.step_models) {
        for (std::size_t l = 0; l < latent_.size(); ++l) {
            const auto c = static_cast<std::size_t>(model[l] - 1);
            const double noise = config_.noise_scale > 0.0 ? config_.noise_scale * noise_rng_.normal() : 0.0;
            learned_[l][c] += lr * ((latent_[l][c] - learned_[l][c]) + noise);
            ++visits_[l][c];
        }
    }
    ++steps_;
}

double SupernetSim::latent_sum(const Chromosome& chromosome) const {
    double total = 0.0;
    for (std::size_t l = 0; l < latent_.size(); ++l) {
        total += latent_[l][static_cast<std::size_t>(chromosome[l] - 1)];
    }
    return total;
}

std::string SupernetSim::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = {{"learning_rate", config_.learning_rate},
                   {"noise_scale", config_.noise_scale},
                   {"seed", config_.seed}};
    j["steps_trained"] = steps_;
    j["latent_quality"] = latent_;
    j["learned_score"] = learned_;
    j["visit_count"] = visits_;
    return j.dump(2);
}

void train_supernet_sim(SupernetSim& sim, const SearchSpace& space, std::int64_t steps) {
    if (steps < 1) {
        throw ArgumentError(fmt::format("steps must be >= 1, got {}", steps));
    }
    if (space.num_layers() != sim.latent_.size()) {
        throw ValidationError("sim and space disagree on layer count");
    }
    for (std::int64_t s = 0; s < steps; ++s) {
        sim.apply_plan(sample_plan(space, sim.plan_rng_));
    }
}

double supernet_evaluate(const SupernetSim& sim, const Chromosome& chromosome) {
    const auto& scores = sim.learned_score();
    if (chromosome.size() != scores.size()) {
        throw ValidationError(
            fmt::format("chromosome has {} genes, sim has {} layers", chromosome.size(), scores.size()));
    }
    double total = 0.0;
    for (std::size_t l = 0; l < scores.size(); ++l) {
        const int g = chromosome[l];
        if (g < 1 || g > static_cast<int>(scores[l].size())) {
            throw ValidationError(fmt::format("gene {} at layer {} is out of range", g, l + 1));
        }
        total += scores[l][static_cast<std::size_t>(g - 1)];
    }
    return logistic(total);
}

RankCorrelation ranking_consistency(const SupernetSim& sim, const SearchSpace& space, std::size_t n_samples,
                                    RandomStream& rng) {
    if (n_samples < 10) {
        throw ArgumentError(fmt::format("ranking_consistency needs >= 10 samples, got {}", n_samples));
    }
    std::vector<double> predicted(n_samples);
    std::vector<double> truth(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const auto g = random_chromosome(space, rng);
        predicted[i] = supernet_evaluate(sim, g);
        truth[i] = sim.latent_sum(g);
    }
    const auto result = kernels::kendall_tau(predicted, truth);
    return {result.tau, result.degenerate};
}

} // namespace paretonas
