#include "paretonas/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <exception>

#include <omp.h>

#include "paretonas/errors.hpp"

namespace paretonas::kernels {

namespace {

struct PairCounts {
    std::int64_t concordant = 0;
    std::int64_t discordant = 0;
    std::int64_t ties_x = 0;
    std::int64_t ties_y = 0;
};

void count_row(std::span<const double> x, std::span<const double> y, std::size_t i, PairCounts& c) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
        const double dx = x[i] - x[j];
        const double dy = y[i] - y[j];
        if (dx == 0.0) ++c.ties_x;
        if (dy == 0.0) ++c.ties_y;
        if (dx == 0.0 || dy == 0.0) continue;
        if ((dx > 0.0) == (dy > 0.0)) {
            ++c.concordant;
        } else {
            ++c.discordant;
        }
    }
}

TauResult finish(const PairCounts& c, std::size_t n) {
    const auto pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const auto ax = pairs - c.ties_x;
    const auto ay = pairs - c.ties_y;
    if (ax == 0 || ay == 0) {
        return {0.0, true};
    }
    return {static_cast<double>(c.concordant - c.discordant) / std::sqrt(static_cast<double>(ax) * static_cast<double>(ay)),
            false};
}

void check_sizes(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ArgumentError("kendall_tau: vectors differ in length");
    }
    if (x.size() < 2) {
        throw ArgumentError("kendall_tau: need at least two observations");
    }
}

template <typename Body>
void parallel_for_collect(std::size_t n, int workers, Body body) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(resolve_workers(workers))
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

TauResult kendall_tau_serial(std::span<const double> x, std::span<const double> y) {
    check_sizes(x, y);
    PairCounts c;
    for (std::size_t i = 0; i < x.size(); ++i) {
        count_row(x, y, i, c);
    }
    return finish(c, x.size());
}

TauResult kendall_tau_parallel(std::span<const double> x, std::span<const double> y, int workers) {
    check_sizes(x, y);
    std::int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(resolve_workers(workers)) \
    reduction(+ : concordant, discordant, ties_x, ties_y)
    for (std::int64_t i = 0; i < n; ++i) {
        PairCounts row;
        count_row(x, y, static_cast<std::size_t>(i), row);
        concordant += row.concordant;
        discordant += row.discordant;
        ties_x += row.ties_x;
        ties_y += row.ties_y;
    }
    return finish({concordant, discordant, ties_x, ties_y}, x.size());
}

TauResult kendall_tau(std::span<const double> x, std::span<const double> y) {
    // Below a few hundred points the thread start-up dominates.
    return x.size() < 512 ? kendall_tau_serial(x, y) : kendall_tau_parallel(x, y);
}

std::vector<CostSummary> batch_costs_serial(std::span<const Chromosome> batch, const SearchSpace& space) {
    std::vector<CostSummary> out;
    out.reserve(batch.size());
    for (const auto& g : batch) {
        const auto r = count_cost(decode(g, space));
        out.push_back({r.params, r.macs});
    }
    return out;
}

std::vector<CostSummary> batch_costs_parallel(std::span<const Chromosome> batch, const SearchSpace& space,
                                              int workers) {
    std::vector<CostSummary> out(batch.size());
    parallel_for_collect(batch.size(), workers, [&](std::size_t i) {
        const auto r = count_cost(decode(batch[i], space));
        out[i] = {r.params, r.macs};
    });
    return out;
}

std::vector<double> batch_scores_serial(std::span<const Chromosome> batch, const ScoreFn& fn) {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& g : batch) {
        out.push_back(fn(g));
    }
    return out;
}

std::vector<double> batch_scores_parallel(std::span<const Chromosome> batch, const ScoreFn& fn, int workers) {
    std::vector<double> out(batch.size());
    parallel_for_collect(batch.size(), workers, [&](std::size_t i) { out[i] = fn(batch[i]); });
    return out;
}

} // namespace paretonas::kernels
