#pragma once

// Data-parallel kernels. Every OpenMP kernel has a serial twin with the
// same contract; tests check them against each other and the benchmark
// compares their throughput. Results never depend on the thread count.

#include <functional>
#include <span>
#include <vector>

#include "paretonas/archspace.hpp"
#include "paretonas/costmodel.hpp"

namespace paretonas::kernels {

/// 0 means "let the OpenMP runtime decide".
int resolve_workers(int workers);

struct TauResult {
    double tau = 0.0;
    bool degenerate = false; // one of the vectors is constant
};

/// Kendall tau-b over all pairs. Sizes must match.
TauResult kendall_tau_serial(std::span<const double> x, std::span<const double> y);
TauResult kendall_tau_parallel(std::span<const double> x, std::span<const double> y, int workers = 0);
TauResult kendall_tau(std::span<const double> x, std::span<const double> y);

std::vector<CostSummary> batch_costs_serial(std::span<const Chromosome> batch, const SearchSpace& space);
std::vector<CostSummary> batch_costs_parallel(std::span<const Chromosome> batch, const SearchSpace& space,
                                              int workers = 0);

using ScoreFn = std::function<double(const Chromosome&)>;

/// Applies `fn` to every chromosome. If any call throws, the exception from
/// the lowest index is rethrown after the loop.
std::vector<double> batch_scores_serial(std::span<const Chromosome> batch, const ScoreFn& fn);
std::vector<double> batch_scores_parallel(std::span<const Chromosome> batch, const ScoreFn& fn, int workers = 0);

} // namespace paretonas::kernels
