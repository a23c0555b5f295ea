#pragma once

// Parameter and multiply-accumulate counting for a resolved architecture.
//
// Conventions: convolutions are bias-free and followed by batch norm (2
// parameters per channel); dense layers and recurrent gates carry biases.
// MACs: conv K_f*K_t*C_in*C_out*F_out*T_out, depthwise K_f*K_t*C*F_out*T_out,
// dense in*out, recurrent 3*(in*hidden + hidden*hidden) per timestep per
// level. Activations, batch norm at inference, pooling and residual adds
// are free. FLOPs are reported as MACs unless a 2x multiplier is requested.

#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "paretonas/archspace.hpp"

namespace paretonas {

struct LayerCost {
    std::string name;
    std::int64_t params = 0;
    std::int64_t macs = 0;
    TensorShape out_shape;
};

struct CostReport {
    std::int64_t params = 0;
    std::int64_t macs = 0;
    std::vector<LayerCost> per_layer;
};

/// Output shape after every named layer (same order as CostReport::per_layer).
/// Strided layers use SAME padding with ceil division; the global conv is
/// VALID along freq. Throws ShapeError naming the layer on collapse.
std::vector<TensorShape> propagate_shapes(const ArchDescriptor& arch);

CostReport count_cost(const ArchDescriptor& arch);

/// Does the block carry a residual add (unit stride and in == out)?
bool has_residual(const BlockSpec& block);

struct CostSummary {
    std::int64_t params = 0;
    std::int64_t macs = 0;

    friend bool operator==(const CostSummary&, const CostSummary&) = default;
};

/// Memoized chromosome -> cost lookup. Safe for concurrent lookups and inserts.
class CostCache {
  public:
    explicit CostCache(SearchSpace space) : space_(std::move(space)) {}

    CostSummary get(const Chromosome& chromosome);
    std::size_t size() const;
    const SearchSpace& space() const { return space_; }

  private:
    SearchSpace space_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<Chromosome, CostSummary, ChromosomeHash> entries_;
};

/// count_cost(decode(chromosome)).macs.
std::int64_t flops_objective(const Chromosome& chromosome, const SearchSpace& space);
std::int64_t flops_objective(const Chromosome& chromosome, CostCache& cache);

std::string format_cost_table(const CostReport& report, int flops_multiplier = 1);
std::string cost_report_json(const CostReport& report, int flops_multiplier = 1);

} // namespace paretonas
