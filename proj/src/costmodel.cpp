#include "paretonas/costmodel.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "paretonas/errors.hpp"

namespace paretonas {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

std::int64_t bn_params(int channels) { return 2LL * channels; }

class CostBuilder {
  public:
    explicit CostBuilder(TensorShape input) : shape_(input) {}

    const TensorShape& shape() const { return shape_; }

    void add(std::string name, std::int64_t params, std::int64_t macs, TensorShape out) {
        if (out.freq < 1 || out.time < 1 || out.channels < 1) {
            throw ShapeError(fmt::format("layer {} produces non-positive shape ({}, {}, {})", name, out.freq,
                                         out.time, out.channels));
        }
        report_.params += params;
        report_.macs += macs;
        report_.per_layer.push_back({std::move(name), params, macs, out});
        shape_ = out;
    }

    CostReport take() { return std::move(report_); }

  private:
    TensorShape shape_;
    CostReport report_;
};

std::string block_name(int index) { return fmt::format("block{:02d}", index); }

void add_block(CostBuilder& b, const BlockSpec& block) {
    const TensorShape in = b.shape();
    if (in.channels != block.in_channels) {
        throw ShapeError(fmt::format("layer {} expects {} input channels, got {}", block_name(block.index),
                                     block.in_channels, in.channels));
    }
    const std::int64_t c_in = block.in_channels;
    const std::int64_t hidden = c_in * block.expansion;
    const std::int64_t c_out = block.out_channels;
    const TensorShape out{ceil_div(in.freq, block.stride.freq), ceil_div(in.time, block.stride.time),
                          block.out_channels};
    const std::int64_t in_area = static_cast<std::int64_t>(in.freq) * in.time;
    const std::int64_t out_area = static_cast<std::int64_t>(out.freq) * out.time;

    // 1x1 expand, k-tap depthwise (stride applied here), 1x1 project.
    const std::int64_t params = c_in * hidden + bn_params(static_cast<int>(hidden)) + block.kernel * hidden +
                                bn_params(static_cast<int>(hidden)) + hidden * c_out +
                                bn_params(block.out_channels);
    const std::int64_t macs = c_in * hidden * in_area + block.kernel * hidden * out_area + hidden * c_out * out_area;
    b.add(block_name(block.index), params, macs, out);
}

} // namespace

bool has_residual(const BlockSpec& block) {
    return block.stride.is_unit() && block.in_channels == block.out_channels;
}

CostReport count_cost(const ArchDescriptor& arch) {
    const auto& in = arch.input_shape;
    if (in.freq < 1 || in.time < 1 || in.channels < 1) {
        throw ShapeError("input shape must be positive");
    }
    CostBuilder b(in);

    const auto& stem = arch.stem;
    const TensorShape stem_out{ceil_div(in.freq, stem.stride.freq), ceil_div(in.time, stem.stride.time),
                               stem.filters};
    const std::int64_t stem_taps = static_cast<std::int64_t>(stem.kernel_freq) * stem.kernel_time;
    b.add("stem", stem_taps * in.channels * stem.filters + bn_params(stem.filters),
          stem_taps * in.channels * stem.filters * stem_out.freq * stem_out.time, stem_out);

    for (const auto& block : arch.blocks) {
        add_block(b, block);
    }

    const auto& head = arch.head;
    const TensorShape fe = b.shape();
    const TensorShape conv_out{fe.freq - head.global_conv_kernel + 1, fe.time, head.global_conv_filters};
    b.add("global_conv",
          static_cast<std::int64_t>(head.global_conv_kernel) * fe.channels * head.global_conv_filters +
              bn_params(head.global_conv_filters),
          static_cast<std::int64_t>(head.global_conv_kernel) * fe.channels * head.global_conv_filters *
              std::max(conv_out.freq, 0) * conv_out.time,
          conv_out);

    // Remaining freq rows are flattened into the per-timestep feature vector.
    const std::int64_t steps = conv_out.time;
    std::int64_t features = static_cast<std::int64_t>(conv_out.freq) * conv_out.channels;
    const std::int64_t hidden = head.recurrent_hidden;
    for (int level = 1; level <= head.recurrent_levels; ++level) {
        const std::int64_t weights = 3 * (features * hidden + hidden * hidden);
        b.add(fmt::format("gru{}", level), weights + 2 * 3 * hidden, weights * steps,
              {1, static_cast<int>(steps), static_cast<int>(hidden)});
        features = hidden;
    }

    const int pooled = ceil_div(static_cast<int>(features), head.pool_size);
    b.add("maxpool", 0, 0, {1, static_cast<int>(steps), pooled});

    const std::int64_t flat = steps * pooled;
    b.add("fc1", flat * head.dense_hidden + head.dense_hidden, flat * head.dense_hidden, {1, 1, head.dense_hidden});
    b.add("fc2", static_cast<std::int64_t>(head.dense_hidden) * head.num_classes + head.num_classes,
          static_cast<std::int64_t>(head.dense_hidden) * head.num_classes, {1, 1, head.num_classes});
    return b.take();
}

std::vector<TensorShape> propagate_shapes(const ArchDescriptor& arch) {
    const auto report = count_cost(arch);
    std::vector<TensorShape> shapes;
    shapes.reserve(report.per_layer.size());
    for (const auto& layer : report.per_layer) {
        shapes.push_back(layer.out_shape);
    }
    return shapes;
}

CostSummary CostCache::get(const Chromosome& chromosome) {
    {
        std::shared_lock lock(mutex_);
        if (const auto it = entries_.find(chromosome); it != entries_.end()) {
            return it->second;
        }
    }
    const auto report = count_cost(decode(chromosome, space_));
    const CostSummary summary{report.params, report.macs};
    std::unique_lock lock(mutex_);
    entries_.emplace(chromosome, summary);
    return summary;
}

std::size_t CostCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::int64_t flops_objective(const Chromosome& chromosome, const SearchSpace& space) {
    return count_cost(decode(chromosome, space)).macs;
}

std::int64_t flops_objective(const Chromosome& chromosome, CostCache& cache) { return cache.get(chromosome).macs; }

std::string format_cost_table(const CostReport& report, int flops_multiplier) {
    const char* unit = flops_multiplier == 1 ? "MACs" : "FLOPs";
    std::string out = fmt::format("{:<12} {:>12} {:>16}  {}\n", "layer", "params", unit, "out (F, T, C)");
    for (const auto& l : report.per_layer) {
        out += fmt::format("{:<12} {:>12} {:>16}  ({}, {}, {})\n", l.name, l.params, l.macs * flops_multiplier,
                           l.out_shape.freq, l.out_shape.time, l.out_shape.channels);
    }
    out += fmt::format("Params (M): {:.2f}\n", static_cast<double>(report.params) / 1e6);
    out += fmt::format("FLOPs (G):  {:.2f}\n", static_cast<double>(report.macs * flops_multiplier) / 1e9);
    return out;
}

std::string cost_report_json(const CostReport& report, int flops_multiplier) {
    nlohmann::ordered_json j;
    j["params"] = report.params;
    j["macs"] = report.macs;
    j["flops"] = report.macs * flops_multiplier;
    j["flops_multiplier"] = flops_multiplier;
    auto& layers = j["per_layer"] = nlohmann::ordered_json::array();
    for (const auto& l : report.per_layer) {
        layers.push_back({{"name", l.name},
                          {"params", l.params},
                          {"macs", l.macs},
                          {"out_shape", {l.out_shape.freq, l.out_shape.time, l.out_shape.channels}}});
    }
    return j.dump(2);
}

} // namespace paretonas
