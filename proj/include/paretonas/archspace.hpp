#pragma once

// Search space of the unidirectional MobileNetV2-style feature extractor:
// a frozen skeleton (strides, filters, kernel orientation) with a menu of
// block variants (expansion rate x kernel length) per searchable layer.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "paretonas/rng.hpp"

namespace paretonas {

/// Axis the depthwise kernel acts along. FREQ means a k x 1 kernel.
enum class Orientation { Freq, Time };

std::string_view to_string(Orientation o);
Orientation orientation_from_string(std::string_view s);

struct Stride {
    int freq = 1;
    int time = 1;

    bool is_unit() const { return freq == 1 && time == 1; }
    friend bool operator==(const Stride&, const Stride&) = default;
};

struct ChoiceSpec {
    int expansion = 0;
    int kernel = 0;

    friend bool operator==(const ChoiceSpec&, const ChoiceSpec&) = default;
};

struct LayerTemplate {
    int index = 0; // 1-based
    Orientation orientation = Orientation::Freq;
    Stride stride;
    int out_filters = 0;
    std::vector<ChoiceSpec> choices;
};

inline constexpr int kStemKernel = 7;
inline constexpr int kStemFilters = 24;
inline constexpr int kInputFreq = 40;
inline constexpr int kInputTime = 501;
inline constexpr int kInputChannels = 1;
inline constexpr std::size_t kCanonicalLayers = 20;
inline constexpr int kChoicesPerLayer = 6;

class SearchSpace {
  public:
    /// Validates that layer indices run 1..n and every menu is non-empty with
    /// distinct entries.
    explicit SearchSpace(std::vector<LayerTemplate> layers);

    std::size_t num_layers() const { return layers_.size(); }
    const LayerTemplate& layer(std::size_t i) const { return layers_.at(i); }
    std::span<const LayerTemplate> layers() const { return layers_; }

    /// Number of choices on layer position i (0-based).
    int choice_count(std::size_t i) const { return static_cast<int>(layers_.at(i).choices.size()); }

    /// Gene (1-based) selecting `choice` on layer position i, or 0 if absent.
    int gene_for(std::size_t i, const ChoiceSpec& choice) const;

  private:
    std::vector<LayerTemplate> layers_;
};

/// The canonical 20-layer space. Gene mapping is lexicographic over
/// (expansion, kernel): gene = |kernels| * expansion_idx + kernel_idx + 1.
/// Normal layers use expansions (3,6) x kernels (3,5,7); layer 17 uses
/// (3,6,8) x (5,7).
SearchSpace build_search_space();

/// First `n` layers of the canonical skeleton. Toy spaces for tests and demos.
SearchSpace build_prefix_space(std::size_t n);

/// Exact product of menu sizes.
boost::multiprecision::cpp_int space_size(const SearchSpace& space);

class Chromosome {
  public:
    Chromosome() = default;
    explicit Chromosome(std::vector<int> genes) : genes_(std::move(genes)) {}

    std::size_t size() const { return genes_.size(); }
    int operator[](std::size_t i) const { return genes_[i]; }
    int& operator[](std::size_t i) { return genes_[i]; }
    std::span<const int> genes() const { return genes_; }

    /// Dash-joined gene string, e.g. "4-4-...-4".
    std::string to_string() const;
    static Chromosome parse(std::string_view text);

    friend bool operator==(const Chromosome&, const Chromosome&) = default;
    friend auto operator<=>(const Chromosome&, const Chromosome&) = default;

  private:
    std::vector<int> genes_;
};

struct ChromosomeHash {
    std::size_t operator()(const Chromosome& c) const noexcept;
};

/// Throws ValidationError naming the first offending layer (1-based).
void validate(const Chromosome& chromosome, const SearchSpace& space);

struct TensorShape {
    int freq = 0;
    int time = 0;
    int channels = 0;

    friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct StemSpec {
    int kernel_freq = kStemKernel;
    int kernel_time = kStemKernel;
    Stride stride;
    int filters = kStemFilters;

    friend bool operator==(const StemSpec&, const StemSpec&) = default;
};

struct BlockSpec {
    int index = 0;
    Orientation orientation = Orientation::Freq;
    int kernel = 0;
    Stride stride;
    int expansion = 0;
    int in_channels = 0;
    int out_channels = 0;

    friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

struct HeadSpec {
    int global_conv_kernel = 5; // along freq, VALID
    int global_conv_filters = 128;
    int recurrent_hidden = 256;
    int recurrent_levels = 2;
    int pool_size = 4; // pools recurrent features 256 -> 64
    int dense_hidden = 512;
    int num_classes = 9;

    friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

struct ArchDescriptor {
    TensorShape input_shape{kInputFreq, kInputTime, kInputChannels};
    StemSpec stem;
    std::vector<BlockSpec> blocks;
    HeadSpec head;

    friend bool operator==(const ArchDescriptor&, const ArchDescriptor&) = default;
};

ArchDescriptor decode(const Chromosome& chromosome, const SearchSpace& space);

/// Inverse of decode. Throws ValidationError ("not in space") when a block is
/// not on its layer's menu or the skeleton differs from the space.
Chromosome encode(const ArchDescriptor& arch, const SearchSpace& space);

Chromosome random_chromosome(const SearchSpace& space, RandomStream& rng);

/// Named fixtures on the canonical space: "baseline" and "nasc-net".
Chromosome preset_chromosome(std::string_view name);
std::vector<std::string> preset_names();

/// All-max choice per layer (largest expansion, then largest kernel).
Chromosome max_choice_chromosome(const SearchSpace& space);

} // namespace paretonas
