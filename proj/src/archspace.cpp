#include "paretonas/archspace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <tuple>

#include <fmt/format.h>

#include "paretonas/errors.hpp"

namespace paretonas {

namespace {

constexpr std::array<int, kCanonicalLayers> kOutFilters = {32, 32, 32, 48, 48, 48, 64, 64, 64, 80,
                                                            80, 80, 96, 96, 96, 96, 112, 112, 112, 112};

Orientation canonical_orientation(int index) {
    if (index <= 3) return Orientation::Freq;
    if (index <= 6) return Orientation::Time;
    if (index <= 9) return Orientation::Freq;
    if (index <= 12) return Orientation::Time;
    if (index <= 16) return Orientation::Freq;
    return Orientation::Time;
}

Stride canonical_stride(int index) {
    switch (index) {
    case 1:
    case 7:
    case 13:
        return {2, 1};
    case 4:
    case 10:
        return {1, 2};
    case 17:
        return {1, 4};
    default:
        return {1, 1};
    }
}

std::vector<ChoiceSpec> lexicographic_menu(std::initializer_list<int> expansions, std::initializer_list<int> kernels) {
    std::vector<ChoiceSpec> menu;
    for (int e : expansions) {
        for (int k : kernels) {
            menu.push_back({e, k});
        }
    }
    return menu;
}

LayerTemplate canonical_layer(int index) {
    LayerTemplate t;
    t.index = index;
    t.orientation = canonical_orientation(index);
    t.stride = canonical_stride(index);
    t.out_filters = kOutFilters[static_cast<std::size_t>(index - 1)];
    // Layer 17 downsamples time by 4, so its menu trades the short kernel for E8.
    t.choices = index == 17 ? lexicographic_menu({3, 6, 8}, {5, 7}) : lexicographic_menu({3, 6}, {3, 5, 7});
    return t;
}

} // namespace

std::string_view to_string(Orientation o) { return o == Orientation::Freq ? "FREQ" : "TIME"; }

Orientation orientation_from_string(std::string_view s) {
    if (s == "FREQ") return Orientation::Freq;
    if (s == "TIME") return Orientation::Time;
    throw ValidationError(fmt::format("unknown orientation '{}'", s));
}

SearchSpace::SearchSpace(std::vector<LayerTemplate> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) {
        throw ValidationError("search space has no layers");
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& t = layers_[i];
        if (t.index != static_cast<int>(i) + 1) {
            throw ValidationError(fmt::format("layer at position {} has index {}", i + 1, t.index));
        }
        if (t.choices.empty()) {
            throw ValidationError(fmt::format("layer {} has an empty menu", t.index));
        }
        if (t.out_filters < 1 || t.stride.freq < 1 || t.stride.time < 1) {
            throw ValidationError(fmt::format("layer {} has non-positive filters or stride", t.index));
        }
        for (std::size_t a = 0; a < t.choices.size(); ++a) {
            if (t.choices[a].expansion < 1 || t.choices[a].kernel < 1) {
                throw ValidationError(fmt::format("layer {} has a non-positive choice", t.index));
            }
            for (std::size_t b = a + 1; b < t.choices.size(); ++b) {
                if (t.choices[a] == t.choices[b]) {
                    throw ValidationError(fmt::format("layer {} lists a choice twice", t.index));
                }
            }
        }
    }
}

int SearchSpace::gene_for(std::size_t i, const ChoiceSpec& choice) const {
    const auto& menu = layers_.at(i).choices;
    const auto it = std::find(menu.begin(), menu.end(), choice);
    return it == menu.end() ? 0 : static_cast<int>(it - menu.begin()) + 1;
}

SearchSpace build_search_space() { return build_prefix_space(kCanonicalLayers); }

SearchSpace build_prefix_space(std::size_t n) {
    if (n < 1 || n > kCanonicalLayers) {
        throw ArgumentError(fmt::format("prefix space needs 1..{} layers, got {}", kCanonicalLayers, n));
    }
    std::vector<LayerTemplate> layers;
    layers.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        layers.push_back(canonical_layer(static_cast<int>(i)));
    }
    return SearchSpace(std::move(layers));
}

boost::multiprecision::cpp_int space_size(const SearchSpace& space) {
    boost::multiprecision::cpp_int total = 1;
    for (const auto& layer : space.layers()) {
        total *= layer.choices.size();
    }
    return total;
}

std::string Chromosome::to_string() const {
    return fmt::format("{}", fmt::join(genes_, "-"));
}

Chromosome Chromosome::parse(std::string_view text) {
    std::vector<int> genes;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find_first_of("-, ", pos), text.size());
        const auto token = text.substr(pos, end - pos);
        int value = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
            throw ValidationError(fmt::format("malformed chromosome '{}'", text));
        }
        genes.push_back(value);
        pos = end + 1;
    }
    return Chromosome(std::move(genes));
}

std::size_t ChromosomeHash::operator()(const Chromosome& c) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int g : c.genes()) {
        h ^= static_cast<std::uint64_t>(g);
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
}

void validate(const Chromosome& chromosome, const SearchSpace& space) {
    if (chromosome.size() != space.num_layers()) {
        throw ValidationError(
            fmt::format("chromosome has {} genes, space has {} layers", chromosome.size(), space.num_layers()));
    }
    for (std::size_t i = 0; i < chromosome.size(); ++i) {
        const int g = chromosome[i];
        if (g < 1 || g > space.choice_count(i)) {
            throw ValidationError(
                fmt::format("gene {} at layer {} is out of range 1..{}", g, i + 1, space.choice_count(i)));
        }
    }
}

ArchDescriptor decode(const Chromosome& chromosome, const SearchSpace& space) {
    validate(chromosome, space);
    ArchDescriptor arch;
    arch.blocks.reserve(space.num_layers());
    int in_channels = arch.stem.filters;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& t = space.layer(i);
        const auto& choice = t.choices[static_cast<std::size_t>(chromosome[i] - 1)];
        arch.blocks.push_back(BlockSpec{
            .index = t.index,
            .orientation = t.orientation,
            .kernel = choice.kernel,
            .stride = t.stride,
            .expansion = choice.expansion,
            .in_channels = in_channels,
            .out_channels = t.out_filters,
        });
        in_channels = t.out_filters;
    }
    return arch;
}

Chromosome encode(const ArchDescriptor& arch, const SearchSpace& space) {
    if (arch.blocks.size() != space.num_layers()) {
        throw ValidationError(
            fmt::format("not in space: {} blocks for a {}-layer space", arch.blocks.size(), space.num_layers()));
    }
    if (arch.input_shape != TensorShape{kInputFreq, kInputTime, kInputChannels} || arch.stem != StemSpec{} ||
        arch.head != HeadSpec{}) {
        throw ValidationError("not in space: fixed stem, head or input shape differs");
    }
    std::vector<int> genes(space.num_layers());
    int in_channels = arch.stem.filters;
    for (std::size_t i = 0; i < space.num_layers(); ++i) {
        const auto& b = arch.blocks[i];
        const auto& t = space.layer(i);
        if (b.index != t.index || b.orientation != t.orientation || b.stride != t.stride ||
            b.out_channels != t.out_filters || b.in_channels != in_channels) {
            throw ValidationError(fmt::format("not in space: block {} skeleton differs", i + 1));
        }
        const int gene = space.gene_for(i, {b.expansion, b.kernel});
        if (gene == 0) {
            throw ValidationError(
                fmt::format("not in space: (E{}, K{}) at layer {}", b.expansion, b.kernel, t.index));
        }
        genes[i] = gene;
        in_channels = b.out_channels;
    }
    return Chromosome(std::move(genes));
}

Chromosome random_chromosome(const SearchSpace& space, RandomStream& rng) {
    std::vector<int> genes(space.num_layers());
    for (std::size_t i = 0; i < genes.size(); ++i) {
        genes[i] = rng.uniform_int(1, space.choice_count(i));
    }
    return Chromosome(std::move(genes));
}

namespace {

Chromosome from_choices(const std::vector<ChoiceSpec>& blocks) {
    const auto space = build_search_space();
    std::vector<int> genes(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        genes[i] = space.gene_for(i, blocks[i]);
    }
    return Chromosome(std::move(genes));
}

} // namespace

Chromosome preset_chromosome(std::string_view name) {
    if (name == "baseline") {
        std::vector<ChoiceSpec> blocks(kCanonicalLayers, ChoiceSpec{6, 3});
        blocks[16] = {6, 5};
        return from_choices(blocks);
    }
    if (name == "nasc-net") {
        return from_choices({{6, 5}, {6, 7}, {3, 5}, {6, 7}, {6, 5}, {3, 3}, {3, 5}, {3, 7}, {3, 3}, {3, 3},
                             {6, 3}, {3, 5}, {3, 5}, {3, 5}, {3, 3}, {6, 3}, {8, 5}, {3, 3}, {6, 7}, {6, 5}});
    }
    throw ValidationError(fmt::format("unknown preset '{}'", name));
}

std::vector<std::string> preset_names() { return {"baseline", "nasc-net"}; }

Chromosome max_choice_chromosome(const SearchSpace& space) {
    std::vector<int> genes(space.num_layers());
    for (std::size_t i = 0; i < genes.size(); ++i) {
        const auto& menu = space.layer(i).choices;
        const auto it = std::max_element(menu.begin(), menu.end(), [](const ChoiceSpec& a, const ChoiceSpec& b) {
            return std::tie(a.expansion, a.kernel) < std::tie(b.expansion, b.kernel);
        });
        genes[i] = static_cast<int>(it - menu.begin()) + 1;
    }
    return Chromosome(std::move(genes));
}

} // namespace paretonas
