#include "paretonas/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "paretonas/errors.hpp"
#include "paretonas/protocol.hpp"

namespace paretonas {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json stride_json(const Stride& s) { return ordered_json::array({s.freq, s.time}); }

template <typename T>
T field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ValidationError(fmt::format("missing field '{}'", key));
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(fmt::format("field '{}' has the wrong type", key));
    }
}

Stride stride_from(const json& j, const char* key) {
    const auto v = field<std::vector<int>>(j, key);
    if (v.size() != 2) {
        throw ValidationError(fmt::format("field '{}' must be [freq, time]", key));
    }
    return {v[0], v[1]};
}

std::string crowding_text(double c) { return std::isinf(c) ? "inf" : protocol::format_exact(c); }

double parse_double(std::string_view s, std::size_t line) {
    if (s == "inf") return kInfiniteCrowding;
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(fmt::format("line {}: '{}' is not a number", line, s));
    }
}

template <typename Int>
Int parse_int(std::string_view s, std::size_t line) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ValidationError(fmt::format("line {}: '{}' is not an integer", line, s));
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto end = line.find(sep, pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return out;
}

ordered_json individual_json(const Individual& m) {
    return {{"chromosome", std::vector<int>(m.chromosome.genes().begin(), m.chromosome.genes().end())},
            {"accuracy", m.accuracy},
            {"macs", m.macs},
            {"params", m.params},
            {"rank", m.rank},
            {"crowding", std::isinf(m.crowding) ? ordered_json("inf") : ordered_json(m.crowding)}};
}

Individual individual_from(const json& j) {
    Individual m;
    m.chromosome = Chromosome(field<std::vector<int>>(j, "chromosome"));
    m.accuracy = field<double>(j, "accuracy");
    m.macs = field<std::int64_t>(j, "macs");
    m.params = field<std::int64_t>(j, "params");
    m.rank = field<int>(j, "rank");
    const auto& c = j.at("crowding");
    m.crowding = c.is_string() ? kInfiniteCrowding : c.get<double>();
    return m;
}

} // namespace

ordered_json arch_to_json(const ArchDescriptor& arch) {
    ordered_json j;
    j["schema_version"] = kArchSchemaVersion;
    j["input_shape"] = {arch.input_shape.freq, arch.input_shape.time, arch.input_shape.channels};
    j["stem"] = {{"kernel", {arch.stem.kernel_freq, arch.stem.kernel_time}},
                 {"stride", stride_json(arch.stem.stride)},
                 {"filters", arch.stem.filters}};
    auto& blocks = j["blocks"] = ordered_json::array();
    for (const auto& b : arch.blocks) {
        blocks.push_back({{"index", b.index},
                          {"orientation", std::string(to_string(b.orientation))},
                          {"kernel", b.kernel},
                          {"stride", stride_json(b.stride)},
                          {"expansion", b.expansion},
                          {"in_ch", b.in_channels},
                          {"out_ch", b.out_channels}});
    }
    const auto& h = arch.head;
    j["head"] = {{"global_conv", {{"kernel", {h.global_conv_kernel, 1}}, {"filters", h.global_conv_filters}}},
                 {"recurrent", {{"type", "GRU"}, {"levels", h.recurrent_levels}, {"hidden", h.recurrent_hidden}}},
                 {"feature_pool", h.pool_size},
                 {"dense", {h.dense_hidden, h.num_classes}}};
    return j;
}

ArchDescriptor arch_from_json(const json& j) {
    if (!j.is_object()) {
        throw ValidationError("architecture document must be a JSON object");
    }
    if (field<int>(j, "schema_version") != kArchSchemaVersion) {
        throw ValidationError("unsupported architecture schema_version");
    }
    ArchDescriptor arch;
    const auto shape = field<std::vector<int>>(j, "input_shape");
    if (shape.size() != 3) {
        throw ValidationError("input_shape must be [freq, time, channels]");
    }
    arch.input_shape = {shape[0], shape[1], shape[2]};

    const auto& stem = j.at("stem");
    const auto kernel = field<std::vector<int>>(stem, "kernel");
    if (kernel.size() != 2) {
        throw ValidationError("stem.kernel must be [freq, time]");
    }
    arch.stem = {kernel[0], kernel[1], stride_from(stem, "stride"), field<int>(stem, "filters")};

    for (const auto& b : field<json>(j, "blocks")) {
        arch.blocks.push_back(BlockSpec{
            .index = field<int>(b, "index"),
            .orientation = orientation_from_string(field<std::string>(b, "orientation")),
            .kernel = field<int>(b, "kernel"),
            .stride = stride_from(b, "stride"),
            .expansion = field<int>(b, "expansion"),
            .in_channels = field<int>(b, "in_ch"),
            .out_channels = field<int>(b, "out_ch"),
        });
    }

    const auto& h = j.at("head");
    const auto& gc = h.at("global_conv");
    arch.head.global_conv_kernel = field<std::vector<int>>(gc, "kernel").at(0);
    arch.head.global_conv_filters = field<int>(gc, "filters");
    arch.head.recurrent_levels = field<int>(h.at("recurrent"), "levels");
    arch.head.recurrent_hidden = field<int>(h.at("recurrent"), "hidden");
    arch.head.pool_size = field<int>(h, "feature_pool");
    const auto dense = field<std::vector<int>>(h, "dense");
    if (dense.size() != 2) {
        throw ValidationError("head.dense must be [hidden, classes]");
    }
    arch.head.dense_hidden = dense[0];
    arch.head.num_classes = dense[1];
    return arch;
}

ordered_json plan_to_json(const SamplingPlan& plan) {
    ordered_json j;
    auto& models = j["step_models"] = ordered_json::array();
    for (const auto& m : plan.step_models) {
        models.push_back(std::vector<int>(m.genes().begin(), m.genes().end()));
    }
    return j;
}

ordered_json config_to_json(const SearchConfig& c) {
    return {{"population_size", c.population_size},
            {"iterations", c.iterations},
            {"tournament_size", c.tournament_size},
            {"mutation_spots", {c.mutation_min_spots, c.mutation_max_spots}},
            {"crossover_spots", c.crossover_spots},
            {"seed", c.seed}};
}

SearchConfig config_from_json(const json& j, SearchConfig c) {
    if (!j.is_object()) {
        throw ValidationError("search config must be a JSON object");
    }
    if (j.contains("population_size")) c.population_size = field<int>(j, "population_size");
    if (j.contains("iterations")) c.iterations = field<int>(j, "iterations");
    if (j.contains("tournament_size")) c.tournament_size = field<int>(j, "tournament_size");
    if (j.contains("mutation_spots")) {
        const auto r = field<std::vector<int>>(j, "mutation_spots");
        if (r.size() != 2) throw ValidationError("mutation_spots must be [min, max]");
        c.mutation_min_spots = r[0];
        c.mutation_max_spots = r[1];
    }
    if (j.contains("crossover_spots")) c.crossover_spots = field<int>(j, "crossover_spots");
    if (j.contains("seed")) c.seed = field<std::uint64_t>(j, "seed");
    return c;
}

std::uint64_t log_digest(std::span<const EvaluationRecord> log) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& r : log) {
        const auto row = fmt::format("{},{},{},{},{},{}\n", r.iteration, r.chromosome.to_string(),
                                     protocol::format_exact(r.accuracy), r.macs, r.params, r.cached ? 1 : 0);
        for (const unsigned char ch : row) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

ordered_json checkpoint_to_json(const SearchState& s) {
    ordered_json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["config"] = config_to_json(s.config);
    j["iteration"] = s.completed_iterations;
    auto& archive = j["archive"] = ordered_json::array();
    for (const auto& m : s.archive) archive.push_back(individual_json(m));
    j["log_digest"] = fmt::format("{:016x}", log_digest(s.log));
    auto& log = j["log"] = ordered_json::array();
    for (const auto& r : s.log) {
        log.push_back(ordered_json::array(
            {r.iteration, std::vector<int>(r.chromosome.genes().begin(), r.chromosome.genes().end()), r.accuracy,
             r.macs, r.params, r.cached}));
    }
    j["rng_state"] = s.rng_state;
    return j;
}

SearchState checkpoint_from_json(const json& j) {
    if (!j.is_object() || field<int>(j, "schema_version") != kCheckpointSchemaVersion) {
        throw ValidationError("unsupported checkpoint schema");
    }
    SearchState s;
    s.config = config_from_json(field<json>(j, "config"));
    s.completed_iterations = field<int>(j, "iteration");
    for (const auto& m : field<json>(j, "archive")) s.archive.push_back(individual_from(m));
    try {
        for (const auto& row : field<json>(j, "log")) {
            s.log.push_back({row.at(0).get<int>(), Chromosome(row.at(1).get<std::vector<int>>()),
                             row.at(2).get<double>(), row.at(3).get<std::int64_t>(), row.at(4).get<std::int64_t>(),
                             row.at(5).get<bool>()});
        }
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("checkpoint log row is malformed: {}", e.what()));
    }
    if (field<std::string>(j, "log_digest") != fmt::format("{:016x}", log_digest(s.log))) {
        throw ValidationError("checkpoint log digest mismatch");
    }
    s.rng_state = field<std::string>(j, "rng_state");
    return s;
}

std::string front_csv(std::span<const Individual> front) {
    std::string out = "chromosome,accuracy,macs,params,rank,crowding\n";
    for (const auto& m : front) {
        out += fmt::format("{},{},{},{},{},{}\n", m.chromosome.to_string(), protocol::format_exact(m.accuracy), m.macs,
                           m.params, m.rank, crowding_text(m.crowding));
    }
    return out;
}

std::vector<Individual> parse_front_csv(std::string_view text) {
    std::vector<Individual> out;
    std::size_t line_no = 0;
    bool header = true;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (header) {
            if (line != "chromosome,accuracy,macs,params,rank,crowding") {
                throw ValidationError(fmt::format("line {}: unexpected front CSV header", line_no));
            }
            header = false;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 6) {
            throw ValidationError(fmt::format("line {}: expected 6 columns, got {}", line_no, cols.size()));
        }
        Individual m;
        m.chromosome = Chromosome::parse(cols[0]);
        m.accuracy = parse_double(cols[1], line_no);
        m.macs = parse_int<std::int64_t>(cols[2], line_no);
        m.params = parse_int<std::int64_t>(cols[3], line_no);
        m.rank = parse_int<int>(cols[4], line_no);
        m.crowding = parse_double(cols[5], line_no);
        out.push_back(std::move(m));
    }
    if (header) {
        throw ValidationError("front CSV is empty");
    }
    return out;
}

std::string scatter_csv(std::span<const EvaluationRecord> log) {
    std::string out = "iteration,accuracy,macs\n";
    for (const auto& r : log) {
        out += fmt::format("{},{},{}\n", r.iteration, protocol::format_exact(r.accuracy), r.macs);
    }
    return out;
}

std::string log_csv(std::span<const EvaluationRecord> log) {
    std::string out = "iteration,chromosome,accuracy,macs,params,cached\n";
    for (const auto& r : log) {
        out += fmt::format("{},{},{},{},{},{}\n", r.iteration, r.chromosome.to_string(),
                           protocol::format_exact(r.accuracy), r.macs, r.params, r.cached ? 1 : 0);
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(fmt::format("file not found: {}", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
        }
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) {
            throw std::runtime_error(fmt::format("write failed for {}", tmp.string()));
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace paretonas
