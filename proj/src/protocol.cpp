#include "paretonas/protocol.hpp"

#include <fmt/format.h>

#include "paretonas/errors.hpp"

namespace paretonas::protocol {

namespace {

nlohmann::json parse_object(std::string_view line) {
    auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw ProtocolError(fmt::format("malformed line: '{}'", line));
    }
    return j;
}

std::optional<std::int64_t> read_id(const nlohmann::json& j) {
    const auto it = j.find("id");
    if (it == j.end() || !it->is_number_integer()) {
        return std::nullopt;
    }
    return it->get<std::int64_t>();
}

} // namespace

std::string format_exact(double value) { return fmt::format("{:.17g}", value); }

std::string handshake_line() {
    return fmt::format(R"({{"protocol":"{}","version":{}}})", kProtocolName, kProtocolVersion);
}

void check_handshake(std::string_view line) {
    const auto j = parse_object(line);
    if (j.value("protocol", std::string{}) != kProtocolName || !j.contains("version") ||
        !j["version"].is_number_integer() || j["version"].get<int>() != kProtocolVersion) {
        throw ProtocolError(fmt::format("unexpected handshake: '{}'", line));
    }
}

std::string serialize_request(const EvalRequest& request) {
    nlohmann::ordered_json j;
    j["id"] = request.id;
    j["chromosome"] = std::vector<int>(request.chromosome.genes().begin(), request.chromosome.genes().end());
    if (request.arch) {
        j["arch"] = *request.arch;
    }
    return j.dump();
}

EvalRequest parse_request(std::string_view line) {
    const auto j = parse_object(line);
    const auto id = read_id(j);
    if (!id) {
        throw ProtocolError(fmt::format("request without integer id: '{}'", line));
    }
    const auto it = j.find("chromosome");
    if (it == j.end() || !it->is_array()) {
        throw ProtocolError(fmt::format("request {} has no chromosome array", *id), id);
    }
    std::vector<int> genes;
    for (const auto& g : *it) {
        if (!g.is_number_integer()) {
            throw ProtocolError(fmt::format("request {} has a non-integer gene", *id), id);
        }
        genes.push_back(g.get<int>());
    }
    EvalRequest request{*id, Chromosome(std::move(genes)), std::nullopt};
    if (const auto a = j.find("arch"); a != j.end()) {
        request.arch = nlohmann::ordered_json::parse(a->dump());
    }
    return request;
}

std::string serialize_response(const EvalResponse& response) {
    std::string out = fmt::format(R"({{"id":{},"accuracy":{})", response.id, format_exact(response.accuracy));
    if (!response.metrics.empty()) {
        out += R"(,"metrics":{)";
        bool first = true;
        for (const auto& [key, value] : response.metrics) {
            out += fmt::format("{}{}:{}", first ? "" : ",", nlohmann::json(key).dump(), format_exact(value));
            first = false;
        }
        out += "}";
    }
    out += "}";
    return out;
}

std::string serialize_failure(const WorkerFailure& failure) {
    nlohmann::ordered_json j;
    j["id"] = failure.id ? nlohmann::ordered_json(*failure.id) : nlohmann::ordered_json(nullptr);
    j["error"] = failure.message;
    return j.dump();
}

Reply parse_reply(std::string_view line) {
    const auto j = parse_object(line);
    const auto id = read_id(j);
    if (const auto e = j.find("error"); e != j.end()) {
        return WorkerFailure{id, e->is_string() ? e->get<std::string>() : e->dump()};
    }
    if (!id) {
        throw ProtocolError(fmt::format("reply without integer id: '{}'", line));
    }
    const auto a = j.find("accuracy");
    if (a == j.end() || !a->is_number()) {
        throw ProtocolError(fmt::format("reply {} has no numeric accuracy", *id), id);
    }
    const double accuracy = a->get<double>();
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
        throw AccuracyRangeError(fmt::format("reply {} has accuracy {} outside [0, 1]", *id, accuracy), id);
    }
    EvalResponse response{*id, accuracy, {}};
    if (const auto m = j.find("metrics"); m != j.end()) {
        if (!m->is_object()) {
            throw ProtocolError(fmt::format("reply {} has non-object metrics", *id), id);
        }
        for (const auto& [key, value] : m->items()) {
            if (!value.is_number()) {
                throw ProtocolError(fmt::format("reply {} metric '{}' is not numeric", *id, key), id);
            }
            response.metrics[key] = value.get<double>();
        }
    }
    return response;
}

} // namespace paretonas::protocol
