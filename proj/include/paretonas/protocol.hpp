#pragma once

// Newline-delimited JSON protocol between the engine and an external
// accuracy worker. One object per line:
//   worker -> engine, once at startup: {"protocol":"paretonas-eval","version":1}
//   engine -> worker:                 {"id":N,"chromosome":[...]}            (+ optional "arch")
//   worker -> engine:                 {"id":N,"accuracy":X}                  (+ optional "metrics")
//                                     {"id":N,"error":"msg"}
// Accuracy is written with 17 significant digits so doubles survive the trip.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "paretonas/archspace.hpp"

namespace paretonas::protocol {

inline constexpr std::string_view kProtocolName = "paretonas-eval";
inline constexpr int kProtocolVersion = 1;

struct EvalRequest {
    std::int64_t id = 0;
    Chromosome chromosome;
    std::optional<nlohmann::ordered_json> arch;

    friend bool operator==(const EvalRequest&, const EvalRequest&) = default;
};

struct EvalResponse {
    std::int64_t id = 0;
    double accuracy = 0.0;
    std::map<std::string, double> metrics;

    friend bool operator==(const EvalResponse&, const EvalResponse&) = default;
};

struct WorkerFailure {
    std::optional<std::int64_t> id;
    std::string message;
};

using Reply = std::variant<EvalResponse, WorkerFailure>;

std::string handshake_line();
/// Throws ProtocolError unless the line is a matching handshake.
void check_handshake(std::string_view line);

std::string serialize_request(const EvalRequest& request);
EvalRequest parse_request(std::string_view line);

std::string serialize_response(const EvalResponse& response);
std::string serialize_failure(const WorkerFailure& failure);

/// Parses a worker line. Throws ProtocolError for malformed lines and
/// AccuracyRangeError (carrying the id) when accuracy is outside [0, 1].
Reply parse_reply(std::string_view line);

/// "%.17g" rendering used on the wire.
std::string format_exact(double value);

} // namespace paretonas::protocol
