#include "paretonas/evaluators.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "paretonas/errors.hpp"
#include "paretonas/kernels.hpp"
#include "paretonas/protocol.hpp"
#include "paretonas/serialize.hpp"

extern char** environ;

namespace paretonas {

std::vector<double> AccuracyEvaluator::evaluate_batch(std::span<const Chromosome> batch, int workers) {
    return kernels::batch_scores_parallel(batch, [this](const Chromosome& g) { return evaluate(g); }, workers);
}

double surrogate_accuracy(const Chromosome& chromosome, const LatentTables& tables) {
    const std::size_t layers = tables.quality.size();
    double total = 0.0;
    for (std::size_t l = 0; l < layers; ++l) {
        total += tables.quality[l][static_cast<std::size_t>(chromosome[l] - 1)];
    }
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        total += tables.interaction[l][static_cast<std::size_t>(chromosome[l] - 1)]
                                      [static_cast<std::size_t>(chromosome[l + 1] - 1)];
    }
    return logistic(total - kLatentNoise * static_cast<double>(layers));
}

double surrogate_accuracy(const Chromosome& chromosome, std::uint64_t seed) {
    const auto space = build_search_space();
    validate(chromosome, space);
    return surrogate_accuracy(chromosome, make_latent_tables(space, seed));
}

SurrogateEvaluator::SurrogateEvaluator(const SearchSpace& space, std::uint64_t seed)
    : space_(space), tables_(make_latent_tables(space, seed)) {}

double SurrogateEvaluator::evaluate(const Chromosome& chromosome) {
    validate(chromosome, space_);
    return surrogate_accuracy(chromosome, tables_);
}

std::unique_ptr<AccuracyEvaluator> supernet_evaluator(SupernetSim sim) {
    return std::make_unique<SupernetEvaluator>(std::move(sim));
}

double PinningEvaluator::evaluate(const Chromosome& chromosome) {
    {
        std::lock_guard lock(mutex_);
        if (const auto it = pinned_.find(chromosome); it != pinned_.end()) {
            return it->second;
        }
    }
    const double value = inner_->evaluate(chromosome);
    std::lock_guard lock(mutex_);
    return pinned_.emplace(chromosome, value).first->second;
}

std::vector<double> PinningEvaluator::evaluate_batch(std::span<const Chromosome> batch, int workers) {
    std::vector<double> out(batch.size());
    std::vector<Chromosome> missing;
    // position in `missing` for each batch entry not yet pinned
    std::unordered_map<Chromosome, std::size_t, ChromosomeHash> slot;
    std::vector<std::pair<std::size_t, std::size_t>> fill;
    {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (const auto it = pinned_.find(batch[i]); it != pinned_.end()) {
                out[i] = it->second;
                continue;
            }
            const auto [s, added] = slot.emplace(batch[i], missing.size());
            if (added) missing.push_back(batch[i]);
            fill.emplace_back(i, s->second);
        }
    }
    if (missing.empty()) {
        return out;
    }
    const auto fresh = inner_->evaluate_batch(missing, workers);
    std::lock_guard lock(mutex_);
    std::vector<double> kept(missing.size());
    for (std::size_t k = 0; k < missing.size(); ++k) {
        kept[k] = pinned_.emplace(missing[k], fresh[k]).first->second;
    }
    for (const auto& [i, k] : fill) out[i] = kept[k];
    return out;
}

// ---------------------------------------------------------------------------
// Bridge

struct BridgeEvaluator::Worker {
    pid_t pid = -1;
    int fd = -1;
    std::string buffer;
    bool eof = false;

    /// Reads until a full line is buffered or the deadline passes.
    std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline) {
        while (true) {
            if (const auto nl = buffer.find('\n'); nl != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                return line;
            }
            if (eof) {
                return std::nullopt;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                                                    std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                throw EvaluatorTimeout("bridge: timed out waiting for the worker");
            }
            pollfd p{fd, POLLIN, 0};
            const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
            if (rc < 0 && errno != EINTR) {
                throw EvaluatorError(fmt::format("bridge: poll failed: {}", std::strerror(errno)));
            }
            if (rc > 0) {
                fill();
            }
        }
    }

    void fill() {
        char chunk[4096];
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, MSG_DONTWAIT);
        if (n > 0) {
            buffer.append(chunk, static_cast<std::size_t>(n));
        } else if (n == 0) {
            eof = true;
        } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
            eof = true;
        }
    }
};

BridgeEvaluator::BridgeEvaluator(std::string command, BridgeOptions options)
    : command_(std::move(command)), options_(options) {}

BridgeEvaluator::BridgeEvaluator(std::string command, SearchSpace space, BridgeOptions options)
    : command_(std::move(command)), space_(std::move(space)), options_(options) {}

BridgeEvaluator::~BridgeEvaluator() { stop(); }

void BridgeEvaluator::ensure_started() {
    if (worker_) {
        return;
    }
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
        throw EvaluatorError(fmt::format("bridge: socketpair failed: {}", std::strerror(errno)));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);

    std::string sh = "sh";
    std::string dash_c = "-c";
    char* argv[] = {sh.data(), dash_c.data(), command_.data(), nullptr};
    pid_t pid = -1;
    const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(sv[1]);
    if (rc != 0) {
        ::close(sv[0]);
        throw EvaluatorError(fmt::format("bridge: cannot spawn '{}': {}", command_, std::strerror(rc)));
    }
    worker_ = std::make_unique<Worker>();
    worker_->pid = pid;
    worker_->fd = sv[0];

    try {
        const auto line = worker_->read_line(std::chrono::steady_clock::now() + options_.timeout);
        if (!line) {
            throw WorkerExited(fmt::format("bridge: worker '{}' exited before the handshake", command_));
        }
        protocol::check_handshake(*line);
    } catch (...) {
        stop();
        throw;
    }
}

void BridgeEvaluator::stop() {
    if (!worker_) {
        return;
    }
    ::shutdown(worker_->fd, SHUT_WR);
    ::close(worker_->fd);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    int status = 0;
    while (::waitpid(worker_->pid, &status, WNOHANG) == 0) {
        if (std::chrono::steady_clock::now() > deadline) {
            ::kill(worker_->pid, SIGKILL);
            ::waitpid(worker_->pid, &status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    worker_.reset();
}

double BridgeEvaluator::evaluate(const Chromosome& chromosome) {
    return evaluate_batch(std::span<const Chromosome>(&chromosome, 1), 1).front();
}

std::vector<double> BridgeEvaluator::evaluate_batch(std::span<const Chromosome> batch, int /*workers*/) {
    std::lock_guard lock(mutex_);
    if (batch.empty()) {
        return {};
    }
    try {
        ensure_started();
        return exchange(batch);
    } catch (...) {
        stop();
        throw;
    }
}

std::vector<double> BridgeEvaluator::exchange(std::span<const Chromosome> batch) {
    auto& w = *worker_;
    const std::int64_t first_id = next_id_;
    next_id_ += static_cast<std::int64_t>(batch.size());

    std::string out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        protocol::EvalRequest request{first_id + static_cast<std::int64_t>(i), batch[i], std::nullopt};
        if (options_.embed_arch && space_) {
            request.arch = arch_to_json(decode(batch[i], *space_));
        }
        out += protocol::serialize_request(request);
        out += '\n';
    }

    std::vector<std::optional<double>> results(batch.size());
    std::size_t remaining = batch.size();
    std::size_t written = 0;
    auto context = [&](std::int64_t id) {
        const auto k = id - first_id;
        return k >= 0 && k < static_cast<std::int64_t>(batch.size())
                   ? fmt::format(" (request {}, chromosome {})", id, batch[static_cast<std::size_t>(k)].to_string())
                   : fmt::format(" (request {})", id);
    };
    auto oldest_outstanding = [&]() -> std::int64_t {
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (!results[i]) return first_id + static_cast<std::int64_t>(i);
        }
        return first_id;
    };
    auto handle = [&](const std::string& line) {
        protocol::Reply reply;
        try {
            reply = protocol::parse_reply(line);
        } catch (const AccuracyRangeError& e) {
            throw AccuracyRangeError(e.what() + context(*e.request_id()), e.request_id());
        } catch (const ProtocolError& e) {
            throw ProtocolError(std::string(e.what()) + (e.request_id() ? context(*e.request_id()) : ""),
                                e.request_id());
        }
        if (const auto* f = std::get_if<protocol::WorkerFailure>(&reply)) {
            if (!f->id) {
                throw ProtocolError(fmt::format("bridge: worker rejected a request: {}", f->message));
            }
            throw WorkerReportedError(fmt::format("bridge: worker error '{}'{}", f->message, context(*f->id)), f->id);
        }
        const auto& r = std::get<protocol::EvalResponse>(reply);
        const auto k = r.id - first_id;
        if (k < 0 || k >= static_cast<std::int64_t>(batch.size()) || results[static_cast<std::size_t>(k)]) {
            throw ProtocolError(fmt::format("bridge: reply for unknown or answered id {}", r.id), r.id);
        }
        results[static_cast<std::size_t>(k)] = r.accuracy;
        --remaining;
    };

    auto deadline = std::chrono::steady_clock::now() + options_.timeout;
    while (remaining > 0) {
        while (remaining > 0) {
            const auto nl = w.buffer.find('\n');
            if (nl == std::string::npos) break;
            const std::string line = w.buffer.substr(0, nl);
            w.buffer.erase(0, nl + 1);
            if (!line.empty()) {
                handle(line);
                deadline = std::chrono::steady_clock::now() + options_.timeout;
            }
        }
        if (remaining == 0) break;
        if (w.eof) {
            const auto id = oldest_outstanding();
            throw WorkerExited(fmt::format("bridge: worker exited with replies outstanding{}", context(id)), id);
        }
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            const auto id = oldest_outstanding();
            throw EvaluatorTimeout(fmt::format("bridge: timed out after {} ms{}", options_.timeout.count(), context(id)),
                                   id);
        }
        pollfd p{w.fd, static_cast<short>(POLLIN | (written < out.size() ? POLLOUT : 0)), 0};
        const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw EvaluatorError(fmt::format("bridge: poll failed: {}", std::strerror(errno)));
        }
        if (rc == 0) continue;
        if ((p.revents & POLLOUT) && written < out.size()) {
            const ssize_t n = ::send(w.fd, out.data() + written, out.size() - written, MSG_NOSIGNAL | MSG_DONTWAIT);
            if (n > 0) {
                written += static_cast<std::size_t>(n);
            } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
                const auto id = oldest_outstanding();
                throw WorkerExited(fmt::format("bridge: worker closed its input{}", context(id)), id);
            }
        }
        if (p.revents & (POLLIN | POLLHUP | POLLERR)) {
            w.fill();
        }
    }

    std::vector<double> accuracies;
    accuracies.reserve(results.size());
    for (const auto& r : results) {
        accuracies.push_back(*r);
    }
    return accuracies;
}

std::unique_ptr<AccuracyEvaluator> bridge_evaluator(const std::string& command, std::chrono::milliseconds timeout) {
    return std::make_unique<BridgeEvaluator>(command, BridgeOptions{timeout, false});
}

} // namespace paretonas
