#include "paretonas/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "paretonas/errors.hpp"

namespace paretonas {

int RandomStream::uniform_int(int lo, int hi) {
    if (hi < lo) {
        throw ArgumentError("uniform_int: empty range");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return lo + static_cast<int>(x % span);
}

double RandomStream::normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) {
        u1 = uniform01();
    }
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t key) {
    SplitMix64 mix(seed ^ (key * 0xD1B54A32D192ED03ULL));
    mix.next();
    return RandomStream(mix.next());
}

std::string RandomStream::save_state() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

void RandomStream::load_state(const std::string& state) {
    std::istringstream in(state);
    in >> engine_;
    if (in.fail()) {
        throw ValidationError("RandomStream: unreadable engine state");
    }
}

} // namespace paretonas
