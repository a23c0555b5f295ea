#pragma once

// Seeded hidden "quality" tables shared by the supernet simulation and the
// surrogate evaluator.
//
// Derivation (reproducible in any language; see README.md):
//   g = SplitMix64(seed); u() = (g.next() >> 11) * 2^-53
//   for each layer l, for each choice c in menu order:
//     q[l][c] = 0.10*e_norm + 0.06*k_norm + 0.08*(2*u() - 1)
//   where e_norm = (e - e_min)/(e_max - e_min) over the layer's menu (0 if
//   the menu has one expansion), k_norm likewise for kernels.
//   then, continuing the same generator, for l in 0..L-2, a over layer l's
//   menu, b over layer l+1's menu: w[l][a][b] = 0.03*(2*u() - 1).

#include <cstdint>
#include <vector>

#include "paretonas/archspace.hpp"

namespace paretonas {

inline constexpr double kLatentExpansionWeight = 0.10;
inline constexpr double kLatentKernelWeight = 0.06;
inline constexpr double kLatentNoise = 0.08;
inline constexpr double kInteractionScale = 0.03;

struct LatentTables {
    std::vector<std::vector<double>> quality;                   // [layer][choice]
    std::vector<std::vector<std::vector<double>>> interaction; // [layer][choice][next choice]
};

LatentTables make_latent_tables(const SearchSpace& space, std::uint64_t seed);

double logistic(double x);

} // namespace paretonas
