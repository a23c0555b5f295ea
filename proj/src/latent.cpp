#include "paretonas/latent.hpp"

#include <algorithm>
#include <cmath>

#include "paretonas/rng.hpp"

namespace paretonas {

namespace {

double normalized(int value, int lo, int hi) {
    return hi == lo ? 0.0 : static_cast<double>(value - lo) / static_cast<double>(hi - lo);
}

} // namespace

LatentTables make_latent_tables(const SearchSpace& space, std::uint64_t seed) {
    SplitMix64 gen(seed);
    LatentTables t;
    t.quality.resize(space.num_layers());
    for (std::size_t l = 0; l < space.num_layers(); ++l) {
        const auto& menu = space.layer(l).choices;
        const auto [emin, emax] = std::minmax_element(
            menu.begin(), menu.end(), [](const ChoiceSpec& a, const ChoiceSpec& b) { return a.expansion < b.expansion; });
        const auto [kmin, kmax] = std::minmax_element(
            menu.begin(), menu.end(), [](const ChoiceSpec& a, const ChoiceSpec& b) { return a.kernel < b.kernel; });
        for (const auto& choice : menu) {
            const double u = gen.next_unit();
            t.quality[l].push_back(kLatentExpansionWeight * normalized(choice.expansion, emin->expansion, emax->expansion) +
                                   kLatentKernelWeight * normalized(choice.kernel, kmin->kernel, kmax->kernel) +
                                   kLatentNoise * (2.0 * u - 1.0));
        }
    }
    if (space.num_layers() > 1) {
        t.interaction.resize(space.num_layers() - 1);
        for (std::size_t l = 0; l + 1 < space.num_layers(); ++l) {
            t.interaction[l].assign(static_cast<std::size_t>(space.choice_count(l)), {});
            for (auto& row : t.interaction[l]) {
                for (int b = 0; b < space.choice_count(l + 1); ++b) {
                    row.push_back(kInteractionScale * (2.0 * gen.next_unit() - 1.0));
                }
            }
        }
    }
    return t;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace paretonas
