#include "neural_atoms/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace na {

KStrategy parse_k_strategy(std::string_view s) {
    if (s == "fixed") return KStrategy::Fixed;
    if (s == "decremental") return KStrategy::Decremental;
    if (s == "incremental") return KStrategy::Incremental;
    throw std::invalid_argument("unknown k strategy '" + std::string(s) + "'");
}

std::string_view to_string(KStrategy s) {
    switch (s) {
        case KStrategy::Fixed: return "fixed";
        case KStrategy::Decremental: return "decremental";
        case KStrategy::Incremental: return "incremental";
    }
    return "?";
}

namespace {
std::size_t floor_at_least_one(double x) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(x))); }
}  // namespace

KSchedule compute_k_schedule(KStrategy strategy, double proportion, double avg_nodes, std::size_t n_layers) {
    if (!(proportion > 0.0 && proportion <= 1.0))
        throw std::invalid_argument("proportion must lie in (0, 1], got " + std::to_string(proportion));
    if (!(avg_nodes >= 1.0)) throw std::invalid_argument("average node count must be at least 1");
    if (n_layers == 0) throw std::invalid_argument("need at least one layer");

    KSchedule s{strategy, proportion, {}};
    const std::size_t k0 = floor_at_least_one(proportion * avg_nodes);
    if (strategy == KStrategy::Fixed) {
        s.counts.assign(n_layers, k0);
        return s;
    }
    s.counts.push_back(k0);
    while (s.counts.size() < n_layers)
        s.counts.push_back(floor_at_least_one(proportion * static_cast<double>(s.counts.back())));
    if (strategy == KStrategy::Incremental) std::reverse(s.counts.begin(), s.counts.end());
    return s;
}

}  // namespace na
