#pragma once

// Per-layer neural-atom counts.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace na {

enum class KStrategy { Fixed, Decremental, Incremental };

KStrategy parse_k_strategy(std::string_view s);
std::string_view to_string(KStrategy s);

struct KSchedule {
    KStrategy strategy = KStrategy::Fixed;
    double proportion = 1.0;
    std::vector<std::size_t> counts;
};

/// fixed:       K_l = max(1, floor(proportion · avg_nodes)) for every layer
/// decremental: K_0 as above, K_l = max(1, floor(proportion · K_{l-1}))
/// incremental: the decremental sequence reversed
KSchedule compute_k_schedule(KStrategy strategy, double proportion, double avg_nodes, std::size_t n_layers);

}  // namespace na
