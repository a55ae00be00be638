#pragma once

// Virtual-node augmentation: every graph owns `count` global nodes that pool
// the node embeddings, update through an MLP and are added back to every node.

#include "neural_atoms/graph.hpp"
#include "neural_atoms/random.hpp"
#include "neural_atoms/tensor.hpp"

#include <vector>

namespace na {

struct VirtualNodeParams {
    Parameter w1, b1, w2, b2;  // d→d→d with a ReLU between

    static VirtualNodeParams init(std::size_t dim, Rng& rng, const std::string& prefix);
    void collect(std::vector<const Parameter*>& out) const;
};

struct VirtualNodeOutput {
    Var h;       // N × d
    Var vstate;  // (graphs·count) × d
};

/// With one virtual node per graph: v' = MLP(v + mean_nodes(H)), H' = H + v'.
/// With several, virtual nodes are fully connected: v_j' = MLP(v_j + mean_nodes(H) + mean_{i≠j} v_i)
/// and every node receives the mean of the updated virtual nodes.
VirtualNodeOutput virtual_node_layer(Var h, Var vstate, const GraphBatch& g, const VirtualNodeParams& p,
                                     std::size_t count = 1);

/// Initial virtual-node states for a batch: the learnable embedding tiled once per graph.
Var initial_virtual_nodes(Tape& t, const Parameter& embedding, std::size_t num_graphs);

}  // namespace na
