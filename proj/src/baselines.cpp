#include "neural_atoms/baselines.hpp"

namespace na {

VirtualNodeParams VirtualNodeParams::init(std::size_t dim, Rng& rng, const std::string& prefix) {
    VirtualNodeParams p;
    p.w1 = Parameter(prefix + ".mlp.w1", glorot(dim, dim, rng));
    p.b1 = Parameter(prefix + ".mlp.b1", Tensor({dim}));
    p.w2 = Parameter(prefix + ".mlp.w2", glorot(dim, dim, rng));
    p.b2 = Parameter(prefix + ".mlp.b2", Tensor({dim}));
    return p;
}

void VirtualNodeParams::collect(std::vector<const Parameter*>& out) const {
    out.insert(out.end(), {&w1, &b1, &w2, &b2});
}

Var initial_virtual_nodes(Tape& t, const Parameter& embedding, std::size_t num_graphs) {
    const Var e = t.parameter(embedding);
    if (num_graphs == 1) return e;
    const std::vector<Var> parts(num_graphs, e);
    return concat_rows(parts);
}

VirtualNodeOutput virtual_node_layer(Var h, Var vstate, const GraphBatch& g, const VirtualNodeParams& p,
                                     std::size_t count) {
    if (count == 0) throw std::invalid_argument("virtual_node_layer: count must be positive");
    const std::size_t d = h.cols();
    if (h.rows() != g.total_nodes() || vstate.rows() != g.size() * count || vstate.cols() != d)
        throw DimensionError("virtual_node_layer: embeddings " + shape_str(h.shape()) + ", virtual nodes " +
                             shape_str(vstate.shape()) + " inconsistent with a batch of " + std::to_string(g.size()) +
                             " graphs");
    Tape& t = *h.tape;
    const Var pooled = segment_mean_rows(h, g.offsets);  // graphs × d

    std::vector<std::size_t> vn_offsets(g.size() + 1), vn_owner(g.size() * count);
    for (std::size_t s = 0; s <= g.size(); ++s) vn_offsets[s] = s * count;
    for (std::size_t k = 0; k < vn_owner.size(); ++k) vn_owner[k] = k / count;

    Var msg = add(vstate, count == 1 ? pooled : gather_rows(pooled, vn_owner));
    if (count > 1) {
        // mean over the other virtual nodes of the same graph
        const Var totals = scale(segment_mean_rows(vstate, vn_offsets), static_cast<double>(count));
        const Var others = scale(sub(gather_rows(totals, vn_owner), vstate), 1.0 / static_cast<double>(count - 1));
        msg = add(msg, others);
    }
    const Var hidden = relu(add_row(matmul(msg, t.parameter(p.w1)), t.parameter(p.b1)));
    const Var updated = add_row(matmul(hidden, t.parameter(p.w2)), t.parameter(p.b2));

    const Var per_graph = count == 1 ? updated : segment_mean_rows(updated, vn_offsets);
    const Var h_out = add(h, g.size() == 1 ? broadcast_rows(per_graph, g.total_nodes())
                                           : gather_rows(per_graph, g.node_owner()));
    return {h_out, updated};
}

}  // namespace na
