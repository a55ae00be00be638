#include "neural_atoms/neural_atoms.hpp"

namespace na {
namespace {

std::vector<std::size_t> uniform_offsets(std::size_t segments, std::size_t width) {
    std::vector<std::size_t> off(segments + 1);
    for (std::size_t s = 0; s <= segments; ++s) off[s] = s * width;
    return off;
}

Var tile_rows(Var x, std::size_t times) {
    if (times == 1) return x;
    const std::vector<Var> parts(times, x);
    return concat_rows(parts);
}

}  // namespace

NeuralAtomLayerParams NeuralAtomLayerParams::init(std::size_t num_atoms, std::size_t dim, std::size_t heads,
                                                  Rng& rng, const std::string& prefix) {
    if (num_atoms == 0) throw std::invalid_argument("need at least one neural atom");
    NeuralAtomLayerParams p;
    p.num_atoms = num_atoms;
    p.queries = Parameter(prefix + ".queries", random_normal({num_atoms, dim}, kQueryInitStd, rng));
    p.project = MultiHeadParams::init(heads, dim, rng, prefix + ".project");
    p.exchange = MultiHeadParams::init(heads, dim, rng, prefix + ".exchange");
    p.ln1_gamma = Parameter(prefix + ".ln1.gamma", Tensor({dim}, 1.0));
    p.ln1_beta = Parameter(prefix + ".ln1.beta", Tensor({dim}));
    p.ln2_gamma = Parameter(prefix + ".ln2.gamma", Tensor({dim}, 1.0));
    p.ln2_beta = Parameter(prefix + ".ln2.beta", Tensor({dim}));
    return p;
}

void NeuralAtomLayerParams::collect(std::vector<const Parameter*>& out) const {
    out.push_back(&queries);
    project.collect(out);
    exchange.collect(out);
    out.insert(out.end(), {&ln1_gamma, &ln1_beta, &ln2_gamma, &ln2_beta});
}

Projection project_to_neural_atoms(Var h_gnn, const GraphBatch& g, const NeuralAtomLayerParams& p) {
    if (h_gnn.value().rank() != 2 || h_gnn.rows() != g.total_nodes() || h_gnn.cols() != p.dim())
        throw DimensionError("project_to_neural_atoms: embeddings " + shape_str(h_gnn.shape()) + " for " +
                             std::to_string(g.total_nodes()) + " nodes of width " + std::to_string(p.dim()));
    Tape& t = *h_gnn.tape;
    const Var q = tile_rows(t.parameter(p.queries), g.size());
    const auto q_off = uniform_offsets(g.size(), p.num_atoms);
    auto attn = segmented_multi_head_attention(q, h_gnn, h_gnn, p.project, q_off, g.offsets);
    const Var h_na =
        layer_norm(add(q, attn.output), t.parameter(p.ln1_gamma), t.parameter(p.ln1_beta), kLayerNormEps);
    return {h_na, std::move(attn.weights)};
}

Var exchange_neural_atoms(Var h_na, std::size_t num_graphs, const NeuralAtomLayerParams& p) {
    if (h_na.value().rank() != 2 || h_na.rows() != num_graphs * p.num_atoms || h_na.cols() != p.dim())
        throw DimensionError("exchange_neural_atoms: got " + shape_str(h_na.shape()) + ", expected " +
                             std::to_string(num_graphs * p.num_atoms) + "x" + std::to_string(p.dim()));
    Tape& t = *h_na.tape;
    const auto off = uniform_offsets(num_graphs, p.num_atoms);
    const auto attn = segmented_multi_head_attention(h_na, h_na, h_na, p.exchange, off, off);
    return layer_norm(add(h_na, attn.output), t.parameter(p.ln2_gamma), t.parameter(p.ln2_beta), kLayerNormEps);
}

Var aggregate_allocation(std::span<const Var> a_hat_heads) {
    if (a_hat_heads.empty()) throw DimensionError("aggregate_allocation: no heads");
    Var acc = a_hat_heads[0];
    for (std::size_t m = 1; m < a_hat_heads.size(); ++m) acc = add(acc, a_hat_heads[m]);
    if (a_hat_heads.size() > 1) acc = scale(acc, 1.0 / static_cast<double>(a_hat_heads.size()));
    return transpose(acc);
}

Var backproject_and_enhance(Var h_gnn, Var h_na_tilde, const std::vector<std::vector<Var>>& a_hat,
                            const GraphBatch& g) {
    if (a_hat.size() != g.size()) throw DimensionError("backproject_and_enhance: allocation count differs from batch");
    if (h_gnn.rows() != g.total_nodes() || h_na_tilde.cols() != h_gnn.cols())
        throw DimensionError("backproject_and_enhance: embeddings " + shape_str(h_gnn.shape()) + " / " +
                             shape_str(h_na_tilde.shape()) + " inconsistent with batch");
    const std::size_t k = h_na_tilde.rows() / g.size();
    std::vector<Var> parts;
    parts.reserve(g.size());
    for (std::size_t s = 0; s < g.size(); ++s) {
        for (const Var& a : a_hat[s])
            if (a.rows() != k || a.cols() != g.nodes_in(s))
                throw DimensionError("backproject_and_enhance: allocation " + shape_str(a.shape()) + " for graph with " +
                                     std::to_string(g.nodes_in(s)) + " nodes and K=" + std::to_string(k));
        const Var a_tilde = aggregate_allocation(a_hat[s]);
        const Var slots = g.size() == 1 ? h_na_tilde : slice_rows(h_na_tilde, s * k, k);
        parts.push_back(matmul(a_tilde, slots));
    }
    return add(h_gnn, g.size() == 1 ? parts.front() : concat_rows(parts));
}

BlockOutput neural_atom_enhance(Var h_gnn, const GraphBatch& g, const NeuralAtomLayerParams& p, bool record_trace) {
    const Projection proj = project_to_neural_atoms(h_gnn, g, p);
    const Var h_tilde = exchange_neural_atoms(proj.h_na, g.size(), p);
    BlockOutput out{backproject_and_enhance(h_gnn, h_tilde, proj.a_hat, g), {}};
    if (record_trace) {
        const std::size_t k = p.num_atoms, d = p.dim();
        for (std::size_t s = 0; s < g.size(); ++s) {
            NeuralAtomTrace tr;
            auto rows = [&](const Tensor& x) {
                const auto src = x.data().subspan(s * k * d, k * d);
                return Tensor({k, d}, std::vector<double>(src.begin(), src.end()));
            };
            tr.h_na = rows(proj.h_na.value());
            tr.h_na_tilde = rows(h_tilde.value());
            const std::size_t n = g.nodes_in(s);
            tr.a_tilde = Tensor({n, k});
            for (const Var& a : proj.a_hat[s]) {
                tr.a_hat.push_back(a.value());
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < n; ++j) tr.a_tilde.at(j, i) += a.value().at(i, j);
            }
            if (proj.a_hat[s].size() > 1) {
                const double inv = 1.0 / static_cast<double>(proj.a_hat[s].size());
                for (auto& v : tr.a_tilde.data()) v *= inv;
            }
            out.traces.push_back(std::move(tr));
        }
    }
    return out;
}

BlockOutput neural_atom_block(Var h_prev, const GraphBatch& g, const GnnLayer& gnn, const NeuralAtomLayerParams& p,
                              bool record_trace) {
    return neural_atom_enhance(gnn.forward(h_prev, g), g, p, record_trace);
}

}  // namespace na
