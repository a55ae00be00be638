#pragma once

// Neural atoms: project the atoms of each graph onto K learnable query slots
// with multi-head attention, let the K slots exchange information through
// self-attention, then add the slots back onto the atoms through the
// head-averaged allocation matrix.
//
// All functions take a GraphBatch; each graph gets its own K neural atoms,
// stacked row-wise as graph-major blocks of K rows.

#include "neural_atoms/attention.hpp"
#include "neural_atoms/gnn_layers.hpp"
#include "neural_atoms/graph.hpp"

#include <vector>

namespace na {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kQueryInitStd = 0.02;

struct NeuralAtomLayerParams {
    std::size_t num_atoms = 1;  // K
    Parameter queries;          // K × d
    MultiHeadParams project;    // atoms -> neural atoms
    MultiHeadParams exchange;   // neural atoms <-> neural atoms
    Parameter ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;

    static NeuralAtomLayerParams init(std::size_t num_atoms, std::size_t dim, std::size_t heads, Rng& rng,
                                      const std::string& prefix);
    std::size_t dim() const { return project.dim; }
    void collect(std::vector<const Parameter*>& out) const;
};

/// Plain-value record of one block on one graph.
struct NeuralAtomTrace {
    Tensor h_na;                // K × d
    Tensor h_na_tilde;          // K × d
    std::vector<Tensor> a_hat;  // heads × [K × N]
    Tensor a_tilde;             // N × K, head mean of a_hat, transposed
};

struct Projection {
    Var h_na;                                // (graphs·K) × d
    std::vector<std::vector<Var>> a_hat;     // [graph][head], K × N_g
};

/// H_NA = LayerNorm(Q_NA + MultiHead(Q_NA, H, H)) for every graph in the batch.
Projection project_to_neural_atoms(Var h_gnn, const GraphBatch& g, const NeuralAtomLayerParams& p);

/// H̃_NA = LayerNorm(H_NA + MultiHead(H_NA, H_NA, H_NA)), attention confined to each graph's K rows.
Var exchange_neural_atoms(Var h_na, std::size_t num_graphs, const NeuralAtomLayerParams& p);

/// Head mean of the allocation matrices, transposed to N × K.
Var aggregate_allocation(std::span<const Var> a_hat_heads);

/// H = H_GNN + Ã · H̃_NA per graph.
Var backproject_and_enhance(Var h_gnn, Var h_na_tilde, const std::vector<std::vector<Var>>& a_hat,
                            const GraphBatch& g);

struct BlockOutput {
    Var h;
    std::vector<NeuralAtomTrace> traces;  // one per graph when requested, else empty
};

/// GNN layer followed by the three neural-atom steps.
BlockOutput neural_atom_block(Var h_prev, const GraphBatch& g, const GnnLayer& gnn, const NeuralAtomLayerParams& p,
                              bool record_trace = false);

/// The neural-atom steps applied to an existing GNN output.
BlockOutput neural_atom_enhance(Var h_gnn, const GraphBatch& g, const NeuralAtomLayerParams& p,
                                bool record_trace = false);

}  // namespace na
