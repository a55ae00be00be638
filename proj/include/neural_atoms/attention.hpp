#pragma once

// Multi-head scaled dot-product attention that also hands back the per-head
// attention matrices, since the neural-atom back-projection consumes them.

#include "neural_atoms/random.hpp"
#include "neural_atoms/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace na {

/// Per-head W_Q, W_K, W_V (dim × dim) and the output projection W_O (heads·dim × dim).
struct MultiHeadParams {
    std::size_t heads = 1;
    std::size_t dim = 0;
    std::vector<Parameter> wq, wk, wv;
    Parameter wo;

    static MultiHeadParams init(std::size_t heads, std::size_t dim, Rng& rng, const std::string& prefix);
    void collect(std::vector<const Parameter*>& out) const;
};

struct AttentionOutput {
    Var output;                         // k × dim
    std::vector<Var> per_head_weights;  // heads × [k × N], rows sum to 1
};

/// MultiHead(Q, K, V) = (‖_m softmax(Q W_Qm (K W_Km)ᵀ / √dim) V W_Vm) · W_O.
AttentionOutput multi_head_attention(Var q, Var k, Var v, const MultiHeadParams& p);

struct SegmentedAttentionOutput {
    Var output;                                 // total query rows × dim
    std::vector<std::vector<Var>> weights;      // [segment][head]
};

/// Independent attention problems stacked row-wise: query rows
/// [q_offsets[s], q_offsets[s+1]) attend only to key/value rows
/// [kv_offsets[s], kv_offsets[s+1]). Projections run once over all rows.
SegmentedAttentionOutput segmented_multi_head_attention(Var q, Var k, Var v, const MultiHeadParams& p,
                                                        std::span<const std::size_t> q_offsets,
                                                        std::span<const std::size_t> kv_offsets);

}  // namespace na
