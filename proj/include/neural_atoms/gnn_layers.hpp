#pragma once

// Short-range message passing: GCN and GIN.

#include "neural_atoms/graph.hpp"
#include "neural_atoms/random.hpp"
#include "neural_atoms/tensor.hpp"

#include <string>
#include <vector>

namespace na {

struct GcnLayerParams {
    Parameter weight;  // d_in × d_out, no bias

    static GcnLayerParams init(std::size_t d_in, std::size_t d_out, Rng& rng, const std::string& prefix);
    void collect(std::vector<const Parameter*>& out) const { out.push_back(&weight); }
};

/// Two affine maps with a ReLU between them.
struct GinLayerParams {
    Parameter w1, b1, w2, b2;

    static GinLayerParams init(std::size_t d_in, std::size_t d_hidden, std::size_t d_out, Rng& rng,
                               const std::string& prefix);
    void collect(std::vector<const Parameter*>& out) const;
};

/// relu( D̂^{-1/2}(A+I)D̂^{-1/2} · H · W ), with d̂ = degree + 1.
Var gcn_forward(Var h, const GraphBatch& g, const GcnLayerParams& p);
/// MLP( (A+I) · H ).
Var gin_forward(Var h, const GraphBatch& g, const GinLayerParams& p);

enum class Backbone { Gcn, Gin };

/// One backbone layer of either kind.
struct GnnLayer {
    Backbone kind = Backbone::Gcn;
    GcnLayerParams gcn;
    GinLayerParams gin;

    static GnnLayer init(Backbone kind, std::size_t d_in, std::size_t d_out, Rng& rng, const std::string& prefix);
    Var forward(Var h, const GraphBatch& g) const;
    void collect(std::vector<const Parameter*>& out) const;
};

}  // namespace na
