#include "neural_atoms/gnn_layers.hpp"

namespace na {
namespace {

void check_rows(Var h, const GraphBatch& g, const char* op) {
    if (h.value().rank() != 2 || h.rows() != g.total_nodes())
        throw DimensionError(std::string(op) + ": features " + shape_str(h.shape()) + " for " +
                             std::to_string(g.total_nodes()) + " nodes");
}

}  // namespace

GcnLayerParams GcnLayerParams::init(std::size_t d_in, std::size_t d_out, Rng& rng, const std::string& prefix) {
    return {Parameter(prefix + ".weight", glorot(d_in, d_out, rng))};
}

GinLayerParams GinLayerParams::init(std::size_t d_in, std::size_t d_hidden, std::size_t d_out, Rng& rng,
                                    const std::string& prefix) {
    GinLayerParams p;
    p.w1 = Parameter(prefix + ".mlp.w1", glorot(d_in, d_hidden, rng));
    p.b1 = Parameter(prefix + ".mlp.b1", Tensor({d_hidden}));
    p.w2 = Parameter(prefix + ".mlp.w2", glorot(d_hidden, d_out, rng));
    p.b2 = Parameter(prefix + ".mlp.b2", Tensor({d_out}));
    return p;
}

void GinLayerParams::collect(std::vector<const Parameter*>& out) const {
    out.insert(out.end(), {&w1, &b1, &w2, &b2});
}

Var gcn_forward(Var h, const GraphBatch& g, const GcnLayerParams& p) {
    check_rows(h, g, "gcn_forward");
    Tape& t = *h.tape;
    return relu(spmm(g.gcn_operator, matmul(h, t.parameter(p.weight))));
}

Var gin_forward(Var h, const GraphBatch& g, const GinLayerParams& p) {
    check_rows(h, g, "gin_forward");
    Tape& t = *h.tape;
    const Var agg = spmm(g.sum_operator, h);
    const Var hidden = relu(add_row(matmul(agg, t.parameter(p.w1)), t.parameter(p.b1)));
    return add_row(matmul(hidden, t.parameter(p.w2)), t.parameter(p.b2));
}

GnnLayer GnnLayer::init(Backbone kind, std::size_t d_in, std::size_t d_out, Rng& rng, const std::string& prefix) {
    GnnLayer l;
    l.kind = kind;
    if (kind == Backbone::Gcn)
        l.gcn = GcnLayerParams::init(d_in, d_out, rng, prefix + ".gcn");
    else
        l.gin = GinLayerParams::init(d_in, d_out, d_out, rng, prefix + ".gin");
    return l;
}

Var GnnLayer::forward(Var h, const GraphBatch& g) const {
    return kind == Backbone::Gcn ? gcn_forward(h, g, gcn) : gin_forward(h, g, gin);
}

void GnnLayer::collect(std::vector<const Parameter*>& out) const {
    if (kind == Backbone::Gcn)
        gcn.collect(out);
    else
        gin.collect(out);
}

}  // namespace na
