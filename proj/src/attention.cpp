#include "neural_atoms/attention.hpp"

#include <cmath>

namespace na {

MultiHeadParams MultiHeadParams::init(std::size_t heads, std::size_t dim, Rng& rng, const std::string& prefix) {
    if (heads == 0) throw std::invalid_argument("attention needs at least one head");
    MultiHeadParams p;
    p.heads = heads;
    p.dim = dim;
    for (std::size_t m = 0; m < heads; ++m) {
        const std::string h = prefix + ".head" + std::to_string(m);
        p.wq.emplace_back(h + ".wq", glorot(dim, dim, rng));
        p.wk.emplace_back(h + ".wk", glorot(dim, dim, rng));
        p.wv.emplace_back(h + ".wv", glorot(dim, dim, rng));
    }
    p.wo = Parameter(prefix + ".wo", glorot(heads * dim, dim, rng));
    return p;
}

void MultiHeadParams::collect(std::vector<const Parameter*>& out) const {
    for (std::size_t m = 0; m < heads; ++m) out.insert(out.end(), {&wq[m], &wk[m], &wv[m]});
    out.push_back(&wo);
}

AttentionOutput multi_head_attention(Var q, Var k, Var v, const MultiHeadParams& p) {
    const std::size_t qo[2] = {0, q.rows()};
    const std::size_t kvo[2] = {0, k.rows()};
    auto seg = segmented_multi_head_attention(q, k, v, p, qo, kvo);
    return {seg.output, std::move(seg.weights.front())};
}

SegmentedAttentionOutput segmented_multi_head_attention(Var q, Var k, Var v, const MultiHeadParams& p,
                                                        std::span<const std::size_t> q_offsets,
                                                        std::span<const std::size_t> kv_offsets) {
    const std::size_t d = p.dim;
    for (const Var x : {q, k, v})
        if (x.value().rank() != 2 || x.cols() != d)
            throw DimensionError("multi_head_attention: input " + shape_str(x.shape()) + " does not have width " +
                                 std::to_string(d));
    if (k.rows() != v.rows())
        throw DimensionError("multi_head_attention: keys " + shape_str(k.shape()) + " vs values " +
                             shape_str(v.shape()));
    if (q_offsets.size() != kv_offsets.size() || q_offsets.size() < 2 || q_offsets.back() != q.rows() ||
        kv_offsets.back() != k.rows())
        throw DimensionError("multi_head_attention: segment offsets do not cover the inputs");
    const std::size_t segs = q_offsets.size() - 1;
    for (std::size_t s = 0; s < segs; ++s)
        if (kv_offsets[s + 1] <= kv_offsets[s])
            throw DimensionError("multi_head_attention: segment without keys");

    Tape& t = *q.tape;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    SegmentedAttentionOutput out;
    out.weights.assign(segs, std::vector<Var>(p.heads));
    // head_out[s][m] is segment s's output for head m
    std::vector<std::vector<Var>> head_out(segs, std::vector<Var>(p.heads));
    for (std::size_t m = 0; m < p.heads; ++m) {
        const Var qp = matmul(q, t.parameter(p.wq[m]));
        const Var kp = matmul(k, t.parameter(p.wk[m]));
        const Var vp = matmul(v, t.parameter(p.wv[m]));
        for (std::size_t s = 0; s < segs; ++s) {
            const std::size_t nq = q_offsets[s + 1] - q_offsets[s];
            const std::size_t nk = kv_offsets[s + 1] - kv_offsets[s];
            const bool whole = segs == 1;
            const Var qs = whole ? qp : slice_rows(qp, q_offsets[s], nq);
            const Var ks = whole ? kp : slice_rows(kp, kv_offsets[s], nk);
            const Var vs = whole ? vp : slice_rows(vp, kv_offsets[s], nk);
            const Var weights = softmax_rows(scale(matmul_nt(qs, ks), inv_sqrt_d));
            out.weights[s][m] = weights;
            head_out[s][m] = matmul(weights, vs);
        }
    }
    std::vector<Var> rows;
    rows.reserve(segs);
    for (std::size_t s = 0; s < segs; ++s)
        rows.push_back(p.heads == 1 ? head_out[s][0] : concat_cols(head_out[s]));
    const Var stacked = segs == 1 ? rows.front() : concat_rows(rows);
    out.output = matmul(stacked, t.parameter(p.wo));
    return out;
}

}  // namespace na
