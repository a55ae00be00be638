#include "neural_atoms/grad_check.hpp"
#include "neural_atoms/neural_atoms.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace na;
using namespace na::testing;

namespace {

std::vector<Parameter*> mutable_params(const NeuralAtomLayerParams& p, const GnnLayer* gnn = nullptr) {
    std::vector<const Parameter*> cps;
    if (gnn) gnn->collect(cps);
    p.collect(cps);
    std::vector<Parameter*> ps;
    for (auto* c : cps) ps.push_back(const_cast<Parameter*>(c));
    return ps;
}

void zero(Parameter& p) { p.value.fill(0.0); }

}  // namespace

TEST(Projection, SingleAtomSingleSlotIsCertain) {
    Rng rng(41);
    const auto p = NeuralAtomLayerParams::init(1, 4, 3, rng, "na");
    const auto g = random_graph(1, 4, rng);
    Tape t;
    const auto proj = project_to_neural_atoms(t.constant(g.node_features), batch_one(g), p);
    ASSERT_EQ(proj.a_hat.size(), 1u);
    ASSERT_EQ(proj.a_hat[0].size(), 3u);
    for (const Var& a : proj.a_hat[0]) EXPECT_EQ(a.value(), Tensor::matrix({{1.0}}));
}

TEST(Projection, IdenticalAtomsGiveUniformAllocation) {
    Rng rng(42);
    const auto p = NeuralAtomLayerParams::init(3, 4, 2, rng, "na");
    auto g = random_graph(5, 4, rng);
    for (std::size_t i = 1; i < 5; ++i)
        for (std::size_t c = 0; c < 4; ++c) g.node_features.at(i, c) = g.node_features.at(0, c);
    Tape t;
    const auto proj = project_to_neural_atoms(t.constant(g.node_features), batch_one(g), p);
    for (const Var& a : proj.a_hat[0])
        for (double x : a.value().data()) EXPECT_NEAR(x, 0.2, 1e-15);
}

TEST(Projection, InvariantUnderNodePermutation) {
    Rng rng(43);
    const auto p = NeuralAtomLayerParams::init(3, 5, 2, rng, "na");
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_graph(9, 5, rng);
        const auto perm = random_permutation(9, rng);
        const auto pg = permute_graph(g, perm);
        Tape t;
        const auto a = project_to_neural_atoms(t.constant(g.node_features), batch_one(g), p);
        const auto b = project_to_neural_atoms(t.constant(pg.node_features), batch_one(pg), p);
        EXPECT_LT(max_abs_diff(a.h_na.value(), b.h_na.value()), 1e-10);
    }
}

TEST(Exchange, SingleSlotAttendsToItself) {
    Rng rng(44);
    const auto p = NeuralAtomLayerParams::init(1, 4, 2, rng, "na");
    Tape t;
    const Var h = t.constant(random_normal({1, 4}, 1.0, rng));
    const auto att = multi_head_attention(h, h, h, p.exchange);
    for (const Var& w : att.per_head_weights) EXPECT_EQ(w.value(), Tensor::matrix({{1.0}}));
    // attended value per head equals the projected input row
    const auto pv = matmul(h, t.parameter(p.exchange.wv[1]));
    Tensor expected_concat({1, 8});
    const Tensor pv0 = matmul(h, t.parameter(p.exchange.wv[0])).value();
    for (std::size_t c = 0; c < 4; ++c) {
        expected_concat.at(0, c) = pv0.at(0, c);
        expected_concat.at(0, 4 + c) = pv.value().at(0, c);
    }
    EXPECT_LT(max_abs_diff(att.output.value(), naive_matmul(expected_concat, p.exchange.wo.value)), 1e-13);
}

TEST(Exchange, IdenticalRowsStayIdenticalAndPermutationEquivariance) {
    Rng rng(45);
    const auto p = NeuralAtomLayerParams::init(4, 5, 2, rng, "na");
    Tensor x = random_normal({4, 5}, 1.0, rng);
    for (std::size_t c = 0; c < 5; ++c) x.at(2, c) = x.at(0, c);
    Tape t;
    const Tensor y = exchange_neural_atoms(t.constant(x), 1, p).value();
    for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(y.at(0, c), y.at(2, c), 1e-15);

    for (int trial = 0; trial < 10; ++trial) {
        const Tensor h = random_normal({4, 5}, 1.0, rng);
        const auto perm = random_permutation(4, rng);
        const Tensor a = exchange_neural_atoms(t.constant(h), 1, p).value();
        const Tensor b = exchange_neural_atoms(t.constant(permute_rows(h, perm)), 1, p).value();
        EXPECT_LT(max_abs_diff(b, permute_rows(a, perm)), 1e-10);
    }
}

TEST(Backprojection, AllocationAggregation) {
    Tape t;
    const std::vector<Var> one = {t.constant(Tensor::matrix({{0.25, 0.25, 0.25, 0.25}}))};
    EXPECT_EQ(aggregate_allocation(one).value(), Tensor::matrix({{0.25}, {0.25}, {0.25}, {0.25}}));
    const std::vector<Var> two = {t.constant(Tensor::matrix({{1.0, 0.0}})), t.constant(Tensor::matrix({{0.0, 1.0}}))};
    EXPECT_EQ(aggregate_allocation(two).value(), Tensor::matrix({{0.5}, {0.5}}));
}

TEST(Backprojection, ZeroSlotsLeaveEmbeddingsUnchanged) {
    Rng rng(46);
    const auto g = random_graph(5, 3, rng);
    const auto b = batch_one(g);
    Tape t;
    const Var h = t.constant(g.node_features);
    const std::vector<std::vector<Var>> a = {{t.constant(softmax_rows(random_normal({2, 5}, 1.0, rng)))}};
    EXPECT_EQ(backproject_and_enhance(h, t.constant(Tensor({2, 3})), a, b).value(), g.node_features);
}

TEST(Block, ZeroedNeuralAtomPathReturnsGnnOutput) {
    Rng rng(47);
    const auto g = random_graph(6, 4, rng);
    const auto b = batch_one(g);
    const GnnLayer gnn = GnnLayer::init(Backbone::Gcn, 4, 4, rng, "gcn");
    auto p = NeuralAtomLayerParams::init(3, 4, 2, rng, "na");
    for (auto* mh : {&p.project, &p.exchange}) {
        for (auto& w : mh->wv) zero(w);
        zero(mh->wo);
    }
    // the step-2 LayerNorm would otherwise map the (now attention-free) slots to a non-zero affine image
    zero(p.ln2_gamma);
    zero(p.ln2_beta);
    Tape t;
    const Var x = t.constant(g.node_features);
    EXPECT_EQ(neural_atom_block(x, b, gnn, p).h.value(), gnn.forward(x, b).value());
}

TEST(Block, PermutationEquivariance) {
    Rng rng(48);
    const GnnLayer gnn = GnnLayer::init(Backbone::Gin, 3, 6, rng, "gin");
    const auto p = NeuralAtomLayerParams::init(3, 6, 2, rng, "na");
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_graph(4 + trial % 10, 3, rng, 3);
        const auto perm = random_permutation(g.num_nodes, rng);
        const auto pg = permute_graph(g, perm);
        Tape t;
        const auto a = neural_atom_block(t.constant(g.node_features), batch_one(g), gnn, p, true);
        const auto c = neural_atom_block(t.constant(pg.node_features), batch_one(pg), gnn, p, true);
        EXPECT_LT(max_abs_diff(c.h.value(), permute_rows(a.h.value(), perm)), 1e-10);
        EXPECT_LT(max_abs_diff(c.traces[0].h_na, a.traces[0].h_na), 1e-10);
        EXPECT_LT(max_abs_diff(c.traces[0].a_tilde, permute_rows(a.traces[0].a_tilde, perm)), 1e-10);
    }
}

TEST(Block, TraceIsConsistent) {
    Rng rng(49);
    const auto g = random_graph(7, 4, rng);
    const GnnLayer gnn = GnnLayer::init(Backbone::Gcn, 4, 4, rng, "gcn");
    const auto p = NeuralAtomLayerParams::init(3, 4, 2, rng, "na");
    Tape t;
    const auto out = neural_atom_block(t.constant(g.node_features), batch_one(g), gnn, p, true);
    ASSERT_EQ(out.traces.size(), 1u);
    const auto& tr = out.traces[0];
    EXPECT_EQ(tr.a_hat.size(), 2u);
    EXPECT_EQ(tr.a_tilde.shape(), (Shape{7, 3}));
    for (std::size_t j = 0; j < 7; ++j)
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_NEAR(tr.a_tilde.at(j, i), 0.5 * (tr.a_hat[0].at(i, j) + tr.a_hat[1].at(i, j)), 1e-16);
    // H = H_gnn + Ã H̃
    const Tensor h_gnn = gnn.forward(t.constant(g.node_features), batch_one(g)).value();
    const Tensor back = naive_matmul(tr.a_tilde, tr.h_na_tilde);
    for (std::size_t i = 0; i < h_gnn.size(); ++i) EXPECT_NEAR(out.h.value()[i], h_gnn[i] + back[i], 1e-12);
    // bit-identical on repeat
    Tape t2;
    const auto again = neural_atom_block(t2.constant(g.node_features), batch_one(g), gnn, p, true);
    EXPECT_EQ(again.h.value(), out.h.value());
    EXPECT_EQ(again.traces[0].a_tilde, tr.a_tilde);
}

TEST(Block, BatchedEqualsPerGraph) {
    Rng rng(50);
    const GnnLayer gnn = GnnLayer::init(Backbone::Gcn, 3, 5, rng, "gcn");
    const auto p = NeuralAtomLayerParams::init(2, 5, 2, rng, "na");
    std::vector<MolecularGraph> gs;
    for (std::size_t n : {3, 8, 1, 5}) gs.push_back(random_graph(n, 3, rng));
    const auto batch = batch_graphs(std::span<const MolecularGraph>(gs));
    Tape t;
    const Tensor merged = neural_atom_block(t.constant(batch.features), batch, gnn, p).h.value();
    for (std::size_t s = 0; s < gs.size(); ++s) {
        const Tensor one = neural_atom_block(t.constant(gs[s].node_features), batch_one(gs[s]), gnn, p).h.value();
        for (std::size_t i = 0; i < gs[s].num_nodes; ++i)
            for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(merged.at(batch.offsets[s] + i, c), one.at(i, c), 1e-10);
    }
}

TEST(Block, ParameterCountIndependentOfGraphSize) {
    Rng rng(51);
    const auto p = NeuralAtomLayerParams::init(4, 8, 2, rng, "na");
    std::vector<const Parameter*> ps;
    p.collect(ps);
    std::size_t count = 0;
    for (auto* q : ps) count += q->value.size();
    // queries + 2 attention blocks (3 per-head d×d + M·d×d output) + 2 LayerNorms
    EXPECT_EQ(count, 4u * 8 + 2 * (2 * 3 * 64 + 2 * 64) + 4 * 8);
    Tape t;
    for (std::size_t n : {1, 10, 100}) {
        const auto g = random_graph(n, 8, rng);
        EXPECT_EQ(neural_atom_enhance(t.constant(g.node_features), batch_one(g), p).h.rows(), n);
    }
}

TEST(Block, GradientsPassCheck) {
    Rng rng(52);
    const auto g = random_graph(6, 8, rng, 3);
    const auto b = batch_one(g);
    GnnLayer gnn = GnnLayer::init(Backbone::Gcn, 8, 8, rng, "gcn");
    auto p = NeuralAtomLayerParams::init(3, 8, 2, rng, "na");
    // move LayerNorm affine params off their identity init so their gradients are exercised
    p.ln1_gamma.value = random_normal({8}, 1.0, rng);
    p.ln2_beta.value = random_normal({8}, 1.0, rng);
    const Tensor w = random_normal({6, 8}, 1.0, rng);
    const auto res = grad_check([&](Tape& t) {
        return sum(mul(neural_atom_block(t.constant(g.node_features), b, gnn, p).h, t.constant(w)));
    }, mutable_params(p, &gnn), 1e-5);
    EXPECT_LT(res.max_rel_error, 1e-4) << res.worst_param << "[" << res.worst_index << "]";
}

TEST(Block, DimensionMismatchThrows) {
    Rng rng(53);
    const auto p = NeuralAtomLayerParams::init(2, 4, 1, rng, "na");
    const auto g = random_graph(3, 5, rng);
    Tape t;
    EXPECT_THROW(project_to_neural_atoms(t.constant(g.node_features), batch_one(g), p), DimensionError);
    EXPECT_THROW(exchange_neural_atoms(t.constant(Tensor({3, 4})), 1, p), DimensionError);
}
