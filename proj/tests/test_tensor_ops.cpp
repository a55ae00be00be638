#include "neural_atoms/grad_check.hpp"
#include "neural_atoms/kernels.hpp"
#include "neural_atoms/tensor.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace na;
using namespace na::testing;

TEST(Tensor, ShapeAndConstruction) {
    const Tensor t = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
    EXPECT_EQ(t.at(1, 2), 6.0);
    EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
    EXPECT_THROW(Tensor::matrix({{1, 2}, {3}}), DimensionError);
    EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
    EXPECT_THROW(t.item(), DimensionError);
}

TEST(TensorOps, MatmulMatchesTripleLoop) {
    Rng rng(4);
    for (auto backend : {kernels::Backend::Scalar, kernels::Backend::Avx2}) {
        if (!kernels::backend_available(backend)) continue;
        const auto before = kernels::current_backend();
        kernels::set_backend(backend);
        for (std::size_t m : {1, 3, 8})
            for (std::size_t k : {1, 5, 19})
                for (std::size_t n : {1, 2, 21}) {
                    const Tensor a = random_normal({m, k}, 1.0, rng), b = random_normal({k, n}, 1.0, rng);
                    Tape t;
                    const Var c = matmul(t.constant(a), t.constant(b));
                    EXPECT_LT(max_abs_diff(c.value(), naive_matmul(a, b)), 1e-12);
                    const Tensor bt = random_normal({n, k}, 1.0, rng);
                    const Var d = matmul_nt(t.constant(a), t.constant(bt));
                    EXPECT_LT(max_abs_diff(d.value(), naive_matmul(a, naive_transpose(bt))), 1e-12);
                }
        kernels::set_backend(before);
    }
}

TEST(TensorOps, MatmulDimensionMismatchThrows) {
    Tape t;
    EXPECT_THROW(matmul(t.constant(Tensor({2, 3})), t.constant(Tensor({2, 3}))), DimensionError);
    EXPECT_THROW(add(t.constant(Tensor({2, 3})), t.constant(Tensor({3, 2}))), DimensionError);
}

TEST(TensorOps, SoftmaxRowsMatchesOracleAndSumsToOne) {
    Rng rng(5);
    const Tensor x = random_normal({6, 9}, 3.0, rng);
    const Tensor y = softmax_rows(x);
    EXPECT_LT(max_abs_diff(y, naive_softmax_rows(x)), 1e-14);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < y.cols(); ++j) s += y.at(i, j);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    // large logits stay finite
    const Tensor big = softmax_rows(Tensor::matrix({{1000.0, 0.0}}));
    EXPECT_TRUE(big.all_finite());
    EXPECT_NEAR(big.at(0, 0), 1.0, 1e-15);
}

TEST(TensorOps, LayerNormMatchesOracle) {
    Rng rng(6);
    const Tensor x = random_normal({4, 7}, 2.0, rng);
    const Tensor gamma = random_normal({7}, 1.0, rng), beta = random_normal({7}, 1.0, rng);
    Tape t;
    const Var y = layer_norm(t.constant(x), t.constant(gamma), t.constant(beta), 1e-5);
    for (std::size_t i = 0; i < 4; ++i) {
        double mu = 0.0, var = 0.0;
        for (std::size_t j = 0; j < 7; ++j) mu += x.at(i, j) / 7.0;
        for (std::size_t j = 0; j < 7; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu) / 7.0;
        for (std::size_t j = 0; j < 7; ++j)
            EXPECT_NEAR(y.value().at(i, j), (x.at(i, j) - mu) / std::sqrt(var + 1e-5) * gamma[j] + beta[j], 1e-12);
    }
}

TEST(TensorOps, SegmentMeanAndGather) {
    Tape t;
    const Var x = t.constant(Tensor::matrix({{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}}));
    const std::vector<std::size_t> offsets = {0, 2, 5};
    const Tensor m = segment_mean_rows(x, offsets).value();
    EXPECT_LT(max_abs_diff(m, Tensor::matrix({{2, 3}, {7, 8}})), 1e-14);
    const std::vector<std::size_t> idx = {4, 0, 4};
    EXPECT_EQ(gather_rows(x, idx).value(), Tensor::matrix({{9, 10}, {1, 2}, {9, 10}}));
}

TEST(TensorOps, LossValuesMatchClosedForms) {
    Tape t;
    const Var logits = t.constant(Tensor::matrix({{0.0, 0.0}, {std::log(3.0), 0.0}}));
    const std::vector<int> y = {0, 0};
    // −(log ½ + log ¾)/2
    EXPECT_NEAR(cross_entropy(logits, y).value().item(), -(std::log(0.5) + std::log(0.75)) / 2.0, 1e-14);
    const Var z = t.constant(Tensor::matrix({{0.0}, {2.0}}));
    const std::vector<double> target = {1.0, 0.0};
    EXPECT_NEAR(bce_with_logits(z, target).value().item(), (std::log(2.0) + std::log1p(std::exp(2.0))) / 2.0, 1e-14);
    EXPECT_NEAR(mse(z, Tensor::matrix({{1.0}, {1.0}})).value().item(), 1.0, 1e-15);
}

TEST(Tape, BackwardRequiresScalarLoss) {
    Tape t;
    const Var v = t.variable(Tensor({2, 2}, 1.0));
    EXPECT_THROW(t.backward(v), std::logic_error);
}

TEST(Tape, GradientAccumulatesOverReuse) {
    Tape t;
    Parameter p("p", Tensor::matrix({{3.0}}));
    const Var x = t.parameter(p);
    t.backward(sum(mul(x, x)));  // d/dp p² = 2p
    EXPECT_DOUBLE_EQ(p.grad[0], 6.0);
}

TEST(GradCheck, RejectsStepOutsideRange) {
    Parameter p("p", Tensor::matrix({{1.0}}));
    std::vector<Parameter*> ps = {&p};
    const LossBuilder f = [&](Tape& t) { return sum(t.parameter(p)); };
    EXPECT_THROW(grad_check(f, ps, 1e-9), std::invalid_argument);
    EXPECT_THROW(grad_check(f, ps, 1e-1), std::invalid_argument);
}

// Every differentiable op, checked against central differences.
class OpGradients : public ::testing::Test {
protected:
    Rng rng{7};
    Parameter a{"a", random_normal({3, 4}, 1.0, rng)};
    Parameter b{"b", random_normal({4, 5}, 1.0, rng)};
    Parameter c{"c", random_normal({3, 4}, 1.0, rng)};
    Parameter r{"r", random_normal({4}, 1.0, rng)};
    Tensor w3x5 = random_normal({3, 5}, 1.0, rng);
    Tensor w3x4 = random_normal({3, 4}, 1.0, rng);

    // Weighted sum so every output entry gets a distinct upstream gradient.
    static Var weighted(Var y, const Tensor& w) { return sum(mul(y, y.tape->constant(w))); }

    void check(const LossBuilder& f, std::vector<Parameter*> ps) {
        const GradCheckResult res = grad_check(f, ps, 1e-5);
        EXPECT_LT(res.max_rel_error, 1e-6) << "worst " << res.worst_param << "[" << res.worst_index << "]";
    }
};

TEST_F(OpGradients, MatmulFamily) {
    check([&](Tape& t) { return weighted(matmul(t.parameter(a), t.parameter(b)), w3x5); }, {&a, &b});
    check([&](Tape& t) { return weighted(matmul_nt(t.parameter(a), t.parameter(c)), Tensor({3, 3}, 0.7)); },
          {&a, &c});
    check([&](Tape& t) { return weighted(transpose(t.parameter(a)), naive_transpose(w3x4)); }, {&a});
}

TEST_F(OpGradients, Elementwise) {
    check([&](Tape& t) { return weighted(add(t.parameter(a), t.parameter(c)), w3x4); }, {&a, &c});
    check([&](Tape& t) { return weighted(sub(t.parameter(a), t.parameter(c)), w3x4); }, {&a, &c});
    check([&](Tape& t) { return weighted(mul(t.parameter(a), t.parameter(c)), w3x4); }, {&a, &c});
    check([&](Tape& t) { return weighted(scale(t.parameter(a), -1.5), w3x4); }, {&a});
    check([&](Tape& t) { return weighted(add_row(t.parameter(a), t.parameter(r)), w3x4); }, {&a, &r});
    check([&](Tape& t) { return weighted(broadcast_rows(t.parameter(r), 3), w3x4); }, {&r});
    check([&](Tape& t) { return weighted(relu(t.parameter(a)), w3x4); }, {&a});
}

TEST_F(OpGradients, Normalisations) {
    check([&](Tape& t) { return weighted(softmax_rows(t.parameter(a)), w3x4); }, {&a});
    Parameter g("g", random_normal({4}, 1.0, rng)), beta("beta", random_normal({4}, 1.0, rng));
    check([&](Tape& t) {
        return weighted(layer_norm(t.parameter(a), t.parameter(g), t.parameter(beta), 1e-5), w3x4);
    }, {&a, &g, &beta});
}

TEST_F(OpGradients, ReductionsAndIndexing) {
    const std::vector<std::size_t> offs = {0, 1, 3};
    const std::vector<std::size_t> idx = {2, 0, 2, 1};
    check([&](Tape& t) { return mean(t.parameter(a)); }, {&a});
    check([&](Tape& t) { return weighted(mean_rows(t.parameter(a)), Tensor::matrix({{1, -2, 3, 0.5}})); }, {&a});
    check([&](Tape& t) { return weighted(segment_mean_rows(t.parameter(a), offs), Tensor({2, 4}, 1.3)); }, {&a});
    check([&](Tape& t) { return weighted(slice_rows(t.parameter(a), 1, 2), Tensor({2, 4}, -0.4)); }, {&a});
    check([&](Tape& t) { return weighted(slice_cols(t.parameter(a), 1, 2), Tensor({3, 2}, 0.9)); }, {&a});
    const Tensor w4x4 = random_normal({4, 4}, 1.0, rng);
    const Tensor w6x4 = random_normal({6, 4}, 1.0, rng);
    const Tensor w3x8 = random_normal({3, 8}, 1.0, rng);
    check([&](Tape& t) { return weighted(gather_rows(t.parameter(a), idx), w4x4); }, {&a});
    check([&](Tape& t) {
        const std::vector<Var> parts = {t.parameter(a), t.parameter(c)};
        return weighted(concat_rows(parts), w6x4);
    }, {&a, &c});
    check([&](Tape& t) {
        const std::vector<Var> parts = {t.parameter(a), t.parameter(c)};
        return weighted(concat_cols(parts), w3x8);
    }, {&a, &c});
}

TEST_F(OpGradients, SparseProductAndLosses) {
    MolecularGraph g = path_graph(3, 1, rng);
    const SparseMatrix s = gcn_normalized_adjacency(3, g.edges);
    check([&](Tape& t) { return weighted(spmm(s, t.parameter(a)), w3x4); }, {&a});
    const std::vector<int> labels = {3, 0, 1};
    check([&](Tape& t) { return cross_entropy(t.parameter(a), labels); }, {&a});
    const std::vector<double> targets = {1, 0, 0, 1, 1, 0, 1, 0, 0, 0, 1, 1};
    check([&](Tape& t) { return bce_with_logits(t.parameter(a), targets); }, {&a});
    check([&](Tape& t) { return mse(t.parameter(a), w3x4); }, {&a});
}

TEST(SparseMatrix, SpmmMatchesDense) {
    Rng rng(8);
    const MolecularGraph g = random_graph(9, 3, rng, 5);
    const SparseMatrix s = gcn_normalized_adjacency(9, g.edges);
    Tape t;
    const Var y = spmm(s, t.constant(g.node_features));
    EXPECT_LT(max_abs_diff(y.value(), naive_matmul(s.to_dense(), g.node_features)), 1e-14);
}
