#include "neural_atoms/graph.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace na;
using namespace na::testing;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "na_graph_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Dataset, SingleIsolatedNode) {
    const auto p = temp_file("one.jsonl");
    write_text(p, R"({"num_nodes":1,"edges":[],"node_feats":[[1.0]],"graph_label":0})" "\n");
    const auto gs = load_dataset(p);
    ASSERT_EQ(gs.size(), 1u);
    EXPECT_EQ(gs[0].num_nodes, 1u);
    EXPECT_TRUE(gs[0].edges.empty());
    EXPECT_EQ(std::get<int>(gs[0].label), 0);
}

TEST(Dataset, OutOfRangeEdgeReportsLine) {
    const auto p = temp_file("bad.jsonl");
    write_text(p, R"({"num_nodes":1,"edges":[],"node_feats":[[1.0]],"graph_label":0})" "\n"
                  R"({"num_nodes":3,"edges":[[0,5]],"node_feats":[[1],[1],[1]],"graph_label":1})" "\n");
    try {
        load_dataset(p);
        FAIL() << "expected DatasetError";
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
}

TEST(Dataset, RejectsMalformedLines) {
    const char* bad[] = {
        R"({"num_nodes":2,"edges":[],"node_feats":[[1],[1]],"graph_label":0,"extra":1})",
        R"({"num_nodes":2,"edges":[],"node_feats":[[1],[1]]})",
        R"({"num_nodes":2,"edges":[],"node_feats":[[1],[1]],"graph_label":0,"pair_labels":[]})",
        R"({"num_nodes":2,"edges":[[0,0]],"node_feats":[[1],[1]],"graph_label":0})",
        R"({"num_nodes":2,"edges":[[0,1],[1,0]],"node_feats":[[1],[1]],"graph_label":0})",
        R"({"num_nodes":2,"edges":[],"node_feats":[[1],[1,2]],"graph_label":0})",
        R"({"num_nodes":3,"edges":[],"node_feats":[[1],[1]],"graph_label":0})",
        R"({"num_nodes":2,"edges":[],"node_feats":[[1],[1]],"pair_labels":[[0,7,1]]})",
        R"(not json)",
    };
    for (const char* line : bad) EXPECT_ANY_THROW(parse_graph_line(line)) << line;
}

TEST(Dataset, InconsistentFeatureDimension) {
    const auto p = temp_file("dims.jsonl");
    write_text(p, R"({"num_nodes":1,"edges":[],"node_feats":[[1.0]],"graph_label":0})" "\n"
                  R"({"num_nodes":1,"edges":[],"node_feats":[[1.0,2.0]],"graph_label":0})" "\n");
    EXPECT_THROW(load_dataset(p), DatasetError);
}

TEST(Dataset, RoundTripRandomGraphs) {
    Rng rng(11);
    std::vector<MolecularGraph> gs;
    for (int i = 0; i < 10; ++i) {
        MolecularGraph g = random_graph(2 + i, 3, rng);
        if (i % 3 == 1) g.label = std::vector<double>{0.1 * i, -1.0 / 3.0};
        if (i % 3 == 2) g.label = std::vector<PairLabel>{{0, 1, true}, {1, g.num_nodes - 1, false}};
        gs.push_back(std::move(g));
    }
    const auto p = temp_file("round.jsonl");
    save_dataset(p, gs);
    EXPECT_EQ(load_dataset(p), gs);
}

TEST(Permutation, IdentityInverseAndDegrees) {
    Rng rng(12);
    MolecularGraph g = random_graph(8, 2, rng, 4);
    g.label = std::vector<PairLabel>{{0, 7, true}, {2, 5, false}};
    std::vector<std::size_t> id(8);
    std::iota(id.begin(), id.end(), std::size_t{0});
    EXPECT_EQ(permute_graph(g, id), g);

    const auto p = random_permutation(8, rng);
    const MolecularGraph pg = permute_graph(g, p);
    const MolecularGraph back = permute_graph(pg, invert_permutation(p));
    EXPECT_EQ(back.node_features, g.node_features);
    EXPECT_EQ(back.label, g.label);
    auto sorted_edges = [](std::vector<Edge> e) {
        for (auto& [u, v] : e)
            if (u > v) std::swap(u, v);
        std::sort(e.begin(), e.end());
        return e;
    };
    EXPECT_EQ(sorted_edges(back.edges), sorted_edges(g.edges));

    auto d0 = g.degrees(), d1 = pg.degrees();
    std::sort(d0.begin(), d0.end());
    std::sort(d1.begin(), d1.end());
    EXPECT_EQ(d0, d1);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(pg.degrees()[p[i]], g.degrees()[i]);
}

TEST(Permutation, RejectsNonBijection) {
    Rng rng(13);
    const MolecularGraph g = random_graph(3, 1, rng);
    const std::vector<std::size_t> bad = {0, 0, 1};
    EXPECT_THROW(permute_graph(g, bad), std::invalid_argument);
    const std::vector<std::size_t> short_perm = {0, 1};
    EXPECT_THROW(permute_graph(g, short_perm), std::invalid_argument);
}

TEST(LriTask, ForcedMatchOnTwoNodes) {
    // With C=2 and L=2 every graph is a single edge; label 1 iff the one-hot colours agree.
    for (const auto& g : generate_lri_task(40, 2, 2, 3)) {
        const bool same = g.node_features.at(0, 0) == g.node_features.at(1, 0);
        EXPECT_EQ(std::get<int>(g.label), same ? 1 : 0);
        if (g.node_features.at(0, 0) == 1.0 && g.node_features.at(1, 0) == 1.0) EXPECT_EQ(std::get<int>(g.label), 1);
    }
}

TEST(LriTask, BalancedPathShapedAndDeterministic) {
    const auto gs = generate_lri_task(501, 20, 8, 5);
    double pos = 0.0;
    for (const auto& g : gs) {
        pos += std::get<int>(g.label);
        ASSERT_EQ(g.num_nodes, 20u);
        ASSERT_EQ(g.edges.size(), 19u);
        ASSERT_EQ(g.feature_dim(), 9u);
        // interior nodes: zero colour, exists = 1
        for (std::size_t v = 1; v + 1 < 20; ++v) {
            for (std::size_t c = 0; c < 8; ++c) ASSERT_EQ(g.node_features.at(v, c), 0.0);
            ASSERT_EQ(g.node_features.at(v, 8), 1.0);
        }
        // BFS distance between the endpoints
        std::vector<std::vector<std::size_t>> adj(20);
        for (auto [u, v] : g.edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::vector<int> dist(20, -1);
        std::vector<std::size_t> queue = {0};
        dist[0] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi)
            for (auto w : adj[queue[qi]])
                if (dist[w] < 0) {
                    dist[w] = dist[queue[qi]] + 1;
                    queue.push_back(w);
                }
        ASSERT_EQ(dist[19], 19);
        const bool same = std::equal(g.node_features.data().begin(), g.node_features.data().begin() + 8,
                                     g.node_features.data().begin() + 19 * 9);
        ASSERT_EQ(std::get<int>(g.label), same ? 1 : 0);
    }
    const double mean = pos / static_cast<double>(gs.size());
    EXPECT_GE(mean, 0.48);
    EXPECT_LE(mean, 0.52);
    EXPECT_EQ(generate_lri_task(50, 7, 3, 9), generate_lri_task(50, 7, 3, 9));
    EXPECT_NE(generate_lri_task(50, 7, 3, 9), generate_lri_task(50, 7, 3, 10));
}

TEST(Batch, OffsetsAndBlockDiagonalStructure) {
    Rng rng(14);
    const MolecularGraph a = random_graph(2, 3, rng), b = random_graph(3, 3, rng);
    EXPECT_EQ(batch_one(a).offsets, (std::vector<std::size_t>{0, 2}));
    const std::vector<MolecularGraph> gs = {a, b};
    const GraphBatch batch = batch_graphs(std::span<const MolecularGraph>(gs));
    EXPECT_EQ(batch.offsets, (std::vector<std::size_t>{0, 2, 5}));
    EXPECT_EQ(batch.features.rows(), 5u);
    EXPECT_EQ(batch.node_owner(), (std::vector<std::size_t>{0, 0, 1, 1, 1}));
    const Tensor dense = batch.gcn_operator.to_dense();
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            if ((i < 2) != (j < 2)) EXPECT_EQ(dense.at(i, j), 0.0);
}

TEST(Batch, FeatureDimensionMismatchThrows) {
    Rng rng(15);
    const std::vector<MolecularGraph> gs = {random_graph(2, 3, rng), random_graph(2, 4, rng)};
    EXPECT_THROW(batch_graphs(std::span<const MolecularGraph>(gs)), DimensionError);
}

TEST(Operators, GcnNormalisationMatchesDenseFormula) {
    Rng rng(16);
    const MolecularGraph g = random_graph(7, 1, rng, 4);
    const Tensor s = gcn_normalized_adjacency(7, g.edges).to_dense();
    Tensor a = Tensor::identity(7);
    for (auto [u, v] : g.edges) a.at(u, v) = a.at(v, u) = 1.0;
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) {
            double di = 0.0, dj = 0.0;
            for (std::size_t k = 0; k < 7; ++k) {
                di += a.at(i, k);
                dj += a.at(j, k);
            }
            EXPECT_NEAR(s.at(i, j), a.at(i, j) / std::sqrt(di * dj), 1e-15);
        }
    EXPECT_EQ(adjacency_with_self_loops(7, g.edges).to_dense(), a);
}
