#pragma once

#include "neural_atoms/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace na {

using Edge = std::pair<std::size_t, std::size_t>;

struct PairLabel {
    std::size_t u = 0;
    std::size_t v = 0;
    bool contact = false;

    friend bool operator==(const PairLabel&, const PairLabel&) = default;
};

/// No label, a class index, a regression target, or per-pair contact labels.
using GraphLabel = std::variant<std::monostate, int, std::vector<double>, std::vector<PairLabel>>;

struct MolecularGraph {
    std::size_t num_nodes = 0;
    std::vector<Edge> edges;  // one entry per undirected pair, no self-loops
    Tensor node_features;     // num_nodes × D
    GraphLabel label;

    std::size_t feature_dim() const { return node_features.cols(); }
    std::vector<std::size_t> degrees() const;
    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    friend bool operator==(const MolecularGraph&, const MolecularGraph&) = default;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads one graph per line (JSON Lines). Errors carry "path:line:".
std::vector<MolecularGraph> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, std::span<const MolecularGraph> graphs);
MolecularGraph parse_graph_line(std::string_view line);
std::string format_graph_line(const MolecularGraph& g);

/// perm[i] is the new index of node i.
MolecularGraph permute_graph(const MolecularGraph& g, std::span<const std::size_t> perm);
std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm);

/// Path graphs of `path_len` nodes whose two endpoints carry one-hot colours;
/// label 1 iff the endpoint colours match. Features are C colour channels plus
/// a constant "exists" channel. Exactly half the graphs (rounded down) are positive.
std::vector<MolecularGraph> generate_lri_task(std::size_t num_graphs, std::size_t path_len,
                                              std::size_t num_colors, std::uint64_t seed);

/// Block-diagonal merge of several graphs.
struct GraphBatch {
    std::vector<const MolecularGraph*> graphs;
    std::vector<std::size_t> offsets;  // size graphs.size() + 1, offsets[0] == 0
    Tensor features;                   // total_nodes × D
    std::vector<Edge> edges;           // re-indexed into the merged node range
    SparseMatrix gcn_operator;         // D̂^{-1/2}(A + I)D̂^{-1/2}
    SparseMatrix sum_operator;         // A + I

    std::size_t size() const { return graphs.size(); }
    std::size_t total_nodes() const { return offsets.back(); }
    std::size_t nodes_in(std::size_t g) const { return offsets[g + 1] - offsets[g]; }
    /// Graph index of every merged node.
    std::vector<std::size_t> node_owner() const;
};

GraphBatch batch_graphs(std::span<const MolecularGraph* const> gs);
GraphBatch batch_graphs(std::span<const MolecularGraph> gs);
GraphBatch batch_one(const MolecularGraph& g);

/// Symmetrically normalised adjacency with self-loops, as used by GCN.
SparseMatrix gcn_normalized_adjacency(std::size_t n, std::span<const Edge> edges);
/// Unweighted adjacency plus identity, as used by GIN.
SparseMatrix adjacency_with_self_loops(std::size_t n, std::span<const Edge> edges);

}  // namespace na
