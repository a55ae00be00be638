#include "neural_atoms/graph.hpp"

#include "neural_atoms/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace na {

using nlohmann::json;

std::vector<std::size_t> MolecularGraph::degrees() const {
    std::vector<std::size_t> deg(num_nodes, 0);
    for (const auto& [u, v] : edges) {
        ++deg[u];
        ++deg[v];
    }
    return deg;
}

void MolecularGraph::validate() const {
    if (num_nodes == 0) throw std::invalid_argument("graph has no nodes");
    if (node_features.rank() != 2 || node_features.rows() != num_nodes)
        throw std::invalid_argument("node_features has " + shape_str(node_features.shape()) + " for " +
                                    std::to_string(num_nodes) + " nodes");
    std::set<Edge> seen;
    for (const auto& [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes)
            throw std::invalid_argument("edge [" + std::to_string(u) + "," + std::to_string(v) +
                                        "] out of range for " + std::to_string(num_nodes) + " nodes");
        if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(u));
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second)
            throw std::invalid_argument("duplicate edge [" + std::to_string(u) + "," + std::to_string(v) + "]");
    }
    if (const auto* pairs = std::get_if<std::vector<PairLabel>>(&label))
        for (const auto& p : *pairs)
            if (p.u >= num_nodes || p.v >= num_nodes)
                throw std::invalid_argument("pair label [" + std::to_string(p.u) + "," + std::to_string(p.v) +
                                            "] out of range");
}

// ---- JSON Lines ----------------------------------------------------------

namespace {

std::size_t as_index(const json& j, const char* what) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
        throw std::invalid_argument(std::string(what) + " must be a non-negative integer");
    return j.get<std::size_t>();
}

}  // namespace

MolecularGraph parse_graph_line(std::string_view line) {
    const json j = json::parse(line);
    if (!j.is_object()) throw std::invalid_argument("line is not a JSON object");
    static const std::set<std::string> known{"num_nodes", "edges", "node_feats", "graph_label", "pair_labels"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw std::invalid_argument("unknown key '" + key + "'");
    for (const char* req : {"num_nodes", "edges", "node_feats"})
        if (!j.contains(req)) throw std::invalid_argument(std::string("missing key '") + req + "'");
    if (j.contains("graph_label") == j.contains("pair_labels"))
        throw std::invalid_argument("exactly one of 'graph_label' or 'pair_labels' is required");

    MolecularGraph g;
    g.num_nodes = as_index(j["num_nodes"], "num_nodes");
    if (!j["edges"].is_array()) throw std::invalid_argument("'edges' must be an array");
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edge must be [u, v]");
        g.edges.emplace_back(as_index(e[0], "edge index"), as_index(e[1], "edge index"));
    }
    const json& feats = j["node_feats"];
    if (!feats.is_array()) throw std::invalid_argument("'node_feats' must be an array");
    if (feats.size() != g.num_nodes)
        throw std::invalid_argument("node_feats has " + std::to_string(feats.size()) + " rows for " +
                                    std::to_string(g.num_nodes) + " nodes");
    const std::size_t d = feats.empty() ? 0 : feats[0].size();
    std::vector<double> data;
    data.reserve(g.num_nodes * d);
    for (const auto& row : feats) {
        if (!row.is_array() || row.size() != d) throw std::invalid_argument("node_feats rows differ in length");
        for (const auto& v : row) {
            if (!v.is_number()) throw std::invalid_argument("node feature is not a number");
            data.push_back(v.get<double>());
        }
    }
    g.node_features = Tensor({g.num_nodes, d}, std::move(data));

    if (j.contains("graph_label")) {
        const json& l = j["graph_label"];
        if (l.is_number_integer()) {
            g.label = l.get<int>();
        } else if (l.is_array()) {
            std::vector<double> y;
            for (const auto& v : l) {
                if (!v.is_number()) throw std::invalid_argument("graph_label entries must be numbers");
                y.push_back(v.get<double>());
            }
            g.label = std::move(y);
        } else {
            throw std::invalid_argument("graph_label must be an int or a float array");
        }
    } else {
        std::vector<PairLabel> pairs;
        for (const auto& p : j["pair_labels"]) {
            if (!p.is_array() || p.size() != 3) throw std::invalid_argument("pair label must be [u, v, 0|1]");
            const std::size_t flag = as_index(p[2], "pair label flag");
            if (flag > 1) throw std::invalid_argument("pair label flag must be 0 or 1");
            pairs.push_back({as_index(p[0], "pair index"), as_index(p[1], "pair index"), flag == 1});
        }
        g.label = std::move(pairs);
    }
    g.validate();
    return g;
}

std::string format_graph_line(const MolecularGraph& g) {
    json j;
    j["num_nodes"] = g.num_nodes;
    json edges = json::array();
    for (const auto& [u, v] : g.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    json feats = json::array();
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        const auto row = g.node_features.data().subspan(i * g.feature_dim(), g.feature_dim());
        feats.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["node_feats"] = std::move(feats);
    std::visit(
        [&j](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, int>) {
                j["graph_label"] = l;
            } else if constexpr (std::is_same_v<L, std::vector<double>>) {
                j["graph_label"] = l;
            } else if constexpr (std::is_same_v<L, std::vector<PairLabel>>) {
                json pl = json::array();
                for (const auto& p : l) pl.push_back({p.u, p.v, p.contact ? 1 : 0});
                j["pair_labels"] = std::move(pl);
            }
        },
        g.label);
    return j.dump();
}

std::vector<MolecularGraph> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError(path.string() + ": cannot open");
    std::vector<MolecularGraph> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_graph_line(line));
        } catch (const std::exception& e) {
            throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (out.back().feature_dim() != out.front().feature_dim())
            throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": feature dimension " +
                               std::to_string(out.back().feature_dim()) + " differs from " +
                               std::to_string(out.front().feature_dim()));
    }
    return out;
}

void save_dataset(const std::filesystem::path& path, std::span<const MolecularGraph> graphs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError(path.string() + ": cannot write");
    for (const auto& g : graphs) out << format_graph_line(g) << '\n';
    if (!out) throw DatasetError(path.string() + ": write failed");
}

// ---- permutations --------------------------------------------------------

std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm) {
    std::vector<std::size_t> inv(perm.size(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= perm.size() || inv[perm[i]] != perm.size())
            throw std::invalid_argument("permutation is not a bijection");
        inv[perm[i]] = i;
    }
    return inv;
}

MolecularGraph permute_graph(const MolecularGraph& g, std::span<const std::size_t> perm) {
    if (perm.size() != g.num_nodes) throw std::invalid_argument("permutation length differs from node count");
    invert_permutation(perm);  // validates
    MolecularGraph out;
    out.num_nodes = g.num_nodes;
    const std::size_t d = g.feature_dim();
    out.node_features = Tensor({g.num_nodes, d});
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        for (std::size_t c = 0; c < d; ++c) out.node_features.at(perm[i], c) = g.node_features.at(i, c);
    for (const auto& [u, v] : g.edges) out.edges.emplace_back(perm[u], perm[v]);
    out.label = g.label;
    if (auto* pairs = std::get_if<std::vector<PairLabel>>(&out.label))
        for (auto& p : *pairs) p = {perm[p.u], perm[p.v], p.contact};
    return out;
}

// ---- synthetic long-range task -------------------------------------------

std::vector<MolecularGraph> generate_lri_task(std::size_t num_graphs, std::size_t path_len,
                                              std::size_t num_colors, std::uint64_t seed) {
    if (path_len < 2) throw std::invalid_argument("path length must be at least 2");
    if (num_colors < 2) throw std::invalid_argument("need at least 2 colours");
    Rng rng(seed);
    std::vector<int> labels(num_graphs, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(num_graphs / 2), 1);
    std::shuffle(labels.begin(), labels.end(), rng);

    const std::size_t d = num_colors + 1;
    std::uniform_int_distribution<std::size_t> color(0, num_colors - 1);
    std::uniform_int_distribution<std::size_t> other(1, num_colors - 1);
    std::vector<MolecularGraph> out;
    out.reserve(num_graphs);
    for (int label : labels) {
        MolecularGraph g;
        g.num_nodes = path_len;
        for (std::size_t i = 0; i + 1 < path_len; ++i) g.edges.emplace_back(i, i + 1);
        g.node_features = Tensor({path_len, d});
        for (std::size_t i = 0; i < path_len; ++i) g.node_features.at(i, num_colors) = 1.0;
        const std::size_t c0 = color(rng);
        const std::size_t c1 = label ? c0 : (c0 + other(rng)) % num_colors;
        g.node_features.at(0, c0) = 1.0;
        g.node_features.at(path_len - 1, c1) = 1.0;
        g.label = label;
        out.push_back(std::move(g));
    }
    return out;
}

// ---- batching ------------------------------------------------------------

SparseMatrix gcn_normalized_adjacency(std::size_t n, std::span<const Edge> edges) {
    SparseMatrix a = adjacency_with_self_loops(n, edges);
    std::vector<double> inv_sqrt(n);
    for (std::size_t r = 0; r < n; ++r)
        inv_sqrt[r] = 1.0 / std::sqrt(static_cast<double>(a.row_ptr[r + 1] - a.row_ptr[r]));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p)
            a.values[p] = inv_sqrt[r] * inv_sqrt[a.col_idx[p]];
    return a;
}

SparseMatrix adjacency_with_self_loops(std::size_t n, std::span<const Edge> edges) {
    std::vector<std::vector<std::size_t>> nbr(n);
    for (std::size_t i = 0; i < n; ++i) nbr[i].push_back(i);
    for (const auto& [u, v] : edges) {
        nbr[u].push_back(v);
        nbr[v].push_back(u);
    }
    SparseMatrix a;
    a.rows = a.cols = n;
    a.row_ptr.push_back(0);
    for (auto& row : nbr) {
        std::sort(row.begin(), row.end());
        a.col_idx.insert(a.col_idx.end(), row.begin(), row.end());
        a.row_ptr.push_back(a.col_idx.size());
    }
    a.values.assign(a.col_idx.size(), 1.0);
    return a;
}

std::vector<std::size_t> GraphBatch::node_owner() const {
    std::vector<std::size_t> owner(total_nodes());
    for (std::size_t g = 0; g < size(); ++g)
        std::fill(owner.begin() + static_cast<std::ptrdiff_t>(offsets[g]),
                  owner.begin() + static_cast<std::ptrdiff_t>(offsets[g + 1]), g);
    return owner;
}

GraphBatch batch_graphs(std::span<const MolecularGraph* const> gs) {
    if (gs.empty()) throw std::invalid_argument("cannot batch zero graphs");
    GraphBatch b;
    const std::size_t d = gs.front()->feature_dim();
    b.offsets.push_back(0);
    for (const MolecularGraph* g : gs) {
        if (g->feature_dim() != d)
            throw DimensionError("batch_graphs: feature dimension " + std::to_string(g->feature_dim()) +
                                 " differs from " + std::to_string(d));
        b.graphs.push_back(g);
        b.offsets.push_back(b.offsets.back() + g->num_nodes);
    }
    b.features = Tensor({b.total_nodes(), d});
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const auto src = gs[i]->node_features.data();
        std::copy(src.begin(), src.end(), b.features.data().begin() + static_cast<std::ptrdiff_t>(b.offsets[i] * d));
        for (const auto& [u, v] : gs[i]->edges) b.edges.emplace_back(u + b.offsets[i], v + b.offsets[i]);
    }
    b.gcn_operator = gcn_normalized_adjacency(b.total_nodes(), b.edges);
    b.sum_operator = adjacency_with_self_loops(b.total_nodes(), b.edges);
    return b;
}

GraphBatch batch_graphs(std::span<const MolecularGraph> gs) {
    std::vector<const MolecularGraph*> ptrs;
    for (const auto& g : gs) ptrs.push_back(&g);
    return batch_graphs(std::span<const MolecularGraph* const>(ptrs));
}

GraphBatch batch_one(const MolecularGraph& g) {
    const MolecularGraph* p = &g;
    return batch_graphs(std::span<const MolecularGraph* const>(&p, 1));
}

}  // namespace na
