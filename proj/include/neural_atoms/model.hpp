#pragma once

// Model assembly: L backbone layers, each optionally followed by the
// neural-atom steps or a virtual-node update, then a task head.

#include "neural_atoms/baselines.hpp"
#include "neural_atoms/gnn_layers.hpp"
#include "neural_atoms/graph.hpp"
#include "neural_atoms/grouping.hpp"
#include "neural_atoms/neural_atoms.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace na {

enum class Augment { None, NeuralAtoms, VirtualNode };
enum class Task { GraphClassification, GraphRegression, PairContact };

Backbone parse_backbone(std::string_view s);
Augment parse_augment(std::string_view s);
Task parse_task(std::string_view s);
std::string_view to_string(Backbone b);
std::string_view to_string(Augment a);
std::string_view to_string(Task t);

/// Run configuration. JSON keys equal the CLI flag names without dashes prefix.
struct TrainConfig {
    Backbone backbone = Backbone::Gcn;
    Augment augment = Augment::None;
    std::size_t layers = 3;
    std::size_t hidden = 32;
    std::size_t heads = 1;
    KStrategy k_strategy = KStrategy::Fixed;
    double proportion = 0.2;
    std::size_t virtual_nodes = 1;
    double lr = 1e-3;
    std::size_t epochs = 10;
    std::size_t batch = 32;
    std::uint64_t seed = 0;
    Task task = Task::GraphClassification;
    std::string dataset;
    std::string test_dataset;
    std::string out = "run";

    void validate() const;
    nlohmann::json to_json() const;
    /// Applies the keys present in `j` on top of the current values; rejects unknown keys.
    void merge_json(const nlohmann::json& j);
};

/// Everything needed to rebuild the parameter layout.
struct ModelSpec {
    Backbone backbone = Backbone::Gcn;
    Augment augment = Augment::None;
    Task task = Task::GraphClassification;
    std::size_t input_dim = 0;
    std::size_t hidden = 32;
    std::size_t heads = 1;
    std::size_t output_dim = 1;
    std::size_t virtual_nodes = 1;
    std::vector<std::size_t> k_counts;  // per layer, neural-atom augment only
    std::size_t layers = 1;

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

class Model {
public:
    struct Output {
        Var embeddings;  // merged node embeddings, total_nodes × hidden
        Var prediction;  // graphs × output_dim, or labelled pairs × 1 for pair-contact
        std::vector<std::vector<NeuralAtomTrace>> traces;  // [layer][graph], when requested
    };

    static Model build(const ModelSpec& spec, std::uint64_t seed);

    Output forward(Tape& tape, const GraphBatch& batch, bool record_trace = false) const;

    const ModelSpec& spec() const { return spec_; }
    std::vector<const Parameter*> parameters() const;
    std::vector<Parameter*> mutable_parameters();
    std::size_t parameter_count() const;

private:
    ModelSpec spec_;
    std::vector<GnnLayer> gnn_;
    std::vector<NeuralAtomLayerParams> atoms_;
    std::vector<VirtualNodeParams> vn_;
    Parameter vn_embedding_;
    // head: graph tasks use w1/b1 as the affine readout; pair-contact uses a 2-layer scorer
    Parameter head_w1_, head_b1_, head_w2_, head_b2_;
};

/// Resolves the K schedule from the dataset's average node count and builds the model.
Model build_model(const TrainConfig& cfg, std::size_t feature_dim, std::size_t output_dim, double avg_nodes);
ModelSpec make_spec(const TrainConfig& cfg, std::size_t feature_dim, std::size_t output_dim, double avg_nodes);

/// Node indices (merged) of every labelled pair in batch order, and their 0/1 targets.
struct BatchPairs {
    std::vector<std::size_t> u, v;
    std::vector<double> target;
    std::vector<std::size_t> graph;  // batch-local graph of each pair
};
BatchPairs collect_pairs(const GraphBatch& b);

}  // namespace na
