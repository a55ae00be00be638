#pragma once

#include "neural_atoms/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace na {

struct MetricRow {
    std::size_t epoch = 0;
    std::string split;
    std::string metric;
    double value = 0.0;

    friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

/// Header `epoch,split,metric,value`, one line per row.
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows);

class Adam {
public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    /// One update from the gradients currently stored in each parameter.
    void step(std::span<Parameter* const> params);

private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

/// 1 / rank averaged over queries. Throws on an empty list or a rank of 0.
double mean_reciprocal_rank(std::span<const std::size_t> ranks);

/// Rank of each positive pair among the negatives of the same graph:
/// 1 + number of negatives scoring strictly higher.
std::vector<std::size_t> pair_ranks(std::span<const double> scores, std::span<const double> targets,
                                    std::span<const std::size_t> graph_of_pair);

/// Checks that every graph carries the label kind the task needs; returns the output width.
std::size_t task_output_dim(Task task, std::span<const MolecularGraph> graphs);

double average_nodes(std::span<const MolecularGraph> graphs);

/// Loss of one batch (scalar Var on the same tape as `prediction`).
Var task_loss(Task task, Var prediction, const GraphBatch& batch);

/// Task metric over a dataset: "accuracy" for classification, "mae" for
/// regression, "mrr" for pair-contact, plus "loss".
std::map<std::string, double> evaluate(const Model& model, std::span<const MolecularGraph> graphs,
                                       std::size_t batch_size = 64);

struct Checkpoint {
    TrainConfig config;
    ModelSpec spec;
    std::vector<Parameter> parameters;
    std::size_t epoch = 0;  // number of completed epochs
    std::vector<MetricRow> history;

    static Checkpoint from_model(const Model& model, const TrainConfig& cfg, std::size_t epoch,
                                 std::vector<MetricRow> history);
    Model restore() const;

    nlohmann::json to_json() const;
    static Checkpoint from_json(const nlohmann::json& j);
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainResult {
    Model model;
    Checkpoint checkpoint;
    std::vector<MetricRow> metrics;
};

/// In-memory training. Test metrics are appended each epoch when `test` is non-empty.
TrainResult train(const TrainConfig& cfg, std::span<const MolecularGraph> train_set,
                  std::span<const MolecularGraph> test_set = {});

/// Loads cfg.dataset (and cfg.test_dataset if set), trains, and writes
/// metrics.csv, checkpoint.json and manifest.json into cfg.out.
TrainResult train(const TrainConfig& cfg);

}  // namespace na
