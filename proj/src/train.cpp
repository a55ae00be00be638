#include "neural_atoms/train.hpp"

#include "neural_atoms/csv.hpp"
#include "neural_atoms/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace na {

using nlohmann::json;

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "epoch,split,metric,value\n";
    for (const auto& r : rows) os << r.epoch << ',' << r.split << ',' << r.metric << ',' << format_double(r.value) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

void Adam::step(std::span<Parameter* const> params) {
    if (m_.empty()) {
        for (const Parameter* p : params) {
            m_.emplace_back(p->value.shape());
            v_.emplace_back(p->value.shape());
        }
    }
    if (m_.size() != params.size()) throw std::logic_error("Adam: parameter list changed between steps");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (p.grad.shape() != p.value.shape()) continue;  // never reached by backward
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            p.value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }
}

// ---- metrics -------------------------------------------------------------

double mean_reciprocal_rank(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw std::invalid_argument("mean_reciprocal_rank: no queries");
    double s = 0.0;
    for (std::size_t r : ranks) {
        if (r == 0) throw std::invalid_argument("mean_reciprocal_rank: ranks start at 1");
        s += 1.0 / static_cast<double>(r);
    }
    return s / static_cast<double>(ranks.size());
}

std::vector<std::size_t> pair_ranks(std::span<const double> scores, std::span<const double> targets,
                                    std::span<const std::size_t> graph_of_pair) {
    if (scores.size() != targets.size() || scores.size() != graph_of_pair.size())
        throw DimensionError("pair_ranks: scores, targets and graph ids differ in length");
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (targets[i] < 0.5) continue;
        std::size_t r = 1;
        for (std::size_t j = 0; j < scores.size(); ++j)
            if (graph_of_pair[j] == graph_of_pair[i] && targets[j] < 0.5 && scores[j] > scores[i]) ++r;
        ranks.push_back(r);
    }
    return ranks;
}

std::size_t task_output_dim(Task task, std::span<const MolecularGraph> graphs) {
    if (graphs.empty()) throw std::invalid_argument("empty dataset");
    std::size_t out = 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const auto& label = graphs[i].label;
        const std::string where = "graph " + std::to_string(i) + ": ";
        switch (task) {
            case Task::GraphClassification: {
                const int* c = std::get_if<int>(&label);
                if (!c || *c < 0) throw std::invalid_argument(where + "graph-classification needs a class index label");
                out = std::max(out, static_cast<std::size_t>(*c) + 1);
                break;
            }
            case Task::GraphRegression: {
                const auto* y = std::get_if<std::vector<double>>(&label);
                if (!y || y->empty()) throw std::invalid_argument(where + "graph-regression needs a target vector");
                if (out != 0 && y->size() != out) throw std::invalid_argument(where + "regression target width differs");
                out = y->size();
                break;
            }
            case Task::PairContact:
                if (!std::holds_alternative<std::vector<PairLabel>>(label))
                    throw std::invalid_argument(where + "pair-contact needs pair labels");
                out = 1;
                break;
        }
    }
    if (task == Task::GraphClassification) out = std::max<std::size_t>(out, 2);
    return out;
}

double average_nodes(std::span<const MolecularGraph> graphs) {
    if (graphs.empty()) throw std::invalid_argument("empty dataset");
    double s = 0.0;
    for (const auto& g : graphs) s += static_cast<double>(g.num_nodes);
    return s / static_cast<double>(graphs.size());
}

namespace {

std::vector<int> class_labels(const GraphBatch& b) {
    std::vector<int> y;
    for (const auto* g : b.graphs) {
        const int* c = std::get_if<int>(&g->label);
        if (!c) throw std::invalid_argument("graph without a class label in a classification batch");
        y.push_back(*c);
    }
    return y;
}

Tensor regression_targets(const GraphBatch& b, std::size_t width) {
    std::vector<double> y;
    for (const auto* g : b.graphs) {
        const auto* t = std::get_if<std::vector<double>>(&g->label);
        if (!t || t->size() != width) throw std::invalid_argument("regression target missing or of the wrong width");
        y.insert(y.end(), t->begin(), t->end());
    }
    return Tensor({b.size(), width}, std::move(y));
}

std::vector<const MolecularGraph*> pointers(std::span<const MolecularGraph> graphs, std::span<const std::size_t> idx) {
    std::vector<const MolecularGraph*> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(&graphs[i]);
    return out;
}

}  // namespace

Var task_loss(Task task, Var prediction, const GraphBatch& batch) {
    switch (task) {
        case Task::GraphClassification: {
            const std::vector<int> y = class_labels(batch);
            return cross_entropy(prediction, y);
        }
        case Task::GraphRegression:
            return mse(prediction, regression_targets(batch, prediction.cols()));
        case Task::PairContact: {
            const BatchPairs pairs = collect_pairs(batch);
            return bce_with_logits(prediction, pairs.target);
        }
    }
    throw std::logic_error("unknown task");
}

std::map<std::string, double> evaluate(const Model& model, std::span<const MolecularGraph> graphs,
                                       std::size_t batch_size) {
    if (graphs.empty()) throw std::invalid_argument("evaluate: empty dataset");
    if (batch_size == 0) throw std::invalid_argument("evaluate: batch size must be positive");
    const ModelSpec& spec = model.spec();
    for (const auto& g : graphs)
        if (g.feature_dim() != spec.input_dim)
            throw std::invalid_argument("dataset has " + std::to_string(g.feature_dim()) +
                                        " node features, checkpoint expects " + std::to_string(spec.input_dim));
    if (spec.task == Task::GraphClassification && task_output_dim(spec.task, graphs) > spec.output_dim)
        throw std::invalid_argument("dataset has more classes than the checkpoint's head");
    if (spec.task != Task::GraphClassification) {
        const std::size_t width = task_output_dim(spec.task, graphs);
        if (width != spec.output_dim) throw std::invalid_argument("dataset labels do not fit the checkpoint's head");
    }

    double loss_sum = 0.0, loss_weight = 0.0;
    std::size_t correct = 0;
    double abs_err = 0.0;
    std::size_t abs_count = 0;
    std::vector<std::size_t> ranks;

    for (std::size_t start = 0; start < graphs.size(); start += batch_size) {
        const std::size_t n = std::min(batch_size, graphs.size() - start);
        const GraphBatch batch = batch_graphs(graphs.subspan(start, n));
        Tape tape;
        const Model::Output out = model.forward(tape, batch);
        const Var loss = task_loss(spec.task, out.prediction, batch);
        const Tensor& pred = out.prediction.value();
        const double w = static_cast<double>(spec.task == Task::PairContact ? pred.rows() : n);
        loss_sum += loss.value().item() * w;
        loss_weight += w;

        if (spec.task == Task::GraphClassification) {
            const std::vector<int> y = class_labels(batch);
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t best = 0;
                for (std::size_t c = 1; c < pred.cols(); ++c)
                    if (pred.at(i, c) > pred.at(i, best)) best = c;
                if (static_cast<int>(best) == y[i]) ++correct;
            }
        } else if (spec.task == Task::GraphRegression) {
            const Tensor y = regression_targets(batch, pred.cols());
            for (std::size_t i = 0; i < y.size(); ++i) abs_err += std::abs(pred[i] - y[i]);
            abs_count += y.size();
        } else {
            const BatchPairs pairs = collect_pairs(batch);
            const auto r = pair_ranks(pred.data(), pairs.target, pairs.graph);
            ranks.insert(ranks.end(), r.begin(), r.end());
        }
    }

    std::map<std::string, double> m;
    m["loss"] = loss_sum / loss_weight;
    switch (spec.task) {
        case Task::GraphClassification:
            m["accuracy"] = static_cast<double>(correct) / static_cast<double>(graphs.size());
            break;
        case Task::GraphRegression:
            m["mae"] = abs_err / static_cast<double>(abs_count);
            break;
        case Task::PairContact:
            if (ranks.empty()) throw std::invalid_argument("evaluate: no positive pairs to rank");
            m["mrr"] = mean_reciprocal_rank(ranks);
            break;
    }
    return m;
}

// ---- checkpoint ----------------------------------------------------------

Checkpoint Checkpoint::from_model(const Model& model, const TrainConfig& cfg, std::size_t epoch,
                                  std::vector<MetricRow> history) {
    Checkpoint c;
    c.config = cfg;
    c.spec = model.spec();
    for (const Parameter* p : model.parameters()) c.parameters.emplace_back(p->name, p->value);
    c.epoch = epoch;
    c.history = std::move(history);
    return c;
}

Model Checkpoint::restore() const {
    Model m = Model::build(spec, config.seed);
    std::map<std::string, const Parameter*> by_name;
    for (const auto& p : parameters)
        if (!by_name.emplace(p.name, &p).second) throw std::invalid_argument("checkpoint: duplicate parameter " + p.name);
    const auto targets = m.mutable_parameters();
    if (targets.size() != by_name.size())
        throw std::invalid_argument("checkpoint holds " + std::to_string(by_name.size()) +
                                    " parameters, model expects " + std::to_string(targets.size()));
    for (Parameter* t : targets) {
        auto it = by_name.find(t->name);
        if (it == by_name.end()) throw std::invalid_argument("checkpoint: missing parameter " + t->name);
        if (it->second->value.shape() != t->value.shape())
            throw std::invalid_argument("checkpoint: parameter " + t->name + " has shape " +
                                        shape_str(it->second->value.shape()) + ", expected " +
                                        shape_str(t->value.shape()));
        t->value = it->second->value;
        t->zero_grad();
    }
    return m;
}

json Checkpoint::to_json() const {
    json params = json::array();
    for (const auto& p : parameters)
        params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"data", p.value.values()}});
    json hist = json::array();
    for (const auto& r : history) hist.push_back({{"epoch", r.epoch}, {"split", r.split}, {"metric", r.metric}, {"value", r.value}});
    return json{{"format", "neural-atoms-checkpoint/1"},
                {"config", config.to_json()},
                {"model", spec.to_json()},
                {"epoch", epoch},
                {"history", std::move(hist)},
                {"parameters", std::move(params)}};
}

Checkpoint Checkpoint::from_json(const json& j) {
    if (j.value("format", "") != "neural-atoms-checkpoint/1") throw std::invalid_argument("not a neural-atoms checkpoint");
    Checkpoint c;
    c.config.merge_json(j.at("config"));
    c.spec = ModelSpec::from_json(j.at("model"));
    c.epoch = j.at("epoch").get<std::size_t>();
    for (const auto& r : j.at("history"))
        c.history.push_back({r.at("epoch").get<std::size_t>(), r.at("split").get<std::string>(),
                             r.at("metric").get<std::string>(), r.at("value").get<double>()});
    std::set<std::string> seen;
    for (const auto& p : j.at("parameters")) {
        std::string name = p.at("name").get<std::string>();
        if (!seen.insert(name).second) throw std::invalid_argument("checkpoint: duplicate parameter " + name);
        c.parameters.emplace_back(std::move(name),
                                  Tensor(p.at("shape").get<Shape>(), p.at("data").get<std::vector<double>>()));
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    // nlohmann prints doubles with enough digits to round-trip
    os << c.to_json().dump(1) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    try {
        return Checkpoint::from_json(json::parse(is));
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

// ---- training ------------------------------------------------------------

TrainResult train(const TrainConfig& cfg, std::span<const MolecularGraph> train_set,
                  std::span<const MolecularGraph> test_set) {
    cfg.validate();
    const std::size_t out_dim = task_output_dim(cfg.task, train_set);
    const std::size_t feat = train_set.front().feature_dim();
    for (const auto& g : train_set)
        if (g.feature_dim() != feat) throw std::invalid_argument("training graphs differ in feature dimension");
    if (!test_set.empty()) task_output_dim(cfg.task, test_set);

    Model model = build_model(cfg, feat, out_dim, average_nodes(train_set));
    const std::vector<Parameter*> params = model.mutable_parameters();
    Adam adam(cfg.lr);
    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<MetricRow> rows;
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t n = std::min(cfg.batch, order.size() - start);
            const auto ptrs = pointers(train_set, std::span(order).subspan(start, n));
            const GraphBatch batch = batch_graphs(ptrs);
            Tape tape;
            const Model::Output out = model.forward(tape, batch);
            const Var loss = task_loss(cfg.task, out.prediction, batch);
            const double lv = loss.value().item();
            if (!std::isfinite(lv)) {
                std::ostringstream msg;
                msg << "non-finite loss " << lv << " at epoch " << e << ", batch starting at position " << start
                    << " (lr " << cfg.lr << "); prediction finite: " << std::boolalpha
                    << out.prediction.value().all_finite();
                throw TrainingError(msg.str());
            }
            for (Parameter* p : params) p->zero_grad();
            tape.backward(loss);
            adam.step(params);
            loss_sum += lv * static_cast<double>(n);
        }
        rows.push_back({e, "train", "loss", loss_sum / static_cast<double>(order.size())});
        if (!test_set.empty()) {
            for (const auto& [name, value] : evaluate(model, test_set))
                rows.push_back({e, "test", name, value});
        }
    }
    Checkpoint ckpt = Checkpoint::from_model(model, cfg, cfg.epochs, rows);
    return TrainResult{std::move(model), std::move(ckpt), std::move(rows)};
}

TrainResult train(const TrainConfig& cfg) {
    if (cfg.dataset.empty()) throw std::invalid_argument("no dataset given");
    const std::vector<MolecularGraph> train_set = load_dataset(cfg.dataset);
    std::vector<MolecularGraph> test_set;
    if (!cfg.test_dataset.empty()) test_set = load_dataset(cfg.test_dataset);

    TrainResult r = train(cfg, train_set, test_set);

    const std::filesystem::path out(cfg.out);
    std::filesystem::create_directories(out);
    write_metrics_csv(out / "metrics.csv", r.metrics);
    save_checkpoint(out / "checkpoint.json", r.checkpoint);

    json manifest{{"config", cfg.to_json()},
                  {"model", r.model.spec().to_json()},
                  {"parameter_count", r.model.parameter_count()},
                  {"kernels", kernels::backend_name(kernels::current_backend())},
                  {"train_graphs", train_set.size()},
                  {"test_graphs", test_set.size()}};
    std::ofstream os(out / "manifest.json", std::ios::binary);
    os << manifest.dump(1) << '\n';
    if (!os) throw std::runtime_error("cannot write manifest in " + out.string());
    return r;
}

}  // namespace na
