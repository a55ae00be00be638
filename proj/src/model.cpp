#include "neural_atoms/model.hpp"

#include <set>

namespace na {

using nlohmann::json;

Backbone parse_backbone(std::string_view s) {
    if (s == "gcn") return Backbone::Gcn;
    if (s == "gin") return Backbone::Gin;
    throw std::invalid_argument("unknown backbone '" + std::string(s) + "' (expected gcn|gin)");
}

Augment parse_augment(std::string_view s) {
    if (s == "none") return Augment::None;
    if (s == "neural-atoms") return Augment::NeuralAtoms;
    if (s == "virtual-node") return Augment::VirtualNode;
    throw std::invalid_argument("unknown augment '" + std::string(s) + "' (expected none|neural-atoms|virtual-node)");
}

Task parse_task(std::string_view s) {
    if (s == "graph-classification") return Task::GraphClassification;
    if (s == "graph-regression") return Task::GraphRegression;
    if (s == "pair-contact") return Task::PairContact;
    throw std::invalid_argument("unknown task '" + std::string(s) +
                                "' (expected graph-classification|graph-regression|pair-contact)");
}

std::string_view to_string(Backbone b) { return b == Backbone::Gcn ? "gcn" : "gin"; }

std::string_view to_string(Augment a) {
    switch (a) {
        case Augment::None: return "none";
        case Augment::NeuralAtoms: return "neural-atoms";
        case Augment::VirtualNode: return "virtual-node";
    }
    return "?";
}

std::string_view to_string(Task t) {
    switch (t) {
        case Task::GraphClassification: return "graph-classification";
        case Task::GraphRegression: return "graph-regression";
        case Task::PairContact: return "pair-contact";
    }
    return "?";
}

// ---- config --------------------------------------------------------------

void TrainConfig::validate() const {
    if (layers == 0 || hidden == 0 || heads == 0 || epochs == 0 || batch == 0 || virtual_nodes == 0)
        throw std::invalid_argument("layers, hidden, heads, epochs, batch and virtual-nodes must be positive");
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (!(proportion > 0.0 && proportion <= 1.0)) throw std::invalid_argument("proportion must lie in (0, 1]");
}

json TrainConfig::to_json() const {
    return json{{"backbone", to_string(backbone)},
                {"augment", to_string(augment)},
                {"layers", layers},
                {"hidden", hidden},
                {"heads", heads},
                {"k-strategy", to_string(k_strategy)},
                {"proportion", proportion},
                {"virtual-nodes", virtual_nodes},
                {"lr", lr},
                {"epochs", epochs},
                {"batch", batch},
                {"seed", seed},
                {"task", to_string(task)},
                {"dataset", dataset},
                {"test-dataset", test_dataset},
                {"out", out}};
}

namespace {

std::size_t positive_count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw std::invalid_argument("'" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

}  // namespace

void TrainConfig::merge_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "backbone") backbone = parse_backbone(v.get<std::string>());
        else if (key == "augment") augment = parse_augment(v.get<std::string>());
        else if (key == "layers") layers = positive_count(v, key);
        else if (key == "hidden") hidden = positive_count(v, key);
        else if (key == "heads") heads = positive_count(v, key);
        else if (key == "k-strategy") k_strategy = parse_k_strategy(v.get<std::string>());
        else if (key == "proportion") proportion = v.get<double>();
        else if (key == "virtual-nodes") virtual_nodes = positive_count(v, key);
        else if (key == "lr") lr = v.get<double>();
        else if (key == "epochs") epochs = positive_count(v, key);
        else if (key == "batch") batch = positive_count(v, key);
        else if (key == "seed") seed = v.get<std::uint64_t>();
        else if (key == "task") task = parse_task(v.get<std::string>());
        else if (key == "dataset") dataset = v.get<std::string>();
        else if (key == "test-dataset") test_dataset = v.get<std::string>();
        else if (key == "out") out = v.get<std::string>();
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

json ModelSpec::to_json() const {
    return json{{"backbone", to_string(backbone)}, {"augment", to_string(augment)},
                {"task", to_string(task)},         {"input_dim", input_dim},
                {"hidden", hidden},                {"heads", heads},
                {"output_dim", output_dim},        {"virtual_nodes", virtual_nodes},
                {"k_counts", k_counts},            {"layers", layers}};
}

ModelSpec ModelSpec::from_json(const json& j) {
    ModelSpec s;
    s.backbone = parse_backbone(j.at("backbone").get<std::string>());
    s.augment = parse_augment(j.at("augment").get<std::string>());
    s.task = parse_task(j.at("task").get<std::string>());
    s.input_dim = j.at("input_dim").get<std::size_t>();
    s.hidden = j.at("hidden").get<std::size_t>();
    s.heads = j.at("heads").get<std::size_t>();
    s.output_dim = j.at("output_dim").get<std::size_t>();
    s.virtual_nodes = j.at("virtual_nodes").get<std::size_t>();
    s.k_counts = j.at("k_counts").get<std::vector<std::size_t>>();
    s.layers = j.at("layers").get<std::size_t>();
    return s;
}

// ---- model ---------------------------------------------------------------

Model Model::build(const ModelSpec& spec, std::uint64_t seed) {
    if (spec.layers == 0 || spec.hidden == 0 || spec.input_dim == 0 || spec.output_dim == 0)
        throw std::invalid_argument("model spec has a zero dimension");
    if (spec.augment == Augment::NeuralAtoms && spec.k_counts.size() != spec.layers)
        throw std::invalid_argument("neural-atom schedule has " + std::to_string(spec.k_counts.size()) +
                                    " entries for " + std::to_string(spec.layers) + " layers");
    if (spec.task == Task::PairContact && spec.output_dim != 1)
        throw std::invalid_argument("pair-contact models score a single logit");

    Rng rng(seed);
    Model m;
    m.spec_ = spec;
    const std::size_t d = spec.hidden;
    for (std::size_t l = 0; l < spec.layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        m.gnn_.push_back(GnnLayer::init(spec.backbone, l == 0 ? spec.input_dim : d, d, rng, prefix));
        if (spec.augment == Augment::NeuralAtoms)
            m.atoms_.push_back(NeuralAtomLayerParams::init(spec.k_counts[l], d, spec.heads, rng, prefix + ".atoms"));
        else if (spec.augment == Augment::VirtualNode)
            m.vn_.push_back(VirtualNodeParams::init(d, rng, prefix + ".vn"));
    }
    if (spec.augment == Augment::VirtualNode) {
        m.vn_embedding_ = Parameter("vn.embedding", spec.virtual_nodes == 1
                                                        ? Tensor({1, d})
                                                        : random_normal({spec.virtual_nodes, d}, kQueryInitStd, rng));
    }
    if (spec.task == Task::PairContact) {
        m.head_w1_ = Parameter("head.w1", glorot(2 * d, d, rng));
        m.head_b1_ = Parameter("head.b1", Tensor({d}));
        m.head_w2_ = Parameter("head.w2", glorot(d, 1, rng));
        m.head_b2_ = Parameter("head.b2", Tensor({1}));
    } else {
        m.head_w1_ = Parameter("head.w", glorot(d, spec.output_dim, rng));
        m.head_b1_ = Parameter("head.b", Tensor({spec.output_dim}));
    }
    return m;
}

std::vector<const Parameter*> Model::parameters() const {
    std::vector<const Parameter*> out;
    for (std::size_t l = 0; l < gnn_.size(); ++l) {
        gnn_[l].collect(out);
        if (!atoms_.empty()) atoms_[l].collect(out);
        if (!vn_.empty()) vn_[l].collect(out);
    }
    if (!vn_.empty()) out.push_back(&vn_embedding_);
    out.push_back(&head_w1_);
    out.push_back(&head_b1_);
    if (spec_.task == Task::PairContact) {
        out.push_back(&head_w2_);
        out.push_back(&head_b2_);
    }
    return out;
}

std::vector<Parameter*> Model::mutable_parameters() {
    std::vector<Parameter*> out;
    for (const Parameter* p : parameters()) out.push_back(const_cast<Parameter*>(p));
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const Parameter* p : parameters()) n += p->value.size();
    return n;
}

BatchPairs collect_pairs(const GraphBatch& b) {
    BatchPairs out;
    for (std::size_t g = 0; g < b.size(); ++g) {
        const auto* pairs = std::get_if<std::vector<PairLabel>>(&b.graphs[g]->label);
        if (!pairs) throw std::invalid_argument("pair-contact task on a graph without pair labels");
        for (const auto& p : *pairs) {
            out.u.push_back(b.offsets[g] + p.u);
            out.v.push_back(b.offsets[g] + p.v);
            out.target.push_back(p.contact ? 1.0 : 0.0);
            out.graph.push_back(g);
        }
    }
    return out;
}

Model::Output Model::forward(Tape& tape, const GraphBatch& batch, bool record_trace) const {
    if (batch.features.cols() != spec_.input_dim)
        throw DimensionError("model expects " + std::to_string(spec_.input_dim) + " input features, batch has " +
                             std::to_string(batch.features.cols()));
    Output out;
    Var h = tape.constant(batch.features);
    Var vstate;
    if (spec_.augment == Augment::VirtualNode) vstate = initial_virtual_nodes(tape, vn_embedding_, batch.size());
    for (std::size_t l = 0; l < gnn_.size(); ++l) {
        h = gnn_[l].forward(h, batch);
        if (spec_.augment == Augment::NeuralAtoms) {
            BlockOutput block = neural_atom_enhance(h, batch, atoms_[l], record_trace);
            h = block.h;
            if (record_trace) out.traces.push_back(std::move(block.traces));
        } else if (spec_.augment == Augment::VirtualNode) {
            const VirtualNodeOutput v = virtual_node_layer(h, vstate, batch, vn_[l], spec_.virtual_nodes);
            h = v.h;
            vstate = v.vstate;
        }
    }
    out.embeddings = h;

    if (spec_.task == Task::PairContact) {
        const BatchPairs pairs = collect_pairs(batch);
        if (pairs.u.empty()) throw std::invalid_argument("batch has no labelled pairs");
        const Var hu = gather_rows(h, pairs.u);
        const Var hv = gather_rows(h, pairs.v);
        const Var z = concat_cols(std::vector<Var>{hu, hv});
        const Var hidden = relu(add_row(matmul(z, tape.parameter(head_w1_)), tape.parameter(head_b1_)));
        out.prediction = add_row(matmul(hidden, tape.parameter(head_w2_)), tape.parameter(head_b2_));
    } else {
        const Var pooled = segment_mean_rows(h, batch.offsets);
        out.prediction = add_row(matmul(pooled, tape.parameter(head_w1_)), tape.parameter(head_b1_));
    }
    return out;
}

ModelSpec make_spec(const TrainConfig& cfg, std::size_t feature_dim, std::size_t output_dim, double avg_nodes) {
    cfg.validate();
    ModelSpec s;
    s.backbone = cfg.backbone;
    s.augment = cfg.augment;
    s.task = cfg.task;
    s.input_dim = feature_dim;
    s.hidden = cfg.hidden;
    s.heads = cfg.heads;
    s.output_dim = output_dim;
    s.virtual_nodes = cfg.virtual_nodes;
    s.layers = cfg.layers;
    if (cfg.augment == Augment::NeuralAtoms)
        s.k_counts = compute_k_schedule(cfg.k_strategy, cfg.proportion, avg_nodes, cfg.layers).counts;
    return s;
}

Model build_model(const TrainConfig& cfg, std::size_t feature_dim, std::size_t output_dim, double avg_nodes) {
    return Model::build(make_spec(cfg, feature_dim, output_dim, avg_nodes), cfg.seed);
}

}  // namespace na
