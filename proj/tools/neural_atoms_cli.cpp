// neural-atoms <train|evaluate|generate|ewald|export-alloc> [flags]

#include "neural_atoms/csv.hpp"
#include "neural_atoms/ewald.hpp"
#include "neural_atoms/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>

namespace {

using nlohmann::json;

enum class Kind { Count, Real, Text };

// Flags that override a config key of the same name.
const std::vector<std::pair<std::string, Kind>> kConfigFlags = {
    {"backbone", Kind::Text},      {"augment", Kind::Text},     {"layers", Kind::Count},
    {"hidden", Kind::Count},       {"heads", Kind::Count},      {"k-strategy", Kind::Text},
    {"proportion", Kind::Real},    {"virtual-nodes", Kind::Count}, {"epochs", Kind::Count},
    {"lr", Kind::Real},            {"batch", Kind::Count},      {"seed", Kind::Count},
    {"task", Kind::Text},          {"dataset", Kind::Text},     {"test-dataset", Kind::Text},
    {"out", Kind::Text},
};

const std::map<std::string, std::string> kFlagHelp = {
    {"backbone", "gcn | gin"},
    {"augment", "none | neural-atoms | virtual-node"},
    {"layers", "number of GNN layers"},
    {"hidden", "hidden width"},
    {"heads", "attention heads"},
    {"k-strategy", "fixed | decremental | incremental"},
    {"proportion", "neural atoms per layer as a fraction of the average node count"},
    {"virtual-nodes", "virtual nodes per graph (augment=virtual-node)"},
    {"epochs", "training epochs"},
    {"lr", "Adam learning rate"},
    {"batch", "graphs per minibatch"},
    {"seed", "random seed"},
    {"task", "graph-classification | graph-regression | pair-contact"},
    {"dataset", "training dataset (JSON lines)"},
    {"test-dataset", "held-out dataset evaluated after every epoch"},
    {"out", "output directory"},
};

json overrides_to_json(const std::map<std::string, std::string>& given) {
    json j = json::object();
    for (const auto& [name, kind] : kConfigFlags) {
        auto it = given.find(name);
        if (it == given.end()) continue;
        if (kind == Kind::Text) j[name] = it->second;
        else j[name] = json::parse(it->second);
    }
    return j;
}

na::TrainConfig read_config(const std::string& path) {
    na::TrainConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config " + path);
    try {
        cfg.merge_json(json::parse(is));
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return cfg;
}

void print_metrics(const std::map<std::string, double>& m) {
    std::cout << "metric,value\n";
    for (const auto& [k, v] : m) std::cout << k << ',' << na::format_double(v) << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Neural atoms: graph message passing through learnable neural atoms"};
    app.name("neural-atoms");
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a model; writes metrics.csv, checkpoint.json, manifest.json");
    std::string config_path;
    std::map<std::string, std::string> overrides;
    train->add_option("--config", config_path, "JSON config; keys are the flag names below")->check(CLI::ExistingFile);
    for (const auto& [name, kind] : kConfigFlags) {
        auto* opt = train->add_option_function<std::string>(
            "--" + name, [&overrides, n = name](const std::string& v) { overrides[n] = v; }, kFlagHelp.at(name));
        if (kind == Kind::Count) opt->check(CLI::NonNegativeNumber & CLI::TypeValidator<std::uint64_t>());
        if (kind == Kind::Real) opt->check(CLI::Number);
    }

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint; prints metric,value lines");
    std::string eval_ckpt, eval_dataset;
    evaluate->add_option("--checkpoint", eval_ckpt, "checkpoint.json")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--dataset", eval_dataset, "dataset (default: the checkpoint's test or training set)");

    // generate
    auto* generate = app.add_subcommand("generate", "write the synthetic long-range path task");
    std::string gen_out;
    std::size_t gen_graphs = 1000, gen_len = 20, gen_colors = 8;
    std::uint64_t gen_seed = 0;
    generate->add_option("--out", gen_out, "output dataset path")->required();
    generate->add_option("--num-graphs", gen_graphs, "number of graphs")->capture_default_str();
    generate->add_option("--path-len", gen_len, "nodes per path")->capture_default_str();
    generate->add_option("--colors", gen_colors, "endpoint colours")->capture_default_str();
    generate->add_option("--seed", gen_seed, "random seed")->capture_default_str();

    // ewald
    auto* ewald = app.add_subcommand("ewald", "Ewald sum matrix heatmap of a periodic system");
    std::string sys_path, ewald_out;
    double threshold = 0.0;
    ewald->add_option("--system", sys_path, "system JSON (Z, positions, cell_edge, a, real_cutoff, recip_cutoff)")
        ->required()
        ->check(CLI::ExistingFile);
    ewald->add_option("--out", ewald_out, "heatmap CSV")->required();
    ewald->add_option("--threshold", threshold, "zero |x_ij| below this value")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    // export-alloc
    auto* alloc = app.add_subcommand("export-alloc", "write the head-averaged allocation matrix of every layer");
    std::string alloc_ckpt, alloc_dataset, alloc_out = "alloc";
    std::size_t alloc_graph = 0;
    alloc->add_option("--checkpoint", alloc_ckpt, "checkpoint.json")->required()->check(CLI::ExistingFile);
    alloc->add_option("--graph", alloc_graph, "graph index in the dataset")->capture_default_str();
    alloc->add_option("--dataset", alloc_dataset, "dataset (default: the checkpoint's training set)");
    alloc->add_option("--out", alloc_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const CLI::App* scope = &app;
        for (const auto* sub : app.get_subcommands()) scope = sub;
        std::cerr << scope->help();
        return 2;
    }

    if (train->parsed()) {
        na::TrainConfig cfg = read_config(config_path);
        cfg.merge_json(overrides_to_json(overrides));
        const auto result = na::train(cfg);
        for (const auto& r : result.metrics)
            if (r.epoch + 1 == cfg.epochs)
                std::cout << r.split << ' ' << r.metric << ' ' << na::format_double(r.value) << '\n';
        std::cout << "wrote " << cfg.out << "/{metrics.csv,checkpoint.json,manifest.json}\n";
    } else if (evaluate->parsed()) {
        const na::Checkpoint ckpt = na::load_checkpoint(eval_ckpt);
        std::string path = eval_dataset;
        if (path.empty()) path = ckpt.config.test_dataset.empty() ? ckpt.config.dataset : ckpt.config.test_dataset;
        const auto graphs = na::load_dataset(path);
        print_metrics(na::evaluate(ckpt.restore(), graphs));
    } else if (generate->parsed()) {
        na::save_dataset(gen_out, na::generate_lri_task(gen_graphs, gen_len, gen_colors, gen_seed));
        std::cout << "wrote " << gen_graphs << " graphs to " << gen_out << '\n';
    } else if (ewald->parsed()) {
        const auto m = na::ewald::ewald_sum_matrix(na::ewald::load_system(sys_path));
        na::ewald::write_interaction_heatmap(m, threshold, ewald_out);
        std::cout << "wrote " << ewald_out << '\n';
    } else if (alloc->parsed()) {
        const na::Checkpoint ckpt = na::load_checkpoint(alloc_ckpt);
        if (ckpt.spec.augment != na::Augment::NeuralAtoms)
            throw std::invalid_argument("checkpoint has no neural-atom layers (augment=" +
                                        std::string(na::to_string(ckpt.spec.augment)) + ")");
        const auto graphs = na::load_dataset(alloc_dataset.empty() ? ckpt.config.dataset : alloc_dataset);
        if (alloc_graph >= graphs.size())
            throw std::out_of_range("--graph " + std::to_string(alloc_graph) + " but the dataset has " +
                                    std::to_string(graphs.size()) + " graphs");
        const na::Model model = ckpt.restore();
        const na::GraphBatch batch = na::batch_one(graphs[alloc_graph]);
        na::Tape tape;
        const auto out = model.forward(tape, batch, /*record_trace=*/true);
        std::filesystem::create_directories(alloc_out);
        for (std::size_t l = 0; l < out.traces.size(); ++l) {
            const auto path = std::filesystem::path(alloc_out) / ("graph" + std::to_string(alloc_graph) + "_layer" + std::to_string(l) + ".csv");
            na::write_matrix_csv(path, out.traces[l].at(0).a_tilde, "atom");
            std::cout << "wrote " << path.string() << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
