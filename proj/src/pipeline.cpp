#include "incnet/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "incnet/error.hpp"
#include "incnet/fusion.hpp"
#include "incnet/hash.hpp"
#include "incnet/model_io.hpp"
#include "incnet/rng.hpp"

namespace incnet {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void ensure_output_dir(const ExperimentConfig& config) {
    std::filesystem::create_directories(config.output_dir);
}

std::string out_path(const ExperimentConfig& config, const std::string& name) {
    return config.output_dir + "/" + name;
}

LabeledDataset load_split(const DataConfig& d, bool test) {
    if (d.format == "idx")
        return test ? load_idx(d.test_images, d.test_labels)
                    : load_idx(d.train_images, d.train_labels);
    return load_csv(test ? d.test_csv : d.train_csv, d.label_column, d.input_shape);
}

void check_input_shape(const LabeledDataset& data, const DataConfig& d) {
    if (!data.empty() && data.input_shape != d.input_shape) {
        Tensor probe(d.input_shape);
        throw DataError("dataset sample shape " + data.inputs.front().shape_str() +
                        " does not match configured input shape " + probe.shape_str());
    }
}

void append_access_log(const ExperimentConfig& config, const std::vector<std::size_t>& log,
                       bool truncate) {
    std::ofstream out(out_path(config, "access_log.csv"),
                      truncate ? std::ios::trunc : std::ios::app);
    if (truncate) out << "event,increment_ordinal\n";
    for (std::size_t ordinal : log) out << "consumed," << ordinal << "\n";
}

void write_train_report_csv(const std::string& path, const TrainReport& report) {
    std::ofstream out(path, std::ios::trunc);
    out << "epoch,mean_loss,test_accuracy_percent\n";
    for (std::size_t e = 0; e < report.epoch_mean_loss.size(); ++e) {
        out << (e + 1) << ',' << fmt(report.epoch_mean_loss[e]) << ',';
        if (e < report.epoch_test_accuracy.size()) out << fmt(report.epoch_test_accuracy[e]);
        out << "\n";
    }
    out << "final," << fmt(report.epoch_mean_loss.empty() ? 0.0 : report.epoch_mean_loss.back())
        << ',' << fmt(report.final_test_accuracy) << "\n";
}

// modeled seconds per training iteration for the CSV (deterministic; the
// measured wall clock goes to stdout only)
double modeled_seconds_per_iter(const ExperimentConfig& config, const Topology& topology,
                                std::size_t split) {
    std::optional<SharingConfig> sharing;
    if (split > 0) sharing = make_sharing_config(topology, split);
    CostReport r = count_network(topology, sharing, config.hp.batch_size, config.cost.model);
    time_proxy(r, config.cost.throughput, config.cost.bandwidth);
    return r.seconds_with;
}

IncrementStore make_store(const ExperimentConfig& config, const LoadedData& data) {
    IncrementPlan plan = config.make_plan(data.train.class_ids);
    return IncrementStore(data.train, data.test, std::move(plan));
}

}  // namespace

std::string default_model_path(const ExperimentConfig& config) { return config.model_file; }

LoadedData load_experiment_data(const ExperimentConfig& config) {
    LoadedData d;
    d.train = load_split(config.data, false);
    d.test = load_split(config.data, true);
    if (d.train.empty()) throw DataError("training dataset is empty");
    check_input_shape(d.train, config.data);
    check_input_shape(d.test, config.data);
    return d;
}

void run_train_base(const ExperimentConfig& config, const std::string& model_path) {
    ensure_output_dir(config);
    std::string path = model_path.empty() ? config.model_file : model_path;

    LoadedData data = load_experiment_data(config);
    IncrementStore store = make_store(config, data);

    LabeledDataset base_train = store.take_train(0);
    const LabeledDataset& base_test = store.test(0);
    Topology topology = config.topology_for(store.classes(0).size());

    Hyperparams hp = config.hp;
    hp.seed = derive_seed(config.seed, "train-base");
    TrainReport report;
    IncrementalModel model = train_base(topology, base_train, &base_test, hp, &report);

    if (config.increment.approach == IncrementApproach::widen) {
        auto conv = topology.last_conv_index();
        if (!conv) throw ConfigError("widen approach requires a conv layer");
        model.selected = make_sharing_config(topology, *conv);
    } else if (config.sharing.mode == SharingSelectionConfig::Mode::fixed) {
        model.selected = make_sharing_config(topology, config.sharing.fixed_split);
    }

    save_model(model, path);
    write_train_report_csv(out_path(config, "train_base_report.csv"), report);
    append_access_log(config, store.access_log(), /*truncate=*/true);

    std::cout << "model-hash: " << hash_hex(model.model_hash()) << "\n";
    std::cout << "base accuracy: " << report.final_test_accuracy << "% ("
              << report.params_trained << " params trained, "
              << report.seconds_per_iteration << " s/iter measured)\n";
}

void run_sweep(const ExperimentConfig& config, const std::string& model_path, bool resweep) {
    ensure_output_dir(config);
    std::string path = model_path.empty() ? config.model_file : model_path;
    IncrementalModel model = load_model(path);
    if (!model.branches.empty() && !resweep)
        throw ConfigError("sweep already ran; the first selection is reused for later "
                          "increments (pass --resweep to select again)");
    if (config.increment.approach == IncrementApproach::widen)
        throw ConfigError("the widen approach uses a fixed split; sweep applies to clone branches");

    LoadedData data = load_experiment_data(config);
    IncrementStore store = make_store(config, data);
    std::size_t probe_ordinal = model.increments_consumed();
    for (std::size_t i = 0; i < probe_ordinal; ++i) store.mark_consumed_externally(i);

    LabeledDataset probe_train = store.take_train(probe_ordinal);
    const LabeledDataset& probe_test = store.test(probe_ordinal);

    std::vector<std::size_t> candidates = config.sharing.candidates.empty()
                                              ? model.topology.split_candidates
                                              : config.sharing.candidates;
    Hyperparams hp = config.hp;
    hp.seed = derive_seed(config.seed, "sweep");
    SweepResult sweep = sweep_sharing(model, probe_train, probe_test, candidates, hp, 0);
    SharingConfig selected = select_optimal_sharing(sweep.curve, config.sharing.tolerance_points);

    // keep the probe branch trained at the selected configuration
    std::size_t keep = 0;
    for (std::size_t i = 0; i < sweep.curve.points.size(); ++i)
        if (sweep.curve.points[i].config == selected) keep = i;
    model.selected = selected;
    BranchModel branch = std::move(sweep.trained[keep]);
    branch.provenance.increment_ordinal = probe_ordinal;
    attach_branch(model, std::move(branch));

    std::ofstream csv(out_path(config, "sharing_curve.csv"), std::ios::trunc);
    csv << "shared_fraction,accuracy_percent,params_trained,seconds_per_iter,selected\n";
    for (const auto& p : sweep.curve.points) {
        csv << fmt(p.config.shared_fraction) << ',' << fmt(p.accuracy_percent) << ','
            << p.params_trained << ','
            << fmt(modeled_seconds_per_iter(config, model.topology, p.config.split_index)) << ','
            << (p.config == selected ? 1 : 0) << "\n";
    }
    csv.close();

    save_model(model, path);
    append_access_log(config, store.access_log(), /*truncate=*/false);

    std::cout << "selected sharing: split " << selected.split_index << ", fraction "
              << selected.shared_fraction << "\n";
    std::cout << "model-hash: " << hash_hex(model.model_hash()) << "\n";
}

void run_add(const ExperimentConfig& config, std::size_t ordinal, const std::string& model_path) {
    ensure_output_dir(config);
    std::string path = model_path.empty() ? config.model_file : model_path;
    IncrementalModel model = load_model(path);

    LoadedData data = load_experiment_data(config);
    IncrementStore store = make_store(config, data);
    std::size_t consumed = model.increments_consumed();
    for (std::size_t i = 0; i < consumed; ++i) store.mark_consumed_externally(i);

    std::uint64_t trunk_before = model.trunk_hash();
    std::vector<std::uint64_t> prior_hashes;
    for (std::size_t k = 0; k <= model.branches.size(); ++k)
        prior_hashes.push_back(model.branch_hash(k));

    LabeledDataset inc_train = store.take_train(ordinal);
    const LabeledDataset& inc_test = store.test(ordinal);

    Hyperparams hp = config.hp;
    hp.seed = config.seed;
    TrainReport report = add_increment(model, ordinal, inc_train, &inc_test, hp, config.increment);

    std::uint64_t trunk_after = model.trunk_hash();
    if (trunk_before != trunk_after)
        throw NumericError("trunk parameters changed during an increment");
    for (std::size_t k = 0; k < prior_hashes.size(); ++k)
        if (model.branch_hash(k) != prior_hashes[k])
            throw NumericError("previously attached branch " + std::to_string(k) +
                               " changed during an increment");

    save_model(model, path);
    write_train_report_csv(
        out_path(config, "increment_" + std::to_string(ordinal) + "_report.csv"), report);
    append_access_log(config, store.access_log(), /*truncate=*/false);

    std::cout << "trunk-hash before: " << hash_hex(trunk_before) << "\n";
    std::cout << "trunk-hash after:  " << hash_hex(trunk_after) << "\n";
    std::cout << "increment " << ordinal << " accuracy: " << report.final_test_accuracy << "% ("
              << report.params_trained << " trained / " << report.params_frozen << " frozen)\n";
    std::cout << "model-hash: " << hash_hex(model.model_hash()) << "\n";
}

double run_eval(const ExperimentConfig& config, const std::string& scope,
                const std::string& model_path) {
    ensure_output_dir(config);
    std::string path = model_path.empty() ? config.model_file : model_path;
    IncrementalModel model = load_model(path);

    LoadedData data = load_experiment_data(config);
    IncrementStore store = make_store(config, data);

    double accuracy = 0.0;
    std::ofstream csv(out_path(config, "eval_routing.csv"), std::ios::trunc);
    csv << "branch,routed,correct\n";

    if (scope == "updated") {
        LabeledDataset test = store.test_union(model.increments_consumed() - 1);
        FusedEval eval = evaluate_fused(model, test);
        accuracy = eval.accuracy_percent;
        for (std::size_t k = 0; k < eval.routing_counts.size(); ++k)
            csv << k << ',' << eval.routing_counts[k] << ',' << eval.routing_correct[k] << "\n";
    } else if (scope.rfind("branch:", 0) == 0) {
        std::size_t ordinal = 0;
        try {
            ordinal = std::stoul(scope.substr(7));
        } catch (const std::exception&) {
            throw ConfigError("bad eval scope '" + scope + "'");
        }
        std::size_t set = ordinal == 0
                              ? 0
                              : model.branches.at(ordinal - 1).provenance.increment_ordinal;
        const LabeledDataset& test = store.test(set);
        accuracy = evaluate(model, test, EvalScope::branch, ordinal);
        std::size_t correct = static_cast<std::size_t>(
            std::llround(accuracy / 100.0 * static_cast<double>(test.size())));
        csv << ordinal << ',' << test.size() << ',' << correct << "\n";
    } else {
        throw ConfigError("eval scope must be 'updated' or 'branch:<ordinal>'");
    }

    std::cout << "scope " << scope << " accuracy: " << accuracy << "%\n";
    return accuracy;
}

CostReport run_cost(const ExperimentConfig& config, double sharing_fraction) {
    ensure_output_dir(config);
    if (sharing_fraction < 0.0 || sharing_fraction >= 1.0)
        throw ConfigError("sharing fraction must lie in [0, 1)");

    CostNet net;
    const PresetReference* reference = nullptr;
    PresetReference ref_store;
    if (!config.cost.preset.empty()) {
        auto preset = preset_net(config.cost.preset, config.cost.preset_classes);
        if (!preset) throw ConfigError("unknown cost preset '" + config.cost.preset + "'");
        net = std::move(*preset);
        if (config.cost.preset == "resnet101") {
            ref_store = resnet101_reference();
            reference = &ref_store;
        } else if (config.cost.preset == "resnet34") {
            ref_store = resnet34_reference();
            reference = &ref_store;
        }
    } else {
        std::size_t head = config.plan_random ? config.plan_sizes.at(0) : config.plan_sets.at(0).size();
        net = cost_net_from_topology(config.topology_for(head));
    }

    std::size_t boundary = sharing_fraction == 0.0 ? 0 : net.boundary_for_fraction(sharing_fraction);
    CostReport report = count_network(net, boundary, config.cost.batch_size, config.cost.model);
    energy_estimate(report, config.energy);
    time_proxy(report, config.cost.throughput, config.cost.bandwidth);
    storage_requirement(report, net, config.energy);
    mem_access_saving(report);

    std::ofstream csv(out_path(config, "cost_report.csv"), std::ios::trunc);
    csv << "layer,phase,macs_fwd,macs_bwd,macs_upd,mem_reads,mem_writes,params\n";
    OpCounts totals;
    for (const auto& row : report.per_layer_with) {
        totals += row.counts;
        csv << row.label << ',' << cost_phase_name(row.phase) << ',' << row.counts.macs_forward
            << ',' << row.counts.macs_backward << ',' << row.counts.macs_update << ','
            << row.counts.mem_reads << ',' << row.counts.mem_writes << ',' << row.counts.params
            << "\n";
    }
    csv << "total,," << totals.macs_forward << ',' << totals.macs_backward << ','
        << totals.macs_update << ',' << totals.mem_reads << ',' << totals.mem_writes << ','
        << totals.params << "\n";
    csv.close();

    std::string summary = render_cost_summary(report, reference);
    std::ofstream sum(out_path(config, "cost_summary.txt"), std::ios::trunc);
    sum << summary;
    std::cout << summary;
    return report;
}

}  // namespace incnet
