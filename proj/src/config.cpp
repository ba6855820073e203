#include "incnet/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "incnet/error.hpp"

namespace incnet {

namespace {

using nlohmann::json;

std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_absolute()) return path.string();
    return (base / path).lexically_normal().string();
}

LayerSpec parse_layer(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv") {
        return LayerSpec::conv_spec(j.at("maps").get<std::size_t>(),
                                    j.at("kernel").get<std::size_t>(),
                                    j.value("stride", std::size_t{1}),
                                    j.value("padding", std::size_t{0}));
    }
    if (kind == "pool") {
        std::string op = j.value("op", "mean");
        if (op != "mean" && op != "max") throw ConfigError("pool op must be 'mean' or 'max'");
        return LayerSpec::pool_spec(op == "max" ? PoolKind::max : PoolKind::mean,
                                    j.at("window").get<std::size_t>());
    }
    if (kind == "relu") return LayerSpec::relu_spec();
    if (kind == "sigmoid") return LayerSpec::sigmoid_spec();
    if (kind == "fc") return LayerSpec::fc_spec(j.at("units").get<std::size_t>());
    if (kind == "head") return LayerSpec::head_spec(j.value("units", std::size_t{0}));
    throw ConfigError("unknown layer kind '" + kind + "'");
}

}  // namespace

Topology ExperimentConfig::topology_for(std::size_t head_width) const {
    std::vector<LayerSpec> resolved = layers;
    if (resolved.empty()) throw ConfigError("config field 'topology' is missing or empty");
    if (resolved.back().kind != LayerKind::softmax_head)
        throw ConfigError("topology must end with a 'head' layer");
    if (resolved.back().fan_out == 0) resolved.back().fan_out = head_width;
    return make_topology(data.input_shape, std::move(resolved), split_candidates);
}

IncrementPlan ExperimentConfig::make_plan(const std::vector<int>& available_classes) const {
    if (plan_random) return IncrementPlan::random(available_classes, plan_sizes, seed);
    return IncrementPlan::from_sets(plan_sets);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }

    std::filesystem::path base = std::filesystem::path(path).parent_path();
    ExperimentConfig c;
    try {
        c.seed = j.value("seed", std::uint64_t{1});
        c.output_dir = resolve(base, j.value("output_dir", std::string("out")));
        if (const char* env = std::getenv("INCNET_OUTPUT_DIR")) c.output_dir = env;
        c.model_file = j.contains("model_file")
                           ? resolve(base, j.at("model_file").get<std::string>())
                           : c.output_dir + "/model.incn";

        if (!j.contains("data")) throw ConfigError("config field 'data' is missing");
        const json& d = j.at("data");
        c.data.format = d.value("format", std::string("idx"));
        if (c.data.format != "idx" && c.data.format != "csv")
            throw ConfigError("data.format must be 'idx' or 'csv'");
        c.data.train_images = resolve(base, d.value("train_images", std::string()));
        c.data.train_labels = resolve(base, d.value("train_labels", std::string()));
        c.data.test_images = resolve(base, d.value("test_images", std::string()));
        c.data.test_labels = resolve(base, d.value("test_labels", std::string()));
        c.data.train_csv = resolve(base, d.value("train_csv", std::string()));
        c.data.test_csv = resolve(base, d.value("test_csv", std::string()));
        c.data.label_column = d.value("label_column", std::size_t{0});
        if (!d.contains("input_shape")) throw ConfigError("config field 'data.input_shape' is missing");
        c.data.input_shape = d.at("input_shape").get<std::vector<std::size_t>>();
        if (c.data.format == "idx") {
            if (c.data.train_images.empty() || c.data.train_labels.empty())
                throw ConfigError("config fields 'data.train_images'/'data.train_labels' are required");
            if (c.data.test_images.empty() || c.data.test_labels.empty())
                throw ConfigError("config fields 'data.test_images'/'data.test_labels' are required");
        } else {
            if (c.data.train_csv.empty() || c.data.test_csv.empty())
                throw ConfigError("config fields 'data.train_csv'/'data.test_csv' are required");
        }

        if (j.contains("topology"))
            for (const auto& lj : j.at("topology")) c.layers.push_back(parse_layer(lj));
        if (j.contains("split_candidates"))
            c.split_candidates = j.at("split_candidates").get<std::vector<std::size_t>>();

        if (j.contains("plan")) {
            const json& p = j.at("plan");
            if (p.is_array()) {
                c.plan_sets = p.get<std::vector<std::vector<int>>>();
            } else {
                c.plan_random = p.value("random", false);
                if (c.plan_random)
                    c.plan_sizes = p.at("sizes").get<std::vector<std::size_t>>();
                else
                    c.plan_sets = p.at("sets").get<std::vector<std::vector<int>>>();
            }
        }

        if (j.contains("hyperparams")) {
            const json& h = j.at("hyperparams");
            c.hp.learning_rate = h.value("learning_rate", c.hp.learning_rate);
            c.hp.momentum = h.value("momentum", c.hp.momentum);
            c.hp.batch_size = h.value("batch_size", c.hp.batch_size);
            c.hp.epochs = h.value("epochs", c.hp.epochs);
            c.hp.shuffle = h.value("shuffle", c.hp.shuffle);
            c.hp.track_epoch_accuracy = h.value("track_epoch_accuracy", c.hp.track_epoch_accuracy);
        }
        c.hp.seed = c.seed;
        c.hp.validate();

        if (j.contains("sharing")) {
            const json& s = j.at("sharing");
            std::string mode = s.value("mode", std::string("sweep"));
            if (mode == "sweep")
                c.sharing.mode = SharingSelectionConfig::Mode::sweep;
            else if (mode == "fixed")
                c.sharing.mode = SharingSelectionConfig::Mode::fixed;
            else
                throw ConfigError("sharing.mode must be 'sweep' or 'fixed'");
            c.sharing.tolerance_points = s.value("tolerance_points", 1.0);
            if (c.sharing.tolerance_points < 0.0)
                throw ConfigError("sharing.tolerance_points must be >= 0");
            if (s.contains("candidates"))
                c.sharing.candidates = s.at("candidates").get<std::vector<std::size_t>>();
            c.sharing.fixed_split = s.value("split_index", std::size_t{0});
        }

        std::string approach = j.value("approach", std::string("clone"));
        if (approach == "clone")
            c.increment.approach = IncrementApproach::clone;
        else if (approach == "widen")
            c.increment.approach = IncrementApproach::widen;
        else
            throw ConfigError("approach must be 'clone' or 'widen'");
        if (j.contains("widen")) {
            const json& w = j.at("widen");
            c.increment.widen_extra_maps = w.value("extra_maps", std::size_t{2});
            std::string init = w.value("init", std::string("matched_random"));
            if (init == "matched_random")
                c.increment.widen_init = WidenInit::matched_random;
            else if (init == "cloned")
                c.increment.widen_init = WidenInit::cloned;
            else
                throw ConfigError("widen.init must be 'matched_random' or 'cloned'");
        }

        if (j.contains("energy")) {
            const json& e = j.at("energy");
            c.energy.e_mac = e.value("e_mac", c.energy.e_mac);
            c.energy.e_read = e.value("e_read", c.energy.e_read);
            c.energy.e_write = e.value("e_write", c.energy.e_write);
            c.energy.word_bytes = e.value("word_bytes", c.energy.word_bytes);
        }
        c.energy.validate();

        if (j.contains("cost")) {
            const json& k = j.at("cost");
            c.cost.throughput = k.value("throughput", c.cost.throughput);
            c.cost.bandwidth = k.value("bandwidth", c.cost.bandwidth);
            c.cost.batch_size = k.value("batch_size", c.cost.batch_size);
            c.cost.preset = k.value("preset", std::string());
            c.cost.preset_classes = k.value("preset_classes", std::size_t{0});
            c.cost.model.update_macs_per_param =
                k.value("update_macs_per_param", c.cost.model.update_macs_per_param);
            c.cost.model.charge_input_grad =
                k.value("charge_input_grad", c.cost.model.charge_input_grad);
            c.cost.model.bn_macs = k.value("bn_macs", c.cost.model.bn_macs);
        }
        if (c.cost.throughput <= 0.0 || c.cost.bandwidth <= 0.0)
            throw ConfigError("cost.throughput and cost.bandwidth must be positive");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("invalid config " + path + ": " + e.what());
    }

    if (!c.plan_random && c.plan_sets.empty())
        throw ConfigError("config field 'plan' is missing");
    if (!c.plan_random) IncrementPlan::from_sets(c.plan_sets);  // validate disjointness now
    if (!c.layers.empty()) c.topology_for(c.plan_random ? 2 : c.plan_sets.front().size());
    return c;
}

}  // namespace incnet
