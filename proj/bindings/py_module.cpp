// Python bindings for the main operations: tensor math, model graph,
// training pipeline, fusion, and the analytic cost model.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "incnet/config.hpp"
#include "incnet/corpus.hpp"
#include "incnet/cost_model.hpp"
#include "incnet/fusion.hpp"
#include "incnet/hash.hpp"
#include "incnet/model_io.hpp"
#include "incnet/pipeline.hpp"
#include "incnet/trainer.hpp"

namespace py = pybind11;
using namespace incnet;

namespace {

Tensor tensor_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    std::vector<std::size_t> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<std::size_t>(i)] =
        static_cast<std::size_t>(a.shape(i));
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor(std::move(shape), std::move(data));
}

py::array_t<double> tensor_to_numpy(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<double> a(shape);
    std::copy(t.data(), t.data() + t.size(), a.mutable_data());
    return a;
}

LabeledDataset dataset_from_numpy(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& inputs,
    const std::vector<int>& labels, const std::vector<std::size_t>& sample_shape) {
    if (static_cast<std::size_t>(inputs.shape(0)) != labels.size())
        throw DataError("inputs and labels must have equal leading dimension");
    std::size_t sample = shape_product(sample_shape);
    if (static_cast<std::size_t>(inputs.size()) != sample * labels.size())
        throw DataError("inputs size does not match sample shape");
    LabeledDataset d;
    const double* p = inputs.data();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::vector<double> data(p + i * sample, p + (i + 1) * sample);
        d.push(Tensor(sample_shape, std::move(data)), labels[i]);
    }
    d.finalize();
    return d;
}

Topology topology_from_specs(const std::vector<LayerSpec>& layers,
                             const std::vector<std::size_t>& input_shape,
                             const std::vector<std::size_t>& split_candidates) {
    return make_topology(input_shape, layers, split_candidates);
}

}  // namespace

PYBIND11_MODULE(_incnet, m) {
    m.doc() = "incremental convolutional training with partial network sharing";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");

    // --- tensor ops ---------------------------------------------------------
    m.def("conv2d_forward",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& input,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& kernels,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& bias,
             std::size_t stride, std::size_t padding) {
              return tensor_to_numpy(conv2d_forward(tensor_from_numpy(input),
                                                    tensor_from_numpy(kernels),
                                                    tensor_from_numpy(bias), stride, padding));
          },
          py::arg("input"), py::arg("kernels"), py::arg("bias"), py::arg("stride") = 1,
          py::arg("padding") = 0);
    m.def("fc_forward",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& input,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& weights,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& bias) {
              return tensor_to_numpy(fc_forward(tensor_from_numpy(input),
                                                tensor_from_numpy(weights),
                                                tensor_from_numpy(bias)));
          });
    m.def("softmax",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& logits) {
              return tensor_to_numpy(softmax(tensor_from_numpy(logits)));
          });
    m.def("softmax_xent",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& logits,
             std::size_t target) {
              SoftmaxXent r = softmax_xent(tensor_from_numpy(logits), target);
              return py::make_tuple(r.loss, tensor_to_numpy(r.logit_grad), tensor_to_numpy(r.probs));
          });

    // --- model graph --------------------------------------------------------
    py::class_<LayerSpec>(m, "LayerSpec")
        .def_static("conv", &LayerSpec::conv_spec, py::arg("maps"), py::arg("kernel"),
                    py::arg("stride") = 1, py::arg("padding") = 0)
        .def_static("pool",
                    [](const std::string& op, std::size_t window) {
                        return LayerSpec::pool_spec(op == "max" ? PoolKind::max : PoolKind::mean,
                                                    window);
                    },
                    py::arg("op"), py::arg("window"))
        .def_static("relu", &LayerSpec::relu_spec)
        .def_static("sigmoid", &LayerSpec::sigmoid_spec)
        .def_static("head", &LayerSpec::head_spec, py::arg("units"))
        .def_property_readonly("param_count", &LayerSpec::trainable_param_count);

    py::class_<Topology>(m, "Topology")
        .def(py::init(&topology_from_specs), py::arg("layers"), py::arg("input_shape"),
             py::arg("split_candidates") = std::vector<std::size_t>{})
        .def_property_readonly("split_candidates",
                               [](const Topology& t) { return t.split_candidates; })
        .def_property_readonly("total_params", &Topology::total_trainable_params)
        .def("sharing_fraction",
             [](const Topology& t, std::size_t split) { return sharing_fraction(t, split); })
        .def("describe", &Topology::describe);

    py::class_<SharingConfig>(m, "SharingConfig")
        .def_readonly("split_index", &SharingConfig::split_index)
        .def_readonly("shared_fraction", &SharingConfig::shared_fraction);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("final_test_accuracy", &TrainReport::final_test_accuracy)
        .def_readonly("best_test_accuracy", &TrainReport::best_test_accuracy)
        .def_readonly("iterations", &TrainReport::iterations)
        .def_readonly("params_trained", &TrainReport::params_trained)
        .def_readonly("params_frozen", &TrainReport::params_frozen)
        .def_readonly("epoch_mean_loss", &TrainReport::epoch_mean_loss);

    py::class_<SharingCurve>(m, "SharingCurve")
        .def_readonly("baseline_accuracy", &SharingCurve::baseline_accuracy)
        .def("points", [](const SharingCurve& c) {
            std::vector<py::tuple> out;
            for (const auto& p : c.points)
                out.push_back(py::make_tuple(p.config.shared_fraction, p.accuracy_percent,
                                             p.params_trained));
            return out;
        });

    py::class_<IncrementalModel>(m, "IncrementalModel")
        .def_property_readonly("branch_count", &IncrementalModel::branch_count)
        .def_property_readonly("classes", &IncrementalModel::all_classes)
        .def_property_readonly("selected",
                               [](const IncrementalModel& m) -> py::object {
                                   if (!m.selected) return py::none();
                                   return py::cast(*m.selected);
                               })
        .def("trunk_hash", [](const IncrementalModel& m) { return hash_hex(m.trunk_hash()); })
        .def("model_hash", [](const IncrementalModel& m) { return hash_hex(m.model_hash()); });

    py::class_<LabeledDataset>(m, "Dataset")
        .def_static("from_arrays", &dataset_from_numpy, py::arg("inputs"), py::arg("labels"),
                    py::arg("sample_shape"))
        .def_property_readonly("size", &LabeledDataset::size)
        .def_property_readonly("classes", [](const LabeledDataset& d) { return d.class_ids; });

    m.def("load_idx", &load_idx, py::arg("images_path"), py::arg("labels_path"));
    m.def("load_csv", &load_csv, py::arg("path"), py::arg("label_column"), py::arg("shape"));
    m.def("glyph_dataset", [](bool test, std::size_t per_class, std::uint64_t seed) {
        GlyphCorpusOptions opt;
        opt.train_per_class = per_class;
        opt.test_per_class = per_class;
        opt.seed = seed;
        return glyph_dataset(test, opt);
    }, py::arg("test") = false, py::arg("per_class") = 50, py::arg("seed") = 1);
    m.def("shape_dataset", [](bool test, std::size_t per_class, std::uint64_t seed) {
        ShapeCorpusOptions opt;
        opt.train_per_class = per_class;
        opt.test_per_class = per_class;
        opt.seed = seed;
        return shape_dataset(test, opt);
    }, py::arg("test") = false, py::arg("per_class") = 50, py::arg("seed") = 2);

    // --- training pipeline ---------------------------------------------------
    m.def("train_base",
          [](const Topology& topology, const LabeledDataset& train, const LabeledDataset* test,
             double lr, double momentum, std::size_t batch, std::size_t epochs,
             std::uint64_t seed) {
              Hyperparams hp;
              hp.learning_rate = lr;
              hp.momentum = momentum;
              hp.batch_size = batch;
              hp.epochs = epochs;
              hp.seed = seed;
              hp.track_epoch_accuracy = false;
              TrainReport report;
              IncrementalModel model = train_base(topology, train, test, hp, &report);
              return py::make_tuple(std::move(model), report);
          },
          py::arg("topology"), py::arg("train"), py::arg("test") = nullptr, py::arg("lr") = 0.1,
          py::arg("momentum") = 0.9, py::arg("batch") = 16, py::arg("epochs") = 10,
          py::arg("seed") = 1);
    m.def("sweep_sharing",
          [](const IncrementalModel& model, const LabeledDataset& probe_train,
             const LabeledDataset& probe_test, const std::vector<std::size_t>& candidates,
             double lr, double momentum, std::size_t batch, std::size_t epochs,
             std::uint64_t seed) {
              Hyperparams hp;
              hp.learning_rate = lr;
              hp.momentum = momentum;
              hp.batch_size = batch;
              hp.epochs = epochs;
              hp.seed = seed;
              hp.track_epoch_accuracy = false;
              return sweep_sharing(model, probe_train, probe_test, candidates, hp).curve;
          },
          py::arg("model"), py::arg("probe_train"), py::arg("probe_test"), py::arg("candidates"),
          py::arg("lr") = 0.1, py::arg("momentum") = 0.9, py::arg("batch") = 16,
          py::arg("epochs") = 10, py::arg("seed") = 1);
    m.def("select_optimal_sharing", &select_optimal_sharing, py::arg("curve"),
          py::arg("tolerance_points") = 1.0);
    m.def("set_sharing", [](IncrementalModel& model, std::size_t split) {
        model.selected = split == 0 ? SharingConfig{0, 0.0}
                                    : make_sharing_config(model.topology, split);
    });
    m.def("add_increment",
          [](IncrementalModel& model, std::size_t ordinal, const LabeledDataset& train,
             const LabeledDataset* test, double lr, double momentum, std::size_t batch,
             std::size_t epochs, std::uint64_t seed, const std::string& approach,
             std::size_t extra_maps) {
              Hyperparams hp;
              hp.learning_rate = lr;
              hp.momentum = momentum;
              hp.batch_size = batch;
              hp.epochs = epochs;
              hp.seed = seed;
              hp.track_epoch_accuracy = false;
              IncrementOptions opt;
              opt.approach = approach == "widen" ? IncrementApproach::widen
                                                 : IncrementApproach::clone;
              opt.widen_extra_maps = extra_maps;
              return add_increment(model, ordinal, train, test, hp, opt);
          },
          py::arg("model"), py::arg("ordinal"), py::arg("train"), py::arg("test") = nullptr,
          py::arg("lr") = 0.1, py::arg("momentum") = 0.9, py::arg("batch") = 16,
          py::arg("epochs") = 10, py::arg("seed") = 1, py::arg("approach") = "clone",
          py::arg("extra_maps") = 2);
    m.def("evaluate",
          [](const IncrementalModel& model, const LabeledDataset& test, const std::string& scope,
             std::size_t branch) {
              return evaluate(model, test,
                              scope == "updated" ? EvalScope::updated : EvalScope::branch, branch);
          },
          py::arg("model"), py::arg("test"), py::arg("scope") = "updated", py::arg("branch") = 0);
    m.def("fuse_predict", [](const IncrementalModel& model,
                             const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
        FusedPrediction f = fuse_predict(model, tensor_from_numpy(x));
        std::vector<py::array_t<double>> probs;
        for (const auto& p : f.per_branch_probs) probs.push_back(tensor_to_numpy(p));
        return py::make_tuple(f.global_class, f.winning_branch, probs);
    });

    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // --- cost model -----------------------------------------------------------
    m.def("cost_headline",
          [](const std::string& preset, double sharing, std::size_t batch) {
              auto net = preset_net(preset);
              if (!net) throw ConfigError("unknown preset '" + preset + "'");
              std::size_t boundary = sharing == 0.0 ? 0 : net->boundary_for_fraction(sharing);
              CostReport r = count_network(*net, boundary, batch, CostModelConfig{});
              EnergyTable table;
              energy_estimate(r, table);
              time_proxy(r, 1e12, 1e30);
              storage_requirement(r, *net, table);
              mem_access_saving(r);
              py::dict d;
              d["network"] = r.network;
              d["shared_fraction"] = r.shared_fraction;
              d["compute_energy_ratio"] = r.compute_energy_ratio;
              d["energy_ratio"] = r.energy_ratio;
              d["time_ratio"] = r.time_ratio;
              d["storage_reduction_percent"] = r.storage_reduction_percent;
              d["mem_access_saving_percent"] = r.mem_access_saving_percent;
              return d;
          },
          py::arg("preset"), py::arg("sharing") = 0.8, py::arg("batch") = 32);
}
