#include "incnet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>
#include <map>
#include <set>

#include "incnet/error.hpp"
#include "incnet/fusion.hpp"
#include "incnet/rng.hpp"

namespace incnet {

namespace {

// A trainable view: read-only trunk below the split, mutable tail above it.
// The tail's first layer may carry a frozen conv prefix (widened branches).
struct TrainTarget {
    const std::vector<LayerSpec>* trunk_specs = nullptr;    // may be null (split 0)
    const std::vector<LayerParams>* trunk_params = nullptr;
    std::size_t split = 0;
    std::vector<LayerSpec>* tail_specs = nullptr;
    std::vector<LayerParams>* tail_params = nullptr;
    const FrozenPrefix* frozen_prefix = nullptr;
    std::vector<int> class_map;  // global label ids in head order
};

std::size_t tail_param_count(const TrainTarget& t) {
    std::size_t n = 0;
    for (const auto& lp : *t.tail_params)
        for (const auto& p : lp) n += p.size();
    return n;
}

std::size_t trunk_param_count(const TrainTarget& t) {
    std::size_t n = 0;
    if (t.trunk_params)
        for (std::size_t i = 0; i < t.split; ++i)
            for (const auto& p : (*t.trunk_params)[i]) n += p.size();
    if (t.frozen_prefix) n += t.frozen_prefix->kernels.size() + t.frozen_prefix->bias.size();
    return n;
}

Tensor trunk_forward(const TrainTarget& t, const Tensor& input) {
    if (!t.trunk_specs || t.split == 0) return input;
    std::vector<LayerSpec> specs(t.trunk_specs->begin(), t.trunk_specs->begin() + t.split);
    std::vector<LayerParams> params(t.trunk_params->begin(), t.trunk_params->begin() + t.split);
    return forward_stack(specs, params, input);
}

// forward through the tail, recording activations for backward
Tensor tail_forward(const TrainTarget& t, const Tensor& at_split, ForwardTrace& trace,
                    Tensor* stacked_out = nullptr) {
    const auto& specs = *t.tail_specs;
    const auto& params = *t.tail_params;
    trace.inputs.clear();
    trace.pool_records.assign(specs.size(), std::nullopt);

    Tensor x = at_split;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        trace.inputs.push_back(x);
        const LayerSpec& s = specs[i];
        switch (s.kind) {
            case LayerKind::conv:
                if (i == 0 && t.frozen_prefix) {
                    Tensor frozen = conv2d_forward(x, t.frozen_prefix->kernels,
                                                   t.frozen_prefix->bias, s.stride, s.padding);
                    Tensor fresh = conv2d_forward(x, params[0][0], params[0][1], s.stride, s.padding);
                    Tensor stacked({s.out_channels, frozen.extent(1), frozen.extent(2)});
                    std::copy(frozen.data(), frozen.data() + frozen.size(), stacked.data());
                    std::copy(fresh.data(), fresh.data() + fresh.size(),
                              stacked.data() + frozen.size());
                    if (stacked_out) *stacked_out = stacked;
                    x = std::move(stacked);
                } else {
                    x = conv2d_forward(x, params[i][0], params[i][1], s.stride, s.padding);
                }
                break;
            case LayerKind::pool: {
                auto [out, rec] = pool_forward(x, s.pool_kind, s.window);
                x = std::move(out);
                trace.pool_records[i] = std::move(rec);
                break;
            }
            case LayerKind::relu:
                x = relu_forward(x);
                break;
            case LayerKind::sigmoid:
                x = sigmoid_forward(x);
                break;
            case LayerKind::fc:
            case LayerKind::softmax_head:
                x = fc_forward(x, params[i][0], params[i][1]);
                break;
        }
    }
    trace.inputs.push_back(x);
    return x;
}

// index of the lowest tail layer whose parameters train; gradient flow stops
// there (everything below is frozen or parameter-free)
std::size_t first_param_layer(const std::vector<LayerSpec>& specs) {
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].has_params()) return i;
    throw ConfigError("trainable view has no parametric layer");
}

// backward through the tail; accumulates parameter gradients into grads
// (same ragged structure as tail_params)
void tail_backward(const TrainTarget& t, const ForwardTrace& trace, const Tensor& logit_grad,
                   std::vector<LayerParams>& grads) {
    const auto& specs = *t.tail_specs;
    const auto& params = *t.tail_params;
    std::size_t stop = first_param_layer(specs);
    Tensor grad = logit_grad;
    for (std::size_t ii = specs.size(); ii-- > 0;) {
        const LayerSpec& s = specs[ii];
        bool need_input_grad = ii > stop;
        switch (s.kind) {
            case LayerKind::conv: {
                if (ii == 0 && t.frozen_prefix) {
                    // only the fresh maps train; slice their output-grad rows
                    std::size_t frozen_maps = t.frozen_prefix->kernels.extent(0);
                    std::size_t fresh_maps = params[0][0].extent(0);
                    std::size_t hw = grad.extent(1) * grad.extent(2);
                    Tensor slice({fresh_maps, grad.extent(1), grad.extent(2)});
                    std::copy(grad.data() + frozen_maps * hw,
                              grad.data() + (frozen_maps + fresh_maps) * hw, slice.data());
                    LayerGrad g = conv2d_backward(trace.inputs[0], params[0][0], slice, s.stride,
                                                  s.padding, false);
                    for (std::size_t p = 0; p < g.param_grads.size(); ++p)
                        for (std::size_t k = 0; k < g.param_grads[p].size(); ++k)
                            grads[ii][p][k] += g.param_grads[p][k];
                    return;
                }
                LayerGrad g = conv2d_backward(trace.inputs[ii], params[ii][0], grad, s.stride,
                                              s.padding, need_input_grad);
                for (std::size_t p = 0; p < g.param_grads.size(); ++p)
                    for (std::size_t k = 0; k < g.param_grads[p].size(); ++k)
                        grads[ii][p][k] += g.param_grads[p][k];
                if (!need_input_grad) return;
                grad = std::move(g.input_grad);
                break;
            }
            case LayerKind::pool:
                grad = pool_backward(*trace.pool_records[ii], grad);
                break;
            case LayerKind::relu:
                grad = relu_backward(trace.inputs[ii], grad);
                break;
            case LayerKind::sigmoid:
                grad = sigmoid_backward(trace.inputs[ii + 1], grad);
                break;
            case LayerKind::fc:
            case LayerKind::softmax_head: {
                LayerGrad g = fc_backward(trace.inputs[ii], params[ii][0], grad, need_input_grad);
                for (std::size_t p = 0; p < g.param_grads.size(); ++p)
                    for (std::size_t k = 0; k < g.param_grads[p].size(); ++k)
                        grads[ii][p][k] += g.param_grads[p][k];
                if (!need_input_grad) return;
                grad = std::move(g.input_grad);
                break;
            }
        }
    }
}

std::map<int, std::size_t> local_index_of(const std::vector<int>& class_map) {
    std::map<int, std::size_t> m;
    for (std::size_t i = 0; i < class_map.size(); ++i) m[class_map[i]] = i;
    return m;
}

double target_accuracy(const TrainTarget& t, const LabeledDataset& test) {
    if (test.empty()) return 0.0;
    auto local = local_index_of(t.class_map);
    std::size_t correct = 0;
    ForwardTrace trace;
    for (std::size_t i = 0; i < test.size(); ++i) {
        auto it = local.find(test.labels[i]);
        if (it == local.end())
            throw DataError("evaluation label " + std::to_string(test.labels[i]) +
                            " outside the trained class set");
        Tensor logits = tail_forward(t, trunk_forward(t, test.inputs[i]), trace);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < logits.size(); ++j)
            if (logits[j] > logits[arg]) arg = j;
        if (arg == it->second) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / test.size();
}

TrainReport train_target(TrainTarget& t, const LabeledDataset& train,
                         const LabeledDataset* test, const Hyperparams& hp) {
    hp.validate();
    if (train.empty()) throw DataError("training dataset is empty");
    auto local = local_index_of(t.class_map);
    for (int label : train.class_ids)
        if (!local.count(label))
            throw DataError("training label " + std::to_string(label) +
                            " outside the declared class set");

    TrainReport report;
    report.params_trained = tail_param_count(t);
    report.params_frozen = trunk_param_count(t);

    // velocity state mirrors the tail parameter structure
    std::vector<LayerParams> velocity(t.tail_params->size());
    for (std::size_t i = 0; i < t.tail_params->size(); ++i)
        for (const auto& p : (*t.tail_params)[i]) velocity[i].push_back(Tensor(p.shape()));

    // trunk activations never change during tail training; precompute them
    std::vector<Tensor> at_split;
    at_split.reserve(train.size());
    for (const auto& x : train.inputs) at_split.push_back(trunk_forward(t, x));

    Rng shuffle_rng(derive_seed(hp.seed, "shuffle"));
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto started = std::chrono::steady_clock::now();
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        if (hp.shuffle) shuffle_rng.shuffle(order);
        double loss_sum = 0.0;

        std::size_t at = 0;
        while (at < order.size()) {
            std::size_t batch = std::min(hp.batch_size, order.size() - at);
            std::vector<LayerParams> grads(t.tail_params->size());
            for (std::size_t i = 0; i < t.tail_params->size(); ++i)
                for (const auto& p : (*t.tail_params)[i]) grads[i].push_back(Tensor(p.shape()));

            ForwardTrace trace;
            for (std::size_t b = 0; b < batch; ++b) {
                std::size_t idx = order[at + b];
                Tensor logits = tail_forward(t, at_split[idx], trace);
                SoftmaxXent sx = softmax_xent(logits, local.at(train.labels[idx]));
                loss_sum += sx.loss;
                tail_backward(t, trace, sx.logit_grad, grads);
            }

            double scale = 1.0 / static_cast<double>(batch);
            for (std::size_t i = 0; i < t.tail_params->size(); ++i) {
                for (std::size_t p = 0; p < (*t.tail_params)[i].size(); ++p) {
                    Tensor& g = grads[i][p];
                    for (std::size_t k = 0; k < g.size(); ++k) g[k] *= scale;
                    SgdResult r = sgd_update((*t.tail_params)[i][p], g, velocity[i][p],
                                             hp.learning_rate, hp.momentum);
                    (*t.tail_params)[i][p] = std::move(r.params);
                    velocity[i][p] = std::move(r.velocity);
                }
            }
            report.iterations += 1;
            at += batch;
        }

        double mean_loss = loss_sum / static_cast<double>(train.size());
        if (!std::isfinite(mean_loss))
            throw NumericError("training diverged (non-finite loss) at epoch " +
                               std::to_string(epoch + 1));
        report.epoch_mean_loss.push_back(mean_loss);
        if (test && hp.track_epoch_accuracy)
            report.epoch_test_accuracy.push_back(target_accuracy(t, *test));
    }
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    report.seconds_per_iteration =
        report.iterations ? elapsed.count() / static_cast<double>(report.iterations) : 0.0;

    if (test) {
        report.final_test_accuracy = target_accuracy(t, *test);
        report.best_test_accuracy = report.final_test_accuracy;
        report.best_epoch = hp.epochs;
        for (std::size_t e = 0; e < report.epoch_test_accuracy.size(); ++e) {
            if (report.epoch_test_accuracy[e] > report.best_test_accuracy) {
                report.best_test_accuracy = report.epoch_test_accuracy[e];
                report.best_epoch = e + 1;
            }
        }
    }
    return report;
}

TrainTarget branch_target(const IncrementalModel& model, BranchModel& branch) {
    TrainTarget t;
    t.trunk_specs = &model.topology.layers;
    t.trunk_params = &model.base_params;
    t.split = branch.split_index;
    t.tail_specs = &branch.specs;
    t.tail_params = &branch.params;
    t.frozen_prefix = branch.frozen_prefix ? &*branch.frozen_prefix : nullptr;
    t.class_map = branch.class_map;
    return t;
}

std::vector<int> dataset_classes(const LabeledDataset& data) {
    if (data.empty()) throw DataError("dataset is empty");
    return data.class_ids;
}

std::size_t env_threads() {
    if (const char* v = std::getenv("INCNET_THREADS")) {
        long n = std::strtol(v, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return 1;
}

}  // namespace

void Hyperparams::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
}

IncrementalModel train_base(const Topology& topology, const LabeledDataset& train_data,
                            const LabeledDataset* test_data, const Hyperparams& hp,
                            TrainReport* report_out) {
    std::vector<int> classes = dataset_classes(train_data);
    IncrementalModel model = make_base_model(topology, classes, hp.seed);

    TrainTarget t;
    t.split = 0;
    t.tail_specs = &model.topology.layers;
    t.tail_params = &model.base_params;
    t.class_map = model.base_class_map;
    TrainReport report = train_target(t, train_data, test_data, hp);
    if (report_out) *report_out = report;
    return model;
}

BranchResult train_branch(const IncrementalModel& model, const SharingConfig& config,
                          const LabeledDataset& new_train, const LabeledDataset* new_test,
                          const Hyperparams& hp) {
    std::vector<int> classes = dataset_classes(new_train);
    std::set<int> existing;
    for (int c : model.all_classes()) existing.insert(c);
    for (int c : classes)
        if (existing.count(c))
            throw DataError("new-class data overlaps learned class " + std::to_string(c));

    BranchResult r;
    r.branch = clone_branch(model, config, classes, derive_seed(hp.seed, "branch"));
    TrainTarget t = branch_target(model, r.branch);
    r.report = train_target(t, new_train, new_test, hp);
    return r;
}

BranchResult train_unshared_baseline(const IncrementalModel& model,
                                     const LabeledDataset& new_train,
                                     const LabeledDataset* new_test, const Hyperparams& hp) {
    std::vector<int> classes = dataset_classes(new_train);
    BranchResult r;
    r.branch = clone_branch(model, SharingConfig{0, 0.0}, classes, derive_seed(hp.seed, "branch"));
    TrainTarget t = branch_target(model, r.branch);
    if (hp.epochs == 0) {
        t.class_map = r.branch.class_map;
        r.report.params_trained = r.branch.trainable_param_count();
        r.report.final_test_accuracy = new_test ? target_accuracy(t, *new_test) : 0.0;
        r.report.best_test_accuracy = r.report.final_test_accuracy;
        return r;
    }
    r.report = train_target(t, new_train, new_test, hp);
    return r;
}

BranchResult train_unshared_from_branch(const IncrementalModel& model,
                                        const BranchModel& branch_init,
                                        const LabeledDataset& new_train,
                                        const LabeledDataset* new_test, const Hyperparams& hp) {
    BranchResult r;
    BranchModel& full = r.branch;
    full.split_index = 0;
    for (std::size_t i = 0; i < branch_init.split_index; ++i) {
        full.specs.push_back(model.topology.layers[i]);
        full.params.push_back(model.base_params[i]);
    }
    for (std::size_t i = 0; i < branch_init.specs.size(); ++i) {
        full.specs.push_back(branch_init.specs[i]);
        if (i == 0 && branch_init.frozen_prefix) {
            // merge the widened conv into one trainable kernel stack
            const Tensor& fk = branch_init.frozen_prefix->kernels;
            const Tensor& nk = branch_init.params[0][0];
            Tensor merged({fk.extent(0) + nk.extent(0), fk.extent(1), fk.extent(2), fk.extent(3)});
            std::copy(fk.data(), fk.data() + fk.size(), merged.data());
            std::copy(nk.data(), nk.data() + nk.size(), merged.data() + fk.size());
            Tensor merged_bias({fk.extent(0) + nk.extent(0)});
            for (std::size_t j = 0; j < fk.extent(0); ++j)
                merged_bias[j] = branch_init.frozen_prefix->bias[j];
            for (std::size_t j = 0; j < nk.extent(0); ++j)
                merged_bias[fk.extent(0) + j] = branch_init.params[0][1][j];
            full.params.push_back(LayerParams{});
            full.params.back().push_back(std::move(merged));
            full.params.back().push_back(std::move(merged_bias));
        } else {
            full.params.push_back(branch_init.params[i]);
        }
    }
    full.class_map = dataset_classes(new_train);
    full.provenance.seed = hp.seed;

    TrainTarget t;
    t.split = 0;
    t.tail_specs = &full.specs;
    t.tail_params = &full.params;
    t.class_map = full.class_map;
    if (hp.epochs == 0) {
        r.report.params_trained = full.trainable_param_count();
        r.report.final_test_accuracy = new_test ? target_accuracy(t, *new_test) : 0.0;
        r.report.best_test_accuracy = r.report.final_test_accuracy;
        return r;
    }
    r.report = train_target(t, new_train, new_test, hp);
    return r;
}

TrainReport train_pending_branch(IncrementalModel& model, const LabeledDataset& new_train,
                                 const LabeledDataset* new_test, const Hyperparams& hp) {
    if (model.branches.empty() || !model.branches.back().class_map.empty())
        throw ConfigError("no pending branch to train (call widen_last_conv first)");
    BranchModel& branch = model.branches.back();
    std::vector<int> classes = dataset_classes(new_train);
    if (classes.size() != branch.specs.back().fan_out)
        throw ConfigError("pending branch head width " +
                          std::to_string(branch.specs.back().fan_out) +
                          " does not match " + std::to_string(classes.size()) + " new classes");
    std::set<int> existing;
    for (int c : model.base_class_map) existing.insert(c);
    for (const auto& b : model.branches) existing.insert(b.class_map.begin(), b.class_map.end());
    for (int c : classes)
        if (existing.count(c))
            throw DataError("new-class data overlaps learned class " + std::to_string(c));

    branch.class_map = classes;
    TrainTarget t = branch_target(model, branch);
    return train_target(t, new_train, new_test, hp);
}

SweepResult sweep_sharing(const IncrementalModel& model, const LabeledDataset& probe_train,
                          const LabeledDataset& probe_test,
                          const std::vector<std::size_t>& candidate_splits, const Hyperparams& hp,
                          std::size_t threads) {
    if (candidate_splits.size() < 2)
        throw ConfigError("sweep needs at least 2 candidate splits");
    if (threads == 0) threads = env_threads();
    {
        std::set<int> existing;
        for (int c : model.all_classes()) existing.insert(c);
        for (int c : probe_train.class_ids)
            if (existing.count(c))
                throw DataError("sweep probe data overlaps learned class " + std::to_string(c));
    }

    std::vector<std::size_t> splits = candidate_splits;
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

    struct Job {
        std::size_t split;
        Hyperparams hp;
    };
    std::vector<Job> jobs;
    {
        Hyperparams base_hp = hp;
        base_hp.seed = derive_seed(hp.seed, "sweep-baseline");
        jobs.push_back({0, base_hp});
    }
    for (std::size_t s : splits) {
        Hyperparams candidate_hp = hp;
        candidate_hp.seed = derive_seed(hp.seed, "sweep-split-" + std::to_string(s));
        jobs.push_back({s, candidate_hp});
    }

    auto run_job = [&](const Job& job) -> BranchResult {
        if (job.split == 0)
            return train_unshared_baseline(model, probe_train, &probe_test, job.hp);
        return train_branch(model, make_sharing_config(model.topology, job.split), probe_train,
                            &probe_test, job.hp);
    };

    std::vector<BranchResult> results(jobs.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            try {
                results[i] = run_job(jobs[i]);
            } catch (const Error& e) {
                throw NumericError("sweep candidate at split " + std::to_string(jobs[i].split) +
                                   " failed: " + e.what());
            }
        }
    } else {
        std::vector<std::future<BranchResult>> futures;
        futures.reserve(jobs.size());
        for (const auto& job : jobs)
            futures.push_back(std::async(std::launch::async, run_job, job));
        for (std::size_t i = 0; i < futures.size(); ++i) {
            try {
                results[i] = futures[i].get();
            } catch (const Error& e) {
                throw NumericError("sweep candidate at split " + std::to_string(jobs[i].split) +
                                   " failed: " + e.what());
            }
        }
    }

    SweepResult out;
    // jobs were built in ascending split order, which is ascending fraction
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        SharingPoint p;
        p.config = jobs[i].split == 0 ? SharingConfig{0, 0.0}
                                      : make_sharing_config(model.topology, jobs[i].split);
        p.accuracy_percent = results[i].report.final_test_accuracy;
        p.params_trained = results[i].report.params_trained;
        out.curve.points.push_back(p);
        out.trained.push_back(std::move(results[i].branch));
    }
    // drop duplicate fractions (parameter-free boundaries), keeping the
    // largest split — identical accuracy, more savings
    for (std::size_t i = 1; i < out.curve.points.size();) {
        if (out.curve.points[i].config.shared_fraction ==
            out.curve.points[i - 1].config.shared_fraction) {
            out.curve.points.erase(out.curve.points.begin() + (i - 1));
            out.trained.erase(out.trained.begin() + (i - 1));
        } else {
            ++i;
        }
    }
    out.curve.baseline_accuracy = out.curve.points.front().accuracy_percent;
    return out;
}

SharingConfig select_optimal_sharing(const SharingCurve& curve, double tolerance_points) {
    if (curve.points.empty()) throw ConfigError("cannot select from an empty sharing curve");
    if (tolerance_points < 0.0) throw ConfigError("tolerance must be >= 0");
    double floor = curve.baseline_accuracy - tolerance_points;
    SharingConfig best = curve.points.front().config;
    double best_fraction = -1.0;
    for (const auto& p : curve.points) {
        if (p.accuracy_percent >= floor && p.config.shared_fraction >= best_fraction) {
            best = p.config;
            best_fraction = p.config.shared_fraction;
        }
    }
    return best;
}

TrainReport add_increment(IncrementalModel& model, std::size_t ordinal,
                          const LabeledDataset& new_train, const LabeledDataset* new_test,
                          const Hyperparams& hp, const IncrementOptions& options) {
    Hyperparams inc_hp = hp;
    inc_hp.seed = derive_seed(hp.seed, "increment-" + std::to_string(ordinal));

    if (options.approach == IncrementApproach::widen) {
        std::vector<int> classes = dataset_classes(new_train);
        widen_last_conv(model, options.widen_extra_maps, classes.size(), options.widen_init,
                        inc_hp.seed);
        TrainReport report = train_pending_branch(model, new_train, new_test, inc_hp);
        model.branches.back().provenance.increment_ordinal = ordinal;
        return report;
    }

    if (!model.selected)
        throw ConfigError("add_increment needs a selected sharing config (run the sweep "
                          "or configure a fixed split)");
    BranchResult r = train_branch(model, *model.selected, new_train, new_test, inc_hp);
    r.branch.provenance.increment_ordinal = ordinal;
    attach_branch(model, std::move(r.branch));
    return r.report;
}

double evaluate(const IncrementalModel& model, const LabeledDataset& test_data, EvalScope scope,
                std::size_t branch_ordinal) {
    if (test_data.empty()) throw DataError("evaluation dataset is empty");
    if (scope == EvalScope::updated) return evaluate_fused(model, test_data).accuracy_percent;

    const std::vector<int>& classes = branch_ordinal == 0
                                          ? model.base_class_map
                                          : model.branches.at(branch_ordinal - 1).class_map;
    std::set<int> allowed(classes.begin(), classes.end());
    for (int label : test_data.class_ids)
        if (!allowed.count(label))
            throw DataError("label " + std::to_string(label) + " outside branch " +
                            std::to_string(branch_ordinal) + " classes");
    auto local = local_index_of(classes);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_data.size(); ++i) {
        Tensor probs = predict_branch(model, branch_ordinal, test_data.inputs[i]);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < probs.size(); ++j)
            if (probs[j] > probs[arg]) arg = j;
        if (arg == local.at(test_data.labels[i])) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / test_data.size();
}

}  // namespace incnet
