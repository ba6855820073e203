// incnet — incremental convolutional training with partial network sharing.
//
// Verbs: train-base, sweep, add, eval, cost. Each takes --config and writes
// its outputs under the config's output directory. Exit codes: 0 success,
// 2 config error, 3 data error, 4 numeric/training failure.

#include <iostream>

#include <CLI11.hpp>

#include "incnet/error.hpp"
#include "incnet/pipeline.hpp"

namespace {

int dispatch(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const incnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const incnet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const incnet::NumericError& e) {
        std::cerr << "training failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incremental training with partial network sharing"};
    app.require_subcommand(1);

    std::string config_path;
    std::string model_path;
    std::size_t increment_ordinal = 0;
    std::string scope = "updated";
    double sharing = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--model", model_path, "model file (default: <output_dir>/model.incn)");
    };

    CLI::App* train_base = app.add_subcommand("train-base", "train the base network on class set 0");
    add_common(train_base);

    bool resweep = false;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "train sharing candidates on the probe increment and select the split");
    add_common(sweep);
    sweep->add_flag("--resweep", resweep, "re-run the sweep on a later increment");

    CLI::App* add = app.add_subcommand("add", "learn the next class set as a branch");
    add_common(add);
    add->add_option("--increment", increment_ordinal, "increment ordinal (next unconsumed)")
        ->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a branch or the updated network");
    add_common(eval);
    eval->add_option("--scope", scope, "'updated' or 'branch:<ordinal>'");

    CLI::App* cost = app.add_subcommand("cost", "analytic MAC/memory/energy report");
    cost->add_option("--config", config_path, "experiment config (JSON)")->required();
    cost->add_option("--sharing", sharing, "shared parameter fraction in [0,1)");

    CLI11_PARSE(app, argc, argv);

    return dispatch([&] {
        incnet::ExperimentConfig config = incnet::load_config(config_path);
        if (train_base->parsed()) incnet::run_train_base(config, model_path);
        if (sweep->parsed()) incnet::run_sweep(config, model_path, resweep);
        if (add->parsed()) incnet::run_add(config, increment_ordinal, model_path);
        if (eval->parsed()) incnet::run_eval(config, scope, model_path);
        if (cost->parsed()) incnet::run_cost(config, sharing);
    });
}
