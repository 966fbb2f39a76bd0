// Command-line front end: synthetic-data simulation, distributed-vs-centralized
// comparison, and topology diagnostics.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <system_error>

#include <CLI11.hpp>

#include "dfe/errors.hpp"
#include "dfe/harness.hpp"
#include "dfe/topology.hpp"

namespace {

struct CliOptions {
    dfe::ExperimentConfig cfg;
    std::string target = "simple";
    std::string loss = "hinge";
    std::string schedule = "fixed";
    std::string stop = "first";
    double eta = 0.1;
    std::string out_dir = "out";
    std::string dump_path;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--nodes", opt.cfg.k, "number of network nodes (k)");
    cmd->add_option("--features-per-node", opt.cfg.features_per_node,
                    "feature columns sampled per node (F)");
    cmd->add_option("--pool-size", opt.cfg.pool_size, "target size of the filtered feature pool");
    cmd->add_option("--examples", opt.cfg.examples, "number of data instances (n)");
    cmd->add_option("--attrs", opt.cfg.attrs, "number of boolean base attributes");
    cmd->add_option("--target", opt.target, "target complexity: simple|complex")
        ->check(CLI::IsMember({"simple", "complex"}));
    cmd->add_option("--loss", opt.loss, "loss function: squared|hinge")
        ->check(CLI::IsMember({"squared", "hinge"}));
    cmd->add_option("--eta", opt.eta, "base learning rate eta0");
    cmd->add_option("--schedule", opt.schedule, "step schedule: fixed|inverse-t")
        ->check(CLI::IsMember({"fixed", "inverse-t"}));
    cmd->add_option("--iterations", opt.cfg.iterations, "round cap T");
    cmd->add_option("--epsilon", opt.cfg.epsilon, "weight-stasis threshold");
    cmd->add_option("--window", opt.cfg.window, "quiet rounds required for convergence");
    cmd->add_option("--edge-prob", opt.cfg.edge_prob, "edge probability of the random graph");
    cmd->add_option("--async-bound", opt.cfg.async_bound,
                    "partial-asynchronism bound B (1 = synchronous)");
    cmd->add_option("--reps-targets", opt.cfg.reps_targets, "repetitions over target draws");
    cmd->add_option("--reps-draws", opt.cfg.reps_draws, "repetitions over feature draws");
    cmd->add_option("--holdout", opt.cfg.holdout_fraction, "holdout fraction");
    cmd->add_option("--stop", opt.stop,
                    "stop when the first site converges or only when all do: first|all")
        ->check(CLI::IsMember({"first", "all"}));
    cmd->add_option("--seed", opt.cfg.seed, "master seed");
    cmd->add_option("--data", opt.cfg.data_path, "feature CSV path (bypasses synthesis)");
    cmd->add_option("--out", opt.out_dir, "output directory");
}

void finalize_config(CliOptions& opt) {
    opt.cfg.complexity =
        opt.target == "simple" ? dfe::Complexity::simple : dfe::Complexity::complex;
    opt.cfg.loss =
        opt.loss == "squared" ? dfe::LossKind::squared_residual : dfe::LossKind::hinge;
    if (opt.schedule == "fixed") {
        opt.cfg.schedule = dfe::StepSchedule::fixed(opt.eta);
    } else {
        opt.cfg.schedule = dfe::StepSchedule::inverse_t(opt.eta, opt.eta / 10.0, opt.eta * 10.0);
    }
    opt.cfg.stop_rule = opt.stop == "first" ? dfe::StopRule::first_node : dfe::StopRule::all_nodes;
    if (opt.cfg.k < 1) throw dfe::ConfigError("--nodes must be >= 1");
    if (opt.cfg.iterations < 1) throw dfe::ConfigError("--iterations must be >= 1");
}

int run_simulate(CliOptions& opt, bool write_out) {
    finalize_config(opt);
    const dfe::RunReport report = dfe::simulate_once(opt.cfg);
    std::printf("mode=%s\n", dfe::mode_name(report.mode));
    std::printf("holdout_accuracy=%.6f\n", report.holdout_accuracy);
    std::printf("rounds=%d\n", report.rounds);
    std::printf("converged=%d\n", report.converged ? 1 : 0);
    std::printf("best_node=%d\n", report.best_node);
    std::printf("gamma=%.6f\n", report.gamma);
    std::printf("wall_time_s=%.3f\n", report.wall_time_s);
    if (write_out) {
        std::error_code ec;
        std::filesystem::create_directories(opt.out_dir, ec);
        if (ec) throw dfe::ConfigError("cannot create output directory " + opt.out_dir);
        dfe::write_round_metrics_csv(report, opt.out_dir + "/rounds.csv");
        std::printf("round metrics written to %s/rounds.csv\n", opt.out_dir.c_str());
    }
    return 0;
}

int run_compare(CliOptions& opt) {
    finalize_config(opt);
    const dfe::ExperimentResult result = dfe::repeat_experiment(opt.cfg);
    dfe::emit_reports(result, opt.out_dir);
    for (const dfe::SummaryRow& row : result.summary) {
        std::printf("%s %s: acc=%s time=%s rounds=%s n=%d diverged=%d\n", row.complexity.c_str(),
                    dfe::mode_name(row.mode), dfe::format_cell({row.acc.mean * 100.0,
                                                                row.acc.stddev * 100.0})
                                                  .c_str(),
                    dfe::format_cell(row.time).c_str(), dfe::format_cell(row.rounds).c_str(),
                    row.n_runs, row.n_diverged);
    }
    std::printf("reports written to %s\n", opt.out_dir.c_str());
    return 0;
}

int run_diagnose(int nodes, double edge_prob, std::uint64_t seed, const std::string& dump_path) {
    const dfe::Graph graph = dfe::generate_graph(nodes, edge_prob, seed);
    const dfe::MixingMatrix mixing = dfe::metropolis_weights(graph);
    const dfe::SpectralDiagnostics diag = dfe::spectral_diagnostics(mixing);
    std::printf("k=%d edges=%zu\n", graph.k, graph.edges.size());
    std::printf("gamma=%.9f\n", diag.gamma);
    std::printf("eigenvalues=");
    for (std::size_t i = 0; i < diag.eigenvalues.size(); ++i)
        std::printf("%s%.9f", i == 0 ? "" : ",", diag.eigenvalues[i]);
    std::printf("\n");
    if (!dump_path.empty()) {
        dfe::write_edge_list(graph, dump_path);
        std::printf("edge list written to %s\n", dump_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus-based distributed model construction simulator"};
    app.require_subcommand(1);

    CliOptions sim_opt;
    CLI::App* simulate = app.add_subcommand("simulate", "run one distributed training run");
    add_common_flags(simulate, sim_opt);

    CliOptions cmp_opt;
    CLI::App* compare =
        app.add_subcommand("compare", "distributed vs centralized repetition protocol");
    add_common_flags(compare, cmp_opt);

    int diag_nodes = 10;
    double diag_edge_prob = 0.3;
    std::uint64_t diag_seed = 1;
    std::string diag_dump;
    CLI::App* diagnose =
        app.add_subcommand("diagnose-topology", "inspect the gossip mixing matrix spectrum");
    diagnose->add_option("--nodes", diag_nodes, "number of network nodes (k)");
    diagnose->add_option("--edge-prob", diag_edge_prob, "edge probability");
    diagnose->add_option("--seed", diag_seed, "graph seed");
    diagnose->add_option("--dump", diag_dump, "write the edge list to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim_opt, simulate->count("--out") > 0);
        if (compare->parsed()) return run_compare(cmp_opt);
        return run_diagnose(diag_nodes, diag_edge_prob, diag_seed, diag_dump);
    } catch (const dfe::DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
