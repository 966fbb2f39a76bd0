#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfe/consensus.hpp"
#include "dfe/datagen.hpp"

namespace dfe {

struct ExperimentConfig {
    int k = 10;
    std::size_t features_per_node = 50;  // F
    std::size_t pool_size = 500;
    std::size_t examples = 1000;
    std::size_t attrs = 20;
    Complexity complexity = Complexity::simple;
    LossKind loss = LossKind::hinge;
    StepSchedule schedule = StepSchedule::fixed(0.1);
    int iterations = 1000;
    double epsilon = 1e-6;
    int window = 5;
    double edge_prob = 0.3;
    int async_bound = 1;
    int reps_targets = 5;
    int reps_draws = 5;
    double holdout_fraction = 0.3;
    double minacc = 0.75;
    int minpos = 2;
    int max_literals = 4;  // C
    // The comparison protocol takes each run's model from the first site whose
    // weights go quiet, so its runs stop there as well.
    StopRule stop_rule = StopRule::first_node;
    std::uint64_t seed = 1;
    std::string data_path;  // when set, bypasses synthesis
};

struct RunRecord {
    int target_rep = 0;
    int draw_rep = 0;
    Mode mode = Mode::distributed;
    std::string complexity;
    double accuracy = 0.0;
    double wall_time_s = 0.0;
    int rounds = 0;
    int best_node = -1;
    double gamma = 0.0;
    bool converged = false;
    std::uint64_t seed = 0;
    bool excluded = false;  // diverged or unbuildable cell; out of aggregates
};

struct SummaryCell {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

struct SummaryRow {
    std::string complexity;
    Mode mode = Mode::distributed;
    SummaryCell acc;
    SummaryCell time;
    SummaryCell rounds;
    int n_runs = 0;
    int n_diverged = 0;
};

struct ExperimentResult {
    std::vector<SummaryRow> summary;
    std::vector<RunRecord> runs;
};

// "mean(std)" with one decimal place, e.g. 93.4(10.5).
std::string format_cell(const SummaryCell& cell);

RunConfig make_run_config(const ExperimentConfig& cfg, Mode mode, std::uint64_t run_seed);

// Same round loop with k = 1 and per_node = k * F: all features at one node.
RunReport run_centralized(const LabeledDataset& dataset, const RunConfig& distributed_config);

// Accuracy descending, then wall time ascending. Negative: first report is
// better; positive: second; zero: full tie.
int lexicographic_compare(const RunReport& a, const RunReport& b);

// The repetition protocol: reps_targets target draws x reps_draws feature
// draws, each cell running distributed and centralized on the same dataset
// and filtered pool. Diverged or unbuildable runs are recorded, flagged and
// excluded from the aggregates.
ExperimentResult repeat_experiment(const ExperimentConfig& cfg);

// Writes summary.csv, runs.csv and summary_table.txt under out_dir.
void emit_reports(const ExperimentResult& result, const std::string& out_dir);

// One synthetic distributed run with the config's parameters (used by the
// simulate subcommand); the returned report keeps the per-round metrics.
RunReport simulate_once(const ExperimentConfig& cfg);

void write_round_metrics_csv(const RunReport& report, const std::string& path);

}  // namespace dfe
