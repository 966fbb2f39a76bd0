#include "dfe/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "dfe/errors.hpp"
#include "dfe/rng.hpp"

namespace dfe {

namespace {

enum CellStream : std::uint64_t {
    stream_cell_data = 101,
    stream_cell_target = 102,
    stream_cell_pool = 103,
    stream_cell_run = 104,
};

std::uint64_t complexity_index(Complexity c) { return c == Complexity::simple ? 0 : 1; }

}  // namespace

std::string format_cell(const SummaryCell& cell) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f(%.1f)", cell.mean, cell.stddev);
    return buf;
}

RunConfig make_run_config(const ExperimentConfig& cfg, Mode mode, std::uint64_t run_seed) {
    RunConfig rc;
    if (mode == Mode::distributed) {
        rc.k = cfg.k;
        rc.per_node = cfg.features_per_node;
    } else {
        rc.k = 1;
        rc.per_node = static_cast<std::size_t>(cfg.k) * cfg.features_per_node;
    }
    rc.iterations = cfg.iterations;
    rc.loss = cfg.loss;
    rc.schedule = cfg.schedule;
    rc.epsilon = cfg.epsilon;
    rc.window = cfg.window;
    rc.edge_prob = cfg.edge_prob;
    rc.async_bound = mode == Mode::distributed ? cfg.async_bound : 1;
    rc.holdout_fraction = cfg.holdout_fraction;
    rc.stop_rule = cfg.stop_rule;
    rc.seed = run_seed;
    return rc;
}

RunReport run_centralized(const LabeledDataset& dataset, const RunConfig& distributed_config) {
    RunConfig rc = distributed_config;
    rc.per_node = static_cast<std::size_t>(distributed_config.k) * distributed_config.per_node;
    rc.k = 1;
    rc.async_bound = 1;
    RunReport report = run_dfe(dataset, rc);
    report.mode = Mode::centralized;
    return report;
}

int lexicographic_compare(const RunReport& a, const RunReport& b) {
    if (a.holdout_accuracy != b.holdout_accuracy)
        return a.holdout_accuracy > b.holdout_accuracy ? -1 : 1;
    if (a.wall_time_s != b.wall_time_s) return a.wall_time_s < b.wall_time_s ? -1 : 1;
    return 0;
}

namespace {

struct CellData {
    LabeledDataset dataset;
    double pool_seconds = 0.0;
    std::size_t pool_size = 0;
};

// One target draw: instances, labels, and the filtered, materialised pool
// shared by the distributed and centralized runs of the cell.
CellData build_cell(const ExperimentConfig& cfg, int target_rep) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t cidx = complexity_index(cfg.complexity);
    CellData cell;
    const std::vector<Instance> instances = generate_instances(
        cfg.examples, cfg.attrs,
        derive_seed(cfg.seed, stream_cell_data, cidx, static_cast<std::uint64_t>(target_rep)));
    Rng target_rng(
        derive_seed(cfg.seed, stream_cell_target, cidx, static_cast<std::uint64_t>(target_rep)));
    const TargetConcept target =
        draw_target(cfg.complexity, cfg.max_literals, static_cast<int>(cfg.attrs), target_rng);
    const std::vector<int> labels = label_instances(instances, target);
    const std::vector<Feature> pool = build_feature_pool(
        instances, labels, cfg.pool_size, cfg.max_literals, cfg.minacc, cfg.minpos,
        derive_seed(cfg.seed, stream_cell_pool, cidx, static_cast<std::uint64_t>(target_rep)));
    if (pool.empty()) throw EmptyPoolError("no feature passed the quality gate for this target");
    cell.dataset = materialize_features(pool, instances, labels);
    cell.pool_size = pool.size();
    cell.pool_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cell;
}

RunRecord record_from_report(const RunReport& report, int target_rep, int draw_rep,
                             const std::string& complexity, double feature_seconds) {
    RunRecord r;
    r.target_rep = target_rep;
    r.draw_rep = draw_rep;
    r.mode = report.mode;
    r.complexity = complexity;
    r.accuracy = report.holdout_accuracy;
    r.wall_time_s = report.wall_time_s + feature_seconds;
    r.rounds = report.rounds;
    r.best_node = report.best_node;
    r.gamma = report.gamma;
    r.converged = report.converged;
    r.seed = report.seed;
    return r;
}

RunRecord excluded_record(Mode mode, int target_rep, int draw_rep, const std::string& complexity,
                          std::uint64_t seed) {
    RunRecord r;
    r.target_rep = target_rep;
    r.draw_rep = draw_rep;
    r.mode = mode;
    r.complexity = complexity;
    r.accuracy = std::numeric_limits<double>::quiet_NaN();
    r.wall_time_s = 0.0;
    r.rounds = 0;
    r.best_node = -1;
    r.gamma = std::numeric_limits<double>::quiet_NaN();
    r.converged = false;
    r.seed = seed;
    r.excluded = true;
    return r;
}

SummaryCell aggregate(const std::vector<double>& values) {
    SummaryCell cell;
    if (values.empty()) return cell;
    double sum = 0.0;
    for (double v : values) sum += v;
    cell.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - cell.mean) * (v - cell.mean);
    cell.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return cell;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
    std::vector<SummaryRow> rows;
    std::vector<std::string> complexities;
    for (const RunRecord& r : runs) {
        if (std::find(complexities.begin(), complexities.end(), r.complexity) ==
            complexities.end())
            complexities.push_back(r.complexity);
    }
    for (const std::string& complexity : complexities) {
        for (Mode mode : {Mode::centralized, Mode::distributed}) {
            SummaryRow row;
            row.complexity = complexity;
            row.mode = mode;
            std::vector<double> acc, time, rounds;
            for (const RunRecord& r : runs) {
                if (r.complexity != complexity || r.mode != mode) continue;
                if (r.excluded) {
                    ++row.n_diverged;
                    continue;
                }
                acc.push_back(r.accuracy);
                time.push_back(r.wall_time_s);
                rounds.push_back(static_cast<double>(r.rounds));
            }
            row.n_runs = static_cast<int>(acc.size());
            row.acc = aggregate(acc);
            row.time = aggregate(time);
            row.rounds = aggregate(rounds);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

ExperimentResult repeat_experiment(const ExperimentConfig& cfg) {
    if (cfg.reps_targets < 1 || cfg.reps_draws < 1)
        throw ConfigError("repetition counts must be >= 1");
    ExperimentResult result;

    const bool external = !cfg.data_path.empty();
    const std::string complexity =
        external ? "external" : complexity_name(cfg.complexity);
    const int reps_targets = external ? 1 : cfg.reps_targets;
    const std::uint64_t cidx = external ? 2 : complexity_index(cfg.complexity);

    for (int a = 0; a < reps_targets; ++a) {
        CellData cell;
        bool cell_ok = true;
        try {
            if (external) {
                cell.dataset = load_feature_csv(cfg.data_path);
                cell.pool_size = cell.dataset.m();
            } else {
                cell = build_cell(cfg, a);
            }
        } catch (const EmptyPoolError&) {
            cell_ok = false;
        }
        for (int b = 0; b < cfg.reps_draws; ++b) {
            const std::uint64_t run_seed =
                derive_seed(cfg.seed, stream_cell_run, cidx,
                            static_cast<std::uint64_t>(a) * 1000 + static_cast<std::uint64_t>(b));
            for (Mode mode : {Mode::distributed, Mode::centralized}) {
                if (!cell_ok) {
                    result.runs.push_back(excluded_record(mode, a, b, complexity, run_seed));
                    continue;
                }
                const RunConfig rc = make_run_config(cfg, mode, run_seed);
                // Feature identification and evaluation happen per site and in
                // parallel, so a mode is charged the pool share one of its
                // sites actually searches and computes.
                const double site_share =
                    cell.pool_size == 0
                        ? 0.0
                        : std::min<double>(1.0, static_cast<double>(rc.per_node) /
                                                    static_cast<double>(cell.pool_size));
                const double feature_seconds = cell.pool_seconds * site_share;
                try {
                    RunReport report = run_dfe(cell.dataset, rc);
                    report.mode = mode;
                    result.runs.push_back(
                        record_from_report(report, a, b, complexity, feature_seconds));
                } catch (const DivergenceError&) {
                    result.runs.push_back(excluded_record(mode, a, b, complexity, run_seed));
                }
            }
        }
    }
    result.summary = summarize(result.runs);
    return result;
}

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << body;
    if (!out) throw ConfigError("write failed for " + path);
}

std::string fig_style_table(const std::vector<SummaryRow>& rows) {
    std::vector<std::string> complexities;
    for (const SummaryRow& r : rows) {
        if (std::find(complexities.begin(), complexities.end(), r.complexity) ==
            complexities.end())
            complexities.push_back(r.complexity);
    }
    auto find_row = [&rows](const std::string& complexity, Mode mode) -> const SummaryRow* {
        for (const SummaryRow& r : rows) {
            if (r.complexity == complexity && r.mode == mode) return &r;
        }
        return nullptr;
    };
    char buf[256];
    std::string out;
    std::string header1 = "Model    ";
    std::string header2 = "         ";
    for (const std::string& c : complexities) {
        std::snprintf(buf, sizeof(buf), "| %-27s", c.c_str());
        header1 += buf;
        std::snprintf(buf, sizeof(buf), "| %-13s%-14s", "Acc.(%)", "Time (s)");
        header2 += buf;
    }
    out += header1 + "\n" + header2 + "\n";
    for (Mode mode : {Mode::centralized, Mode::distributed}) {
        std::string line = mode == Mode::centralized ? "Centr.   " : "Distr.   ";
        for (const std::string& c : complexities) {
            const SummaryRow* row = find_row(c, mode);
            if (row == nullptr || row->n_runs == 0) {
                std::snprintf(buf, sizeof(buf), "| %-13s%-14s", "-", "-");
            } else {
                SummaryCell acc_pct{row->acc.mean * 100.0, row->acc.stddev * 100.0};
                std::snprintf(buf, sizeof(buf), "| %-13s%-14s", format_cell(acc_pct).c_str(),
                              format_cell(row->time).c_str());
            }
            line += buf;
        }
        out += line + "\n";
    }
    return out;
}

}  // namespace

void emit_reports(const ExperimentResult& result, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir);

    std::string runs_csv =
        "cell_target_rep,cell_draw_rep,mode,complexity,accuracy,wall_time_s,rounds,best_node,"
        "gamma,converged,seed\n";
    for (const RunRecord& r : result.runs) {
        runs_csv += std::to_string(r.target_rep) + ',' + std::to_string(r.draw_rep) + ',' +
                    mode_name(r.mode) + ',' + r.complexity + ',' + format_double(r.accuracy) +
                    ',' + format_double(r.wall_time_s) + ',' + std::to_string(r.rounds) + ',' +
                    std::to_string(r.best_node) + ',' + format_double(r.gamma) + ',' +
                    (r.converged ? "1" : "0") + ',' + std::to_string(r.seed) + '\n';
    }
    write_text_file(out_dir + "/runs.csv", runs_csv);

    std::string summary_csv =
        "complexity,mode,acc_mean,acc_std,time_mean,time_std,rounds_mean,rounds_std,n_runs,"
        "n_diverged\n";
    for (const SummaryRow& row : result.summary) {
        summary_csv += row.complexity + ',' + mode_name(row.mode) + ',' +
                       format_double(row.acc.mean) + ',' + format_double(row.acc.stddev) + ',' +
                       format_double(row.time.mean) + ',' + format_double(row.time.stddev) + ',' +
                       format_double(row.rounds.mean) + ',' + format_double(row.rounds.stddev) +
                       ',' + std::to_string(row.n_runs) + ',' + std::to_string(row.n_diverged) +
                       '\n';
    }
    write_text_file(out_dir + "/summary.csv", summary_csv);

    write_text_file(out_dir + "/summary_table.txt", fig_style_table(result.summary));
}

RunReport simulate_once(const ExperimentConfig& cfg) {
    LabeledDataset dataset;
    double pool_seconds = 0.0;
    if (!cfg.data_path.empty()) {
        dataset = load_feature_csv(cfg.data_path);
    } else {
        ExperimentConfig one = cfg;
        CellData cell = build_cell(one, 0);
        dataset = std::move(cell.dataset);
        pool_seconds = cell.pool_seconds;
    }
    const std::uint64_t run_seed = derive_seed(
        cfg.seed, stream_cell_run,
        cfg.data_path.empty() ? complexity_index(cfg.complexity) : 2, 0);
    RunReport report = run_dfe(dataset, make_run_config(cfg, Mode::distributed, run_seed));
    report.wall_time_s += pool_seconds;
    return report;
}

void write_round_metrics_csv(const RunReport& report, const std::string& path) {
    std::string csv = "round,global_train_loss,disagreement,max_weight_change,active_nodes\n";
    for (const RoundMetrics& m : report.round_metrics) {
        csv += std::to_string(m.round) + ',' + format_double(m.global_train_loss) + ',' +
               format_double(m.disagreement) + ',' + format_double(m.max_weight_change) + ',' +
               std::to_string(m.active_nodes) + '\n';
    }
    write_text_file(path, csv);
}

}  // namespace dfe
