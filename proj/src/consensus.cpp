#include "dfe/consensus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "dfe/errors.hpp"
#include "dfe/rng.hpp"

namespace dfe {

namespace {

// Tags for the independent seed streams hanging off one run seed.
enum SeedStream : std::uint64_t {
    stream_split = 1,
    stream_graph = 2,
    stream_partition = 3,
    stream_sweep = 4,
    stream_async = 5,
};

}  // namespace

const char* mode_name(Mode m) { return m == Mode::distributed ? "distributed" : "centralized"; }

int UpdateSchedule::active_count(int t, int k) const {
    if (kind == Kind::synchronous) return k;
    const auto& row = active[static_cast<std::size_t>(t) - 1];
    int count = 0;
    for (std::uint8_t v : row) count += v != 0;
    return count;
}

Network init_network(const LabeledDataset& train, const FeaturePartition& partition,
                     const Graph& graph, const MixingMatrix& mixing, const RunConfig& config) {
    const int k = partition.k();
    if (k < 1) throw ConfigError("partition must have at least one block");
    if (graph.k != k || mixing.k != k)
        throw ConfigError("partition, graph and mixing matrix disagree on node count");
    for (const auto& block : partition.blocks) {
        if (block.empty()) throw ConfigError("partition contains an empty block");
        for (int c : block) {
            if (c < 0 || static_cast<std::size_t>(c) >= train.m())
                throw ConfigError("partition column index out of range");
        }
    }

    Network net;
    net.train = &train;
    net.graph = graph;
    net.mixing = mixing;
    const SpectralDiagnostics diag = spectral_diagnostics(mixing);
    net.gamma = diag.gamma;
    if (k > 1 && net.gamma >= 1.0 - 1e-9)
        throw NonConvergentTopologyError(
            "gamma(A) = 1: gossip on this topology cannot reach consensus");

    net.column_owner.assign(train.m(), -1);
    net.column_owner_pos.assign(train.m(), -1);
    net.nodes.resize(static_cast<std::size_t>(k));
    double slowest_site = 0.0;
    for (int i = 0; i < k; ++i) {
        NodeState& node = net.nodes[static_cast<std::size_t>(i)];
        const auto site_start = std::chrono::steady_clock::now();
        node.id = i;
        node.column_ids = partition.blocks[static_cast<std::size_t>(i)];
        node.columns = DenseMatrix(train.n(), node.column_ids.size());
        for (std::size_t p = 0; p < train.n(); ++p) {
            double* dst = node.columns.row(p);
            const double* src = train.matrix.row(p);
            for (std::size_t c = 0; c < node.column_ids.size(); ++c)
                dst[c] = src[node.column_ids[c]];
        }
        node.w.assign(node.column_ids.size(), 0.0);
        node.j_estimate = local_scores(node.columns, node.w);
        node.last_scores = node.j_estimate;
        node.scores_current = true;
        slowest_site = std::max(
            slowest_site, std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        site_start)
                              .count());
        for (std::size_t c = 0; c < node.column_ids.size(); ++c) {
            const int col = node.column_ids[c];
            if (net.column_owner[static_cast<std::size_t>(col)] < 0) {
                net.column_owner[static_cast<std::size_t>(col)] = i;
                net.column_owner_pos[static_cast<std::size_t>(col)] = static_cast<int>(c);
            }
        }
    }
    net.scratch_rows.assign(static_cast<std::size_t>(k), std::vector<double>(train.n(), 0.0));
    net.scratch_perm.resize(train.n());
    net.simulated_seconds = slowest_site;
    (void)config;
    return net;
}

UpdateSchedule build_async_schedule(int k, int iterations, int bound_B, std::uint64_t seed) {
    if (bound_B < 1) throw ConfigError("async bound must be >= 1");
    UpdateSchedule s;
    s.bound_B = bound_B;
    if (bound_B == 1) {
        s.kind = UpdateSchedule::Kind::synchronous;
        return s;
    }
    s.kind = UpdateSchedule::Kind::partially_asynchronous;
    s.active.assign(static_cast<std::size_t>(iterations),
                    std::vector<std::uint8_t>(static_cast<std::size_t>(k), 0));
    // Per node, consecutive active rounds are separated by a uniform gap in
    // [1, B], so every window of B consecutive rounds contains an update.
    for (int i = 0; i < k; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        std::uniform_int_distribution<int> gap(1, bound_B);
        int t = 1 + (gap(rng) - 1);  // first active round lies in [1, B]
        while (t <= iterations) {
            s.active[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(i)] = 1;
            t += gap(rng);
        }
    }
    return s;
}

double consensus_disagreement(const std::vector<NodeState>& nodes) {
    if (nodes.empty()) return 0.0;
    // max pairwise |J_i[p] - J_j[p]| equals the per-instance estimate range.
    const std::size_t n = nodes.front().j_estimate.size();
    double worst = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double lo = nodes.front().j_estimate[p];
        double hi = lo;
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const double v = nodes[i].j_estimate[p];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

std::vector<double> global_weights(const Network& net) {
    std::vector<double> w(net.train->m(), 0.0);
    for (std::size_t c = 0; c < w.size(); ++c) {
        const int owner = net.column_owner[c];
        if (owner >= 0)
            w[c] = net.nodes[static_cast<std::size_t>(owner)]
                       .w[static_cast<std::size_t>(net.column_owner_pos[c])];
    }
    return w;
}

std::vector<std::size_t> sweep_permutation(std::uint64_t run_seed, int t, int node_id,
                                           std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(run_seed, stream_sweep, static_cast<std::uint64_t>(t),
                        static_cast<std::uint64_t>(node_id)));
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

RoundMetrics dfe_round(Network& net, int t, const RunConfig& config,
                       const UpdateSchedule& schedule) {
    if (t < 1) throw ConfigError("round index must be >= 1");
    const std::size_t n = net.train->n();
    const int k = static_cast<int>(net.nodes.size());

    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point from) {
        return std::chrono::duration<double>(clock::now() - from).count();
    };

    // Fresh local scores; each node folds the score innovation into its
    // estimate. The association f_new + (j - last) keeps the k = 1 network
    // bit-identical to plain SGD, and degenerates to pure gossip J <- A*J
    // when the weights are static.
    double slowest_score = 0.0;
    for (NodeState& node : net.nodes) {
        const auto site_start = clock::now();
        std::vector<double>& refreshed = net.scratch_rows[static_cast<std::size_t>(node.id)];
        if (node.scores_current) {
            // Unchanged weights reproduce last_scores bit for bit, so the
            // innovation is exactly zero and the estimate passes through.
            std::copy(node.j_estimate.begin(), node.j_estimate.end(), refreshed.begin());
        } else {
            const std::size_t cols = node.w.size();
            for (std::size_t p = 0; p < n; ++p) {
                const double* x = node.columns.row(p);
                double f = 0.0;
                for (std::size_t c = 0; c < cols; ++c) f += x[c] * node.w[c];
                refreshed[p] = f + (node.j_estimate[p] - node.last_scores[p]);
                node.last_scores[p] = f;
            }
            node.scores_current = true;
        }
        slowest_score = std::max(slowest_score, seconds_since(site_start));
    }

    // One gossip sweep over all neighbours; each site combines the
    // rows it receives into its own estimate.
    double slowest_mix = 0.0;
    for (NodeState& node : net.nodes) {
        const auto site_start = clock::now();
        std::vector<double>& dst = node.j_estimate;
        std::fill(dst.begin(), dst.end(), 0.0);
        for (int j = 0; j < k; ++j) {
            const double w = net.mixing.at(node.id, j);
            if (w == 0.0) continue;
            const std::vector<double>& src = net.scratch_rows[static_cast<std::size_t>(j)];
            for (std::size_t p = 0; p < n; ++p) dst[p] += w * src[p];
        }
        slowest_mix = std::max(slowest_mix, seconds_since(site_start));
    }

    // Local stochastic updates with the consensus estimate held fixed.
    const double eta = step_size(config.schedule, t);
    double max_change = 0.0;
    double slowest_update = 0.0;
    for (NodeState& node : net.nodes) {
        const auto site_start = clock::now();
        double change = 0.0;
        if (schedule.is_active(t, node.id) && eta > 0.0) {
            net.scratch_w = node.w;
            net.scratch_perm = sweep_permutation(config.seed, t, node.id, n);
            for (std::size_t p : net.scratch_perm) {
                apply_gradient_step(config.loss, node.columns.row(p), node.w.size(),
                                    net.train->labels[p], node.j_estimate[p], eta, node.w);
            }
            for (std::size_t c = 0; c < node.w.size(); ++c) {
                if (!std::isfinite(node.w[c])) throw DivergenceError(node.id, t);
                change = std::max(change, std::abs(node.w[c] - net.scratch_w[c]));
            }
            if (change > 0.0) node.scores_current = false;
        }
        node.weight_change_history.push_back(change);
        while (static_cast<int>(node.weight_change_history.size()) > config.window)
            node.weight_change_history.pop_front();
        ++node.rounds_recorded;
        max_change = std::max(max_change, change);
        slowest_update = std::max(slowest_update, seconds_since(site_start));
    }
    net.simulated_seconds += slowest_score + slowest_mix + slowest_update;

    // Metrics: disagreement is the per-instance estimate range; the recorded
    // cost is the loss of the node-average estimate.
    const double inv_k = 1.0 / static_cast<double>(k);
    double worst_range = 0.0;
    double total_loss = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double lo = net.nodes.front().j_estimate[p];
        double hi = lo;
        double sum = 0.0;
        for (const NodeState& node : net.nodes) {
            const double v = node.j_estimate[p];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        worst_range = std::max(worst_range, hi - lo);
        total_loss += instance_loss(config.loss, net.train->labels[p], sum * inv_k);
    }

    RoundMetrics m;
    m.round = t;
    m.global_train_loss = n == 0 ? 0.0 : total_loss / static_cast<double>(n);
    m.disagreement = worst_range;
    m.max_weight_change = max_change;
    m.active_nodes = schedule.active_count(t, k);
    return m;
}

bool check_convergence(NodeState& node, double epsilon, int window) {
    if (window < 1) throw ConfigError("convergence window must be >= 1");
    if (node.converged_at) return true;
    if (node.rounds_recorded < window) return false;
    if (static_cast<int>(node.weight_change_history.size()) < window) return false;
    const auto begin = node.weight_change_history.end() - window;
    for (auto it = begin; it != node.weight_change_history.end(); ++it) {
        if (!(*it < epsilon)) return false;
    }
    node.converged_at = node.rounds_recorded;
    return true;
}

RunReport run_dfe(const LabeledDataset& full, const RunConfig& config) {
    if (config.k < 1) throw ConfigError("node count must be >= 1");
    if (config.iterations < 1) throw ConfigError("iteration cap must be >= 1");

    Rng split_rng(derive_seed(config.seed, stream_split));
    auto [train, holdout] = holdout_split(full, config.holdout_fraction, split_rng);

    // Network formation is coordinator work, charged sequentially.
    const auto setup_start = std::chrono::steady_clock::now();
    const Graph graph = generate_graph(config.k, config.edge_prob,
                                       derive_seed(config.seed, stream_graph));
    const MixingMatrix mixing = metropolis_weights(graph);
    Rng partition_rng(derive_seed(config.seed, stream_partition));
    const FeaturePartition partition =
        vertical_partition(full.m(), config.k, config.per_node, partition_rng);
    const double setup_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - setup_start).count();

    Network net = init_network(train, partition, graph, mixing, config);
    const UpdateSchedule schedule = build_async_schedule(
        config.k, config.iterations, config.async_bound,
        derive_seed(config.seed, stream_async));

    RunReport report;
    report.mode = Mode::distributed;
    report.seed = config.seed;
    report.gamma = net.gamma;
    report.round_metrics.reserve(static_cast<std::size_t>(config.iterations));

    for (int t = 1; t <= config.iterations; ++t) {
        report.round_metrics.push_back(dfe_round(net, t, config, schedule));
        report.rounds = t;
        bool all_converged = true;
        bool any_converged = false;
        for (NodeState& node : net.nodes) {
            const bool c = check_convergence(node, config.epsilon, config.window);
            all_converged &= c;
            any_converged |= c;
        }
        if (config.stop_rule == StopRule::all_nodes ? all_converged : any_converged) {
            report.converged = true;
            break;
        }
    }

    int best = -1;
    int best_round = std::numeric_limits<int>::max();
    for (const NodeState& node : net.nodes) {
        if (node.converged_at && *node.converged_at < best_round) {
            best_round = *node.converged_at;
            best = node.id;
        }
    }
    report.best_node = best;

    const std::vector<double> w_global = global_weights(net);
    report.holdout_accuracy = accuracy(local_scores(holdout.matrix, w_global), holdout.labels);

    report.wall_time_s = setup_seconds + net.simulated_seconds;
    return report;
}

}  // namespace dfe
