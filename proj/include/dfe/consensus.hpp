#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "dfe/datagen.hpp"
#include "dfe/matrix.hpp"
#include "dfe/model.hpp"
#include "dfe/topology.hpp"

namespace dfe {

enum class Mode { distributed, centralized };

const char* mode_name(Mode m);

// When to end the round loop: once every node has reported convergence, or as
// soon as the first site's weights go quiet (the protocol's own stop rule,
// whose model is the run's output).
enum class StopRule { all_nodes, first_node };

struct RunConfig {
    int k = 10;
    std::size_t per_node = 50;   // feature columns sampled per node
    int iterations = 1000;       // T
    LossKind loss = LossKind::squared_residual;
    StepSchedule schedule = StepSchedule::fixed(0.1);
    double epsilon = 1e-6;       // weight-stasis threshold
    int window = 5;              // consecutive quiet rounds required
    double edge_prob = 0.3;
    int async_bound = 1;         // B; 1 = synchronous
    double holdout_fraction = 0.3;
    StopRule stop_rule = StopRule::all_nodes;
    std::uint64_t seed = 1;
};

// One site: its column slice, local weights, and consensus score estimate.
struct NodeState {
    int id = 0;
    std::vector<int> column_ids;       // pool columns held, sorted
    DenseMatrix columns;               // n_train x |block|
    std::vector<double> w;             // local weight block
    std::vector<double> j_estimate;    // consensus estimate J_i, length n_train
    std::vector<double> last_scores;   // local scores at the previous round
    bool scores_current = false;       // last_scores match w (no update since)
    std::optional<int> converged_at;
    std::deque<double> weight_change_history;  // recent ||dW||_inf, capped at window
    int rounds_recorded = 0;
};

struct UpdateSchedule {
    enum class Kind { synchronous, partially_asynchronous };

    Kind kind = Kind::synchronous;
    int bound_B = 1;
    std::vector<std::vector<std::uint8_t>> active;  // [t-1][node]

    bool is_active(int t, int node) const {
        if (kind == Kind::synchronous) return true;
        return active[static_cast<std::size_t>(t) - 1][static_cast<std::size_t>(node)] != 0;
    }
    int active_count(int t, int k) const;
};

struct RoundMetrics {
    int round = 0;
    double global_train_loss = 0.0;  // mean loss of the node-average estimate
    double disagreement = 0.0;       // max pairwise ||J_i - J_j||_inf
    double max_weight_change = 0.0;
    int active_nodes = 0;

    bool operator==(const RoundMetrics&) const = default;
};

struct RunReport {
    Mode mode = Mode::distributed;
    double holdout_accuracy = 0.0;
    // Elapsed construction time of the simulated system: sites execute each
    // round in parallel under the global clock, so a round costs the slowest
    // site's measured work plus the gossip exchange (communication delays are
    // zero by assumption).
    double wall_time_s = 0.0;
    int rounds = 0;
    int best_node = -1;  // -1 when no node converged
    double gamma = 0.0;
    std::uint64_t seed = 0;
    bool converged = false;  // the stop rule was satisfied within T rounds
    std::vector<RoundMetrics> round_metrics;
};

// A materialised run: nodes plus the shared training slice and topology.
struct Network {
    const LabeledDataset* train = nullptr;  // not owned
    Graph graph;
    MixingMatrix mixing;
    double gamma = 0.0;
    std::vector<NodeState> nodes;
    // Lowest-id owner per pool column (-1 if unassigned) and the position of
    // the column inside the owner's block; resolves overlap for the global model.
    std::vector<int> column_owner;
    std::vector<int> column_owner_pos;
    // Round-loop workspace, reused across rounds.
    std::vector<std::vector<double>> scratch_rows;
    std::vector<std::size_t> scratch_perm;
    std::vector<double> scratch_w;
    // Simulated elapsed seconds: max-over-sites per phase, summed over rounds.
    double simulated_seconds = 0.0;
};

// Refuses gamma = 1 topologies and mismatched node counts. Nodes start with
// W = 0 and j_estimate equal to their local scores (all zeros).
Network init_network(const LabeledDataset& train, const FeaturePartition& partition,
                     const Graph& graph, const MixingMatrix& mixing, const RunConfig& config);

// Seeded active sets where every node appears in every window of bound_B
// consecutive rounds; bound_B = 1 degenerates to synchronous.
UpdateSchedule build_async_schedule(int k, int iterations, int bound_B, std::uint64_t seed);

// One protocol round: each node rescores its block and folds the score
// innovation into its estimate; one gossip sweep replaces the stacked
// estimates with A * (.); each active node then sweeps a seeded permutation
// of the instances with the round's step size, holding J_i fixed during the
// sweep.
RoundMetrics dfe_round(Network& net, int t, const RunConfig& config,
                       const UpdateSchedule& schedule);

// The seeded instance order node `node_id` sweeps in round t.
std::vector<std::size_t> sweep_permutation(std::uint64_t run_seed, int t, int node_id,
                                           std::size_t n);

// True iff the node has at least `window` recorded rounds, all with
// ||dW||_inf < epsilon; stamps converged_at on the first success.
bool check_convergence(NodeState& node, double epsilon, int window);

double consensus_disagreement(const std::vector<NodeState>& nodes);

// Concatenated global weight vector; overlapping columns take the weight of
// the lowest-id node holding them.
std::vector<double> global_weights(const Network& net);

// Full protocol: split, topology, partition, round loop with early stop when
// every node has converged, then holdout scoring of the concatenated model.
RunReport run_dfe(const LabeledDataset& full, const RunConfig& config);

}  // namespace dfe
