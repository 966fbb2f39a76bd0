#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dfe {

// Undirected communication graph; edges stored as (i, j) with i < j.
struct Graph {
    int k = 0;
    std::vector<std::pair<int, int>> edges;
};

// Gossip weight matrix A. Under the Metropolis scheme it is symmetric and
// doubly stochastic: every row and column sums to one.
struct MixingMatrix {
    int k = 0;
    std::vector<double> w;  // row-major k x k

    double at(int i, int j) const { return w[static_cast<std::size_t>(i) * k + j]; }
    double& at(int i, int j) { return w[static_cast<std::size_t>(i) * k + j]; }
};

struct SpectralDiagnostics {
    std::vector<double> eigenvalues;  // sorted descending
    double gamma = 0.0;               // max |lambda| over non-leading eigenvalues
};

// Erdos-Renyi draw: each unordered pair kept with edge_prob, redrawn from a
// fresh seed stream until connected (up to 1000 attempts).
Graph generate_graph(int k, double edge_prob, std::uint64_t seed);

bool is_connected(const Graph& g);

std::vector<int> degrees(const Graph& g);

// alpha_ij = 1 / (1 + max(deg_i, deg_j)) on edges, alpha_ii absorbs the rest.
MixingMatrix metropolis_weights(const Graph& g);

// Full eigenvalue list of the symmetric matrix via cyclic Jacobi rotations
// (off-diagonal Frobenius norm 1e-12, at most 100 sweeps).
SpectralDiagnostics spectral_diagnostics(const MixingMatrix& a);

// Exact product A * J for a stacked k x n estimate matrix (one row per node).
std::vector<std::vector<double>> mix(const MixingMatrix& a,
                                     const std::vector<std::vector<double>>& j_rows);

// Debug dump: header `k=<count>`, then one `i j` pair per line.
void write_edge_list(const Graph& g, const std::string& path);

}  // namespace dfe
