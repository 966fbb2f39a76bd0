#include "dfe/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "dfe/errors.hpp"
#include "dfe/rng.hpp"

namespace dfe {

bool is_connected(const Graph& g) {
    if (g.k <= 1) return true;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.k));
    for (auto [i, j] : g.edges) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
    }
    std::vector<char> seen(static_cast<std::size_t>(g.k), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int visited = 1;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int u : adj[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = 1;
                ++visited;
                frontier.push(u);
            }
        }
    }
    return visited == g.k;
}

Graph generate_graph(int k, double edge_prob, std::uint64_t seed) {
    if (k < 1) throw ConfigError("node count must be >= 1");
    if (k == 1) return Graph{1, {}};
    if (!(edge_prob > 0.0 && edge_prob <= 1.0))
        throw ConfigError("edge probability must lie in (0, 1]");
    constexpr int max_attempts = 1000;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::bernoulli_distribution include(edge_prob);
        Graph g;
        g.k = k;
        for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
                if (include(rng)) g.edges.emplace_back(i, j);
            }
        }
        if (is_connected(g)) return g;
    }
    throw GraphGenerationError(
        "no connected graph after 1000 redraws; increase edge_prob");
}

std::vector<int> degrees(const Graph& g) {
    std::vector<int> deg(static_cast<std::size_t>(g.k), 0);
    for (auto [i, j] : g.edges) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
    }
    return deg;
}

MixingMatrix metropolis_weights(const Graph& g) {
    MixingMatrix a;
    a.k = g.k;
    a.w.assign(static_cast<std::size_t>(g.k) * static_cast<std::size_t>(g.k), 0.0);
    const std::vector<int> deg = degrees(g);
    for (auto [i, j] : g.edges) {
        const double w = 1.0 / (1.0 + static_cast<double>(std::max(deg[static_cast<std::size_t>(i)],
                                                                   deg[static_cast<std::size_t>(j)])));
        a.at(i, j) = w;
        a.at(j, i) = w;
    }
    for (int i = 0; i < g.k; ++i) {
        double off = 0.0;
        for (int j = 0; j < g.k; ++j) {
            if (j != i) off += a.at(i, j);
        }
        a.at(i, i) = 1.0 - off;
    }
    return a;
}

namespace {

double off_diagonal_norm(const std::vector<double>& m, int k) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i != j) {
                const double v = m[static_cast<std::size_t>(i) * k + j];
                sum += v * v;
            }
        }
    }
    return std::sqrt(sum);
}

// Cyclic Jacobi rotations on a symmetric matrix; returns the eigenvalues.
std::vector<double> jacobi_eigenvalues(std::vector<double> m, int k) {
    constexpr int max_sweeps = 100;
    constexpr double tol = 1e-12;
    auto at = [&m, k](int i, int j) -> double& { return m[static_cast<std::size_t>(i) * k + j]; };
    for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(m, k) > tol; ++sweep) {
        for (int p = 0; p < k - 1; ++p) {
            for (int q = p + 1; q < k; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < k; ++i) {
                    const double aip = at(i, p);
                    const double aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < k; ++i) {
                    const double api = at(p, i);
                    const double aqi = at(q, i);
                    at(p, i) = c * api - s * aqi;
                    at(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) eig[static_cast<std::size_t>(i)] = at(i, i);
    return eig;
}

}  // namespace

SpectralDiagnostics spectral_diagnostics(const MixingMatrix& a) {
    for (int i = 0; i < a.k; ++i) {
        for (int j = i + 1; j < a.k; ++j) {
            if (std::abs(a.at(i, j) - a.at(j, i)) > 1e-12)
                throw UnsupportedSchemeError(
                    "spectral diagnostics require a symmetric mixing matrix");
        }
    }
    SpectralDiagnostics d;
    d.eigenvalues = jacobi_eigenvalues(a.w, a.k);
    std::sort(d.eigenvalues.begin(), d.eigenvalues.end(), std::greater<>());
    d.gamma = 0.0;
    for (std::size_t i = 1; i < d.eigenvalues.size(); ++i)
        d.gamma = std::max(d.gamma, std::abs(d.eigenvalues[i]));
    return d;
}

std::vector<std::vector<double>> mix(const MixingMatrix& a,
                                     const std::vector<std::vector<double>>& j_rows) {
    if (static_cast<int>(j_rows.size()) != a.k)
        throw DimensionError("estimate row count does not match mixing matrix size");
    const std::size_t n = j_rows.empty() ? 0 : j_rows.front().size();
    for (const auto& row : j_rows) {
        if (row.size() != n) throw DimensionError("estimate rows have unequal lengths");
    }
    std::vector<std::vector<double>> out(j_rows.size(), std::vector<double>(n, 0.0));
    for (int i = 0; i < a.k; ++i) {
        auto& dst = out[static_cast<std::size_t>(i)];
        for (int j = 0; j < a.k; ++j) {
            const double w = a.at(i, j);
            if (w == 0.0) continue;
            const auto& src = j_rows[static_cast<std::size_t>(j)];
            for (std::size_t p = 0; p < n; ++p) dst[p] += w * src[p];
        }
    }
    return out;
}

void write_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "k=" << g.k << '\n';
    for (auto [i, j] : g.edges) out << i << ' ' << j << '\n';
    if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace dfe
