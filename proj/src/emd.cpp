#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "ncac/errors.hpp"
#include "ncac/phi.hpp"

namespace ncac {

// Exact EMD as a transportation problem: sources = states where p exceeds q,
// sinks = the reverse, arc cost = Hamming distance between the state indices.
// Solved by successive shortest paths with node potentials (costs stay
// nonnegative under reduced-cost reweighting). Supports are small here
// (<= 256 states), so O(V^2) Dijkstra scans are plenty.
double emd_hamming(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size()) throw ConfigError("emd_hamming: length mismatch");
    if (p.size() > 256) throw CapacityError("emd_hamming capped at 256 states");
    constexpr double kTol = 1e-15;

    std::vector<int> src_state, dst_state;
    std::vector<double> supply, demand;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double d = p(i) - q(i);
        if (d > kTol) {
            src_state.push_back(static_cast<int>(i));
            supply.push_back(d);
        } else if (d < -kTol) {
            dst_state.push_back(static_cast<int>(i));
            demand.push_back(-d);
        }
    }
    const int S = static_cast<int>(src_state.size());
    const int T = static_cast<int>(dst_state.size());
    if (S == 0 || T == 0) return 0.0;

    auto cost = [&](int i, int j) {
        return static_cast<double>(
            std::popcount(static_cast<unsigned>(src_state[i] ^ dst_state[j])));
    };

    std::vector<std::vector<double>> flow(S, std::vector<double>(T, 0.0));
    std::vector<double> pot_src(S, 0.0), pot_dst(T, 0.0);
    const double inf = std::numeric_limits<double>::infinity();

    double remaining = 0.0;
    for (double s : supply) remaining += s;

    while (remaining > kTol) {
        // Multi-source Dijkstra over the residual graph. Nodes 0..S-1 are
        // sources, S..S+T-1 sinks.
        const int V = S + T;
        std::vector<double> dist(V, inf);
        std::vector<int> parent(V, -1);
        std::vector<bool> done(V, false);
        for (int i = 0; i < S; ++i)
            if (supply[i] > kTol) dist[i] = 0.0;

        for (int it = 0; it < V; ++it) {
            int u = -1;
            for (int v = 0; v < V; ++v)
                if (!done[v] && dist[v] < inf && (u == -1 || dist[v] < dist[u])) u = v;
            if (u == -1) break;
            done[u] = true;
            if (u < S) {
                for (int j = 0; j < T; ++j) {
                    const double rc = cost(u, j) + pot_src[u] - pot_dst[j];
                    if (dist[u] + rc < dist[S + j] - 1e-18) {
                        dist[S + j] = dist[u] + rc;
                        parent[S + j] = u;
                    }
                }
            } else {
                const int j = u - S;
                for (int i = 0; i < S; ++i) {
                    if (flow[i][j] <= kTol) continue;
                    const double rc = -cost(i, j) + pot_dst[j] - pot_src[i];
                    if (dist[u] + rc < dist[i] - 1e-18) {
                        dist[i] = dist[u] + rc;
                        parent[i] = u;
                    }
                }
            }
        }

        int best_sink = -1;
        for (int j = 0; j < T; ++j)
            if (demand[j] > kTol && dist[S + j] < inf &&
                (best_sink == -1 || dist[S + j] < dist[S + best_sink]))
                best_sink = j;
        if (best_sink == -1) break; // balanced problems never get here

        // Reweight potentials so reduced costs stay nonnegative.
        const double d_star = dist[S + best_sink];
        for (int i = 0; i < S; ++i) pot_src[i] += std::min(dist[i], d_star);
        for (int j = 0; j < T; ++j) pot_dst[j] += std::min(dist[S + j], d_star);

        // Trace the path back to a source, find the bottleneck, augment.
        std::vector<int> path; // node sequence sink..source
        int node = S + best_sink;
        while (node != -1) {
            path.push_back(node);
            node = parent[node];
        }
        double bottleneck = std::min(demand[best_sink], supply[path.back()]);
        for (std::size_t x = 0; x + 1 < path.size(); ++x) {
            const int a = path[x + 1], b = path[x];
            if (a >= S && b < S) bottleneck = std::min(bottleneck, flow[b][a - S]);
        }
        for (std::size_t x = 0; x + 1 < path.size(); ++x) {
            const int a = path[x + 1], b = path[x]; // arc a -> b along the path
            if (a < S && b >= S)
                flow[a][b - S] += bottleneck;
            else
                flow[b][a - S] -= bottleneck;
        }
        supply[path.back()] -= bottleneck;
        demand[best_sink] -= bottleneck;
        remaining -= bottleneck;
    }

    double total = 0.0;
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < T; ++j) total += flow[i][j] * cost(i, j);
    return total;
}

} // namespace ncac
