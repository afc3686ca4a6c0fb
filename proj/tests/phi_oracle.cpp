#include "phi_oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

namespace {

int popcount32(std::uint32_t v) {
    int c = 0;
    for (; v; v >>= 1) c += v & 1;
    return c;
}

// Dense index of the mask-selected bits of s, ascending bit order.
std::uint32_t squeeze(std::uint32_t s, std::uint32_t mask) {
    std::uint32_t out = 0;
    int j = 0;
    for (int i = 0; i < 32; ++i) {
        if ((mask >> i) & 1u) {
            if ((s >> i) & 1u) out |= 1u << j;
            ++j;
        }
    }
    return out;
}

} // namespace

Eigen::MatrixXd joint_matrix(const ncac::Tpm& tpm) {
    const std::uint32_t n_states = 1u << tpm.n;
    Eigen::MatrixXd m(n_states, n_states);
    for (std::uint32_t s = 0; s < n_states; ++s)
        for (std::uint32_t t = 0; t < n_states; ++t) {
            double p = 1.0;
            for (int i = 0; i < tpm.n; ++i)
                p *= ((t >> i) & 1u) ? tpm.cond(i, s) : 1.0 - tpm.cond(i, s);
            m(s, t) = p;
        }
    return m;
}

Eigen::VectorXd effect_rep(const ncac::Tpm& tpm, ncac::StateIndex s, std::uint32_t over,
                           std::uint32_t noised) {
    const std::uint32_t n_states = 1u << tpm.n;
    const Eigen::MatrixXd joint = joint_matrix(tpm);

    // Average the joint rows of every prior state matching s off the noised
    // bits, then sum successor mass onto the `over` projection.
    Eigen::VectorXd dist = Eigen::VectorXd::Zero(n_states);
    int rows = 0;
    for (std::uint32_t v = 0; v < n_states; ++v)
        if ((v & ~noised) == (s & ~noised)) {
            dist += joint.row(v).transpose();
            ++rows;
        }
    dist /= rows;

    Eigen::VectorXd out = Eigen::VectorXd::Zero(1u << popcount32(over));
    for (std::uint32_t t = 0; t < n_states; ++t) out(squeeze(t, over)) += dist(t);
    return out;
}

Eigen::VectorXd cause_rep(const ncac::Tpm& tpm, ncac::StateIndex s, std::uint32_t over,
                          std::uint32_t noised, bool* fallback) {
    const std::uint32_t n_states = 1u << tpm.n;
    const std::uint32_t all = n_states - 1;
    const std::uint32_t observed = all & ~noised;
    const Eigen::MatrixXd joint = joint_matrix(tpm);

    // Likelihood of the observation from prior state p: total successor mass
    // agreeing with s on the observed bits.
    Eigen::VectorXd lik = Eigen::VectorXd::Zero(n_states);
    for (std::uint32_t p = 0; p < n_states; ++p)
        for (std::uint32_t t = 0; t < n_states; ++t)
            if ((t & observed) == (s & observed)) lik(p) += joint(p, t);

    Eigen::VectorXd out = Eigen::VectorXd::Zero(1u << popcount32(over));
    const double total = lik.sum();
    if (fallback) *fallback = false;
    if (total == 0.0) {
        out.setConstant(1.0 / out.size());
        if (fallback) *fallback = true;
        return out;
    }
    for (std::uint32_t p = 0; p < n_states; ++p) out(squeeze(p, over)) += lik(p) / total;
    return out;
}

double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) <= 0.0) continue;
        acc += p(i) * std::log2(p(i) / (q(i) > 0.0 ? q(i) : 1e-12));
    }
    return acc;
}

double emd_ref(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    const int m = static_cast<int>(p.size());
    const double tol = 1e-14;
    // Node ids: source copy of state i is i, sink copy is m + i.
    Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd supply = p, demand = q;
    double cost = 0.0;

    while (true) {
        // Bellman-Ford from all sources with remaining supply. Backward
        // residual arcs carry negative cost, which this handles natively.
        std::vector<double> dist(2 * m, std::numeric_limits<double>::infinity());
        std::vector<int> parent(2 * m, -1);
        bool any_supply = false;
        for (int i = 0; i < m; ++i)
            if (supply(i) > tol) {
                dist[i] = 0.0;
                any_supply = true;
            }
        if (!any_supply) break;
        for (int round = 0; round < 2 * m; ++round) {
            bool changed = false;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    const double c = popcount32(static_cast<std::uint32_t>(i) ^
                                                static_cast<std::uint32_t>(j));
                    if (dist[i] + c < dist[m + j] - 1e-18) {
                        dist[m + j] = dist[i] + c;
                        parent[m + j] = i;
                        changed = true;
                    }
                    if (flow(i, j) > tol && dist[m + j] - c < dist[i] - 1e-18) {
                        dist[i] = dist[m + j] - c;
                        parent[i] = m + j;
                        changed = true;
                    }
                }
            if (!changed) break;
        }
        int sink = -1;
        for (int j = 0; j < m; ++j)
            if (demand(j) > tol && (sink < 0 || dist[m + j] < dist[m + sink])) sink = j;
        if (sink < 0) break;

        // Trace the path back to a source, find the bottleneck, then push.
        std::vector<int> path;
        for (int v = m + sink; v >= 0; v = parent[v]) {
            path.push_back(v);
            if (v < m && parent[v] < 0) break;
        }
        double push = std::min(demand(sink), supply(path.back()));
        for (std::size_t x = 0; x + 1 < path.size(); ++x)
            if (path[x] < m) // arc path[x+1] -> path[x] is backward (sink->source)
                push = std::min(push, flow(path[x], path[x + 1] - m));
        for (std::size_t x = 0; x + 1 < path.size(); ++x) {
            const int to = path[x], from = path[x + 1];
            if (to >= m)
                flow(from, to - m) += push;
            else
                flow(to, from - m) -= push;
        }
        supply(path.back()) -= push;
        demand(sink) -= push;
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            cost += flow(i, j) * popcount32(static_cast<std::uint32_t>(i) ^
                                            static_cast<std::uint32_t>(j));
    return cost;
}

Ei effective_information(const ncac::Tpm& tpm, ncac::StateIndex s, std::uint32_t part_a,
                         std::uint32_t part_b, bool effect_side, bool use_emd) {
    const std::uint32_t n_states = 1u << tpm.n;
    const std::uint32_t all = n_states - 1;

    Eigen::VectorXd whole, ra, rb;
    if (effect_side) {
        whole = effect_rep(tpm, s, all, 0);
        ra = effect_rep(tpm, s, part_a, part_b);
        rb = effect_rep(tpm, s, part_b, part_a);
    } else {
        whole = cause_rep(tpm, s, all, 0);
        ra = cause_rep(tpm, s, part_a, part_b);
        rb = cause_rep(tpm, s, part_b, part_a);
    }

    Eigen::VectorXd prod(n_states);
    for (std::uint32_t t = 0; t < n_states; ++t)
        prod(t) = ra(squeeze(t, part_a)) * rb(squeeze(t, part_b));

    Ei v;
    v.ei = use_emd ? emd_ref(whole, prod) : kl(whole, prod);
    if (std::abs(v.ei) < 1e-12) v.ei = 0.0;
    v.nei = v.ei / std::min(popcount32(part_a), popcount32(part_b));
    return v;
}

Mip find_mip(const ncac::Tpm& tpm, ncac::StateIndex s, bool effect_side, bool use_emd) {
    const std::uint32_t all = (1u << tpm.n) - 1;
    Mip best;
    bool have = false;
    double best_nei = 0.0;
    for (std::uint32_t a = 1; a < all; ++a) {
        if (!(a & 1u)) continue; // canonical: node 0 stays in part a
        const std::uint32_t b = all & ~a;
        const Ei v = effective_information(tpm, s, a, b, effect_side, use_emd);
        if (!have || v.nei < best_nei) {
            have = true;
            best_nei = v.nei;
            best = {v.ei > 0.0 ? v.ei : 0.0, a, b};
        }
    }
    return best;
}

Mip find_mip_min(const ncac::Tpm& tpm, ncac::StateIndex s, bool use_emd) {
    const Mip c = find_mip(tpm, s, false, use_emd);
    const Mip e = find_mip(tpm, s, true, use_emd);
    return c.phi < e.phi ? c : e;
}

double phi_mean_uniform(const ncac::Tpm& tpm, bool effect_side) {
    const std::uint32_t n_states = 1u << tpm.n;
    double acc = 0.0;
    for (std::uint32_t s = 0; s < n_states; ++s) acc += find_mip(tpm, s, effect_side).phi;
    return acc / n_states;
}

} // namespace oracle
