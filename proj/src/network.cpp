#include "ncac/network.hpp"

#include <cmath>
#include <set>

#include "ncac/errors.hpp"
#include "ncac/rng.hpp"

namespace ncac {

NodeKind node_kind_from_string(const std::string& s) {
    if (s == "and") return NodeKind::And;
    if (s == "or") return NodeKind::Or;
    if (s == "xor") return NodeKind::Xor;
    if (s == "majority") return NodeKind::Majority;
    if (s == "copy") return NodeKind::Copy;
    if (s == "threshold") return NodeKind::Threshold;
    throw ConfigError("unknown node kind '" + s + "'");
}

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::And: return "and";
        case NodeKind::Or: return "or";
        case NodeKind::Xor: return "xor";
        case NodeKind::Majority: return "majority";
        case NodeKind::Copy: return "copy";
        case NodeKind::Threshold: return "threshold";
    }
    throw ConfigError("invalid node kind enum value");
}

void validate(const CausalNetwork& net) {
    if (net.n < 1) throw ConfigError("network needs n >= 1 nodes");
    if (static_cast<int>(net.nodes.size()) != net.n)
        throw ConfigError("expected " + std::to_string(net.n) + " node mechanisms, got " +
                          std::to_string(net.nodes.size()));
    for (int i = 0; i < net.n; ++i) {
        const auto& nd = net.nodes[i];
        if (!std::isfinite(nd.theta))
            throw ConfigError("node " + std::to_string(i) + ": non-finite theta");
        if (nd.beta && (!std::isfinite(*nd.beta) || *nd.beta <= 0.0))
            throw ConfigError("node " + std::to_string(i) + ": beta must be finite and > 0");
    }
    std::set<std::pair<int, int>> seen;
    std::vector<int> in_degree(net.n, 0);
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        const Edge& ed = net.edges[e];
        if (ed.src < 0 || ed.src >= net.n)
            throw ConfigError("edges[" + std::to_string(e) + "]: src=" + std::to_string(ed.src) +
                              " out of range for n=" + std::to_string(net.n));
        if (ed.dst < 0 || ed.dst >= net.n)
            throw ConfigError("edges[" + std::to_string(e) + "]: dst=" + std::to_string(ed.dst) +
                              " out of range for n=" + std::to_string(net.n));
        if (!std::isfinite(ed.weight))
            throw ConfigError("edges[" + std::to_string(e) + "]: non-finite weight");
        if (!seen.insert({ed.src, ed.dst}).second)
            throw ConfigError("edges[" + std::to_string(e) + "]: duplicate edge " +
                              std::to_string(ed.src) + "->" + std::to_string(ed.dst));
        ++in_degree[ed.dst];
    }
    for (int i = 0; i < net.n; ++i)
        if (net.nodes[i].kind == NodeKind::Copy && in_degree[i] > 1)
            throw ConfigError("node " + std::to_string(i) + ": copy takes at most one input, has " +
                              std::to_string(in_degree[i]));
}

namespace {

struct InEdge {
    int src;
    double weight;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// P(node fires | prior state s). Deterministic rules return exactly 0 or 1;
// a finite beta softens the decision boundary to a logistic.
double firing_probability(const NodeMechanism& nd, const std::vector<InEdge>& in, StateIndex s) {
    double u = 0.0, w_total = 0.0;
    int on_count = 0, parity = 0;
    for (const InEdge& ie : in) {
        int b = state_bit(s, ie.src);
        u += ie.weight * b;
        w_total += ie.weight;
        on_count += b;
        parity ^= b;
    }
    const int n_in = static_cast<int>(in.size());

    // Rules with a natural signed margin keep it; pure boolean gates get the
    // margin +/-1 from their deterministic output.
    double margin;
    bool fire;
    switch (nd.kind) {
        case NodeKind::Threshold:
            margin = u - nd.theta;
            fire = margin >= 0.0;
            break;
        case NodeKind::Majority:
            margin = u - 0.5 * w_total;
            fire = margin > 0.0;
            break;
        case NodeKind::And:
            fire = on_count == n_in; // no inputs: vacuously true
            margin = fire ? 1.0 : -1.0;
            break;
        case NodeKind::Or:
            fire = on_count > 0;
            margin = fire ? 1.0 : -1.0;
            break;
        case NodeKind::Xor:
            fire = parity != 0;
            margin = fire ? 1.0 : -1.0;
            break;
        case NodeKind::Copy:
            fire = n_in == 1 && state_bit(s, in[0].src) != 0;
            margin = fire ? 1.0 : -1.0;
            break;
        default:
            throw ConfigError("invalid node kind enum value");
    }
    if (!nd.beta) return fire ? 1.0 : 0.0;
    return sigmoid(*nd.beta * margin);
}

} // namespace

Tpm build_tpm(const CausalNetwork& net) {
    validate(net);
    if (net.n > 20)
        throw CapacityError("build_tpm capped at n=20; n=" + std::to_string(net.n) + " needs " +
                            std::to_string(net.n) + " x 2^" + std::to_string(net.n) + " entries");
    const StateIndex n_states = StateIndex{1} << net.n;
    std::vector<std::vector<InEdge>> in(net.n);
    for (const Edge& e : net.edges) in[e.dst].push_back({e.src, e.weight});

    Tpm tpm;
    tpm.n = net.n;
    tpm.cond.resize(net.n, n_states);
    for (int i = 0; i < net.n; ++i)
        for (StateIndex s = 0; s < n_states; ++s)
            tpm.cond(i, s) = firing_probability(net.nodes[i], in[i], s);
    return tpm;
}

Eigen::VectorXd joint_row(const Tpm& tpm, StateIndex s) {
    const StateIndex n_states = StateIndex{1} << tpm.n;
    if (s >= n_states) throw ConfigError("state " + std::to_string(s) + " out of range");
    Eigen::VectorXd probs = Eigen::VectorXd::Ones(1);
    for (int i = 0; i < tpm.n; ++i) {
        const double q = tpm.cond(i, s);
        Eigen::VectorXd next(probs.size() * 2);
        for (Eigen::Index x = 0; x < probs.size(); ++x) {
            next(x) = probs(x) * (1.0 - q);
            next(x + probs.size()) = probs(x) * q;
        }
        probs.swap(next);
    }
    return probs;
}

std::pair<int, int> node_degree(const CausalNetwork& net, int node) {
    if (node < 0 || node >= net.n)
        throw ConfigError("node " + std::to_string(node) + " out of range for n=" +
                          std::to_string(net.n));
    int in = 0, out = 0;
    for (const Edge& e : net.edges) {
        if (e.weight == 0.0) continue;
        if (e.dst == node) ++in;
        if (e.src == node) ++out;
    }
    return {in, out};
}

Eigen::VectorXd stationary_distribution(const Tpm& tpm, int burn_in, int samples,
                                        std::uint64_t seed, StateIndex start) {
    const StateIndex n_states = StateIndex{1} << tpm.n;
    if (burn_in < 0 || samples < 1)
        throw ConfigError("stationary_distribution needs burn_in >= 0 and samples >= 1");
    if (start >= n_states) throw ConfigError("start state out of range");

    std::mt19937_64 rng(seed);
    auto step = [&](StateIndex s) {
        StateIndex next = 0;
        for (int i = 0; i < tpm.n; ++i)
            if (canonical_double(rng) < tpm.cond(i, s)) next |= StateIndex{1} << i;
        return next;
    };

    StateIndex s = start;
    for (int b = 0; b < burn_in; ++b) s = step(s);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_states);
    for (int k = 0; k < samples; ++k) {
        counts(s) += 1.0;
        s = step(s);
    }
    return counts / static_cast<double>(samples);
}

} // namespace ncac
