#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ncac {

// Full system state, little-endian: node i occupies bit i.
using StateIndex = std::uint32_t;

inline int state_bit(StateIndex s, int i) { return (s >> i) & 1u; }

enum class NodeKind { And, Or, Xor, Majority, Copy, Threshold };

NodeKind node_kind_from_string(const std::string& s);
std::string to_string(NodeKind k);

struct NodeMechanism {
    NodeKind kind = NodeKind::Or;
    // Firing threshold, used by the threshold rule only. Majority derives its
    // own threshold (half the total in-weight) and the boolean gates have none.
    double theta = 0.0;
    // Noise sharpness. Empty means deterministic; finite beta softens the rule
    // to a logistic: P(fire) = sigmoid(beta * margin), where margin is the
    // signed distance from the rule's decision boundary (for the boolean
    // gates, +1 when the deterministic output is 1 and -1 otherwise).
    std::optional<double> beta;
};

struct Edge {
    int src = 0;
    int dst = 0;
    double weight = 0.0;
};

// Directed weighted graph with one update mechanism per node. All nodes
// update synchronously from the previous full state.
struct CausalNetwork {
    int n = 0;
    std::vector<NodeMechanism> nodes; // size n
    std::vector<Edge> edges;          // unique (src, dst) pairs; self-loops allowed
};

// Structural checks: ids in range, no duplicate (src, dst), finite weights
// and parameters, copy nodes with at most one input. Throws ConfigError.
void validate(const CausalNetwork& net);

// Node-conditional transition probabilities: cond(i, s) = P(node i fires at
// t+1 | full state s at t). Nodes fire conditionally independently given s,
// so this n-by-2^n matrix carries the full dynamical law.
struct Tpm {
    int n = 0;
    Eigen::MatrixXd cond; // n rows, 2^n columns
};

// Throws CapacityError when n > 20 (the matrix has n * 2^n entries).
Tpm build_tpm(const CausalNetwork& net);

// One row of the joint transition matrix: the length-2^n distribution over
// successor states from prior state s, assembled as the product of per-node
// Bernoulli factors in ascending node order.
Eigen::VectorXd joint_row(const Tpm& tpm, StateIndex s);

// (in-degree, out-degree) counting edges with nonzero weight.
std::pair<int, int> node_degree(const CausalNetwork& net, int node);

// Empirical state occupancy of the chain: from `start`, take `burn_in`
// unrecorded steps, then record `samples` visited states (the state reached
// by the burn-in is the first sample). Sampling policy — fixed so that an
// independent implementation can reproduce runs bit for bit: one
// mt19937_64(seed); each step draws nodes in ascending index order; node i
// fires iff canonical_double(rng) < cond(i, s_prev).
Eigen::VectorXd stationary_distribution(const Tpm& tpm, int burn_in, int samples,
                                        std::uint64_t seed, StateIndex start = 0);

} // namespace ncac
