#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncac/network.hpp"

namespace ncac {

enum class Direction { Cause, Effect, MinCauseEffect };
enum class Metric { Kl, EmdHamming };

Direction direction_from_string(const std::string& s);
std::string to_string(Direction d);
Metric metric_from_string(const std::string& s);
std::string to_string(Metric m);

// --- subset packing -------------------------------------------------------
// Distributions over a node subset are indexed by the subset's bits packed
// densely in ascending node order: the lowest selected node becomes bit 0.

inline StateIndex pack_state(StateIndex s, std::uint32_t mask) {
    StateIndex out = 0;
    int j = 0;
    for (std::uint32_t m = mask; m; m &= m - 1) {
        int i = std::countr_zero(m);
        out |= StateIndex{(s >> i) & 1u} << j++;
    }
    return out;
}

inline StateIndex unpack_state(StateIndex packed, std::uint32_t mask) {
    StateIndex out = 0;
    int j = 0;
    for (std::uint32_t m = mask; m; m &= m - 1) {
        int i = std::countr_zero(m);
        out |= StateIndex{(packed >> j++) & 1u} << i;
    }
    return out;
}

// --- bipartitions ----------------------------------------------------------

struct Bipartition {
    std::uint32_t part_a = 0; // canonical: contains node 0
    std::uint32_t part_b = 0;
};

// All 2^(n-1) - 1 unordered bipartitions into two nonempty parts, in
// ascending part_a mask order. Throws ConfigError for n < 2.
std::vector<Bipartition> enumerate_bipartitions(int n);

// --- repertoires -----------------------------------------------------------

struct Repertoire {
    std::uint32_t over = 0;     // node subset the distribution ranges over
    Eigen::VectorXd probs;      // length 2^popcount(over), packed-index order
    Direction direction = Direction::Effect;
    bool uniform_fallback = false; // cause side only: current state unreachable
};

// Distribution over the next state of the nodes in `over`, given current
// state s with the nodes in `noised` replaced by independent fair coins
// (average over their 2^k joint assignments). `over` selects output nodes,
// `noised` masks input nodes; the two masks are independent.
Repertoire effect_repertoire(const Tpm& tpm, StateIndex s, std::uint32_t over,
                             std::uint32_t noised);

// Posterior over the previous state of the nodes in `over`, from a uniform
// prior and the likelihood of the observed bits of s (the nodes in `noised`
// are treated as unobserved). If no prior state can produce the observation
// (deterministic nets, unreachable s) the repertoire falls back to uniform
// and is flagged.
Repertoire cause_repertoire(const Tpm& tpm, StateIndex s, std::uint32_t over,
                            std::uint32_t noised);

// --- divergences ------------------------------------------------------------

// KL(p || q) in bits. Terms with p_i = 0 contribute zero; q_i = 0 is floored
// at 1e-12 so the value stays finite. The floor only ever weakens q, so the
// result keeps KL >= 0.
double kl_bits(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Exact earth mover's distance with Hamming ground metric between
// distributions over bit-vector states (index i <-> bit pattern i). Solved as
// a transportation problem; capped at 256 states.
double emd_hamming(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// --- effective information and MIP ------------------------------------------

// ei values with |ei| below this are snapped to exactly 0. Factorizing cuts
// produce repertoire products that match the whole up to rounding; the snap
// turns "zero up to noise" into zero. Shared contract with any oracle.
inline constexpr double kEiZeroSnap = 1e-12;

struct EiValue {
    double ei = 0.0;            // bits
    double normalized_ei = 0.0; // ei / min(|A|, |B|)
    bool unreachable = false;
};

// Divergence between the whole repertoire over all nodes and the product of
// the two part repertoires, each computed with the other part noised.
// Direction::MinCauseEffect takes the elementwise min of the two directions
// (note find_mip does not use that: it searches each direction separately).
EiValue effective_information(const Tpm& tpm, StateIndex s, const Bipartition& cut,
                              Direction dir, Metric metric);

struct PartitionEi {
    Bipartition cut;
    double ei = 0.0;
    double normalized_ei = 0.0;
};

struct PhiResult {
    StateIndex state = 0;
    Direction direction = Direction::Effect;
    double phi = 0.0; // bits; ei at the MIP clamped at 0
    Bipartition mip;
    std::vector<PartitionEi> per_partition; // populated when n <= 12
    bool unreachable = false;               // cause repertoire fell back to uniform
};

// Exhaustive search for the minimum-information partition: the cut minimizing
// normalized ei (ties -> lowest part_a mask). Direction::MinCauseEffect runs
// both directions and returns the smaller phi (tie -> effect). Throws
// CapacityError when n exceeds hard_cap; n < 2 returns phi = 0 by definition.
PhiResult find_mip(const Tpm& tpm, StateIndex s, Direction dir, Metric metric,
                   int threads = 1, int hard_cap = 16);

struct PhiBarEntry {
    StateIndex state = 0;
    double phi = 0.0;
    double weight = 0.0;
};

struct PhiBarResult {
    double phi_bar = 0.0;
    std::string weighting; // "uniform" or "empirical"
    std::vector<PhiBarEntry> per_state;
};

// State-averaged phi. Empty weights = uniform over all 2^n states; otherwise
// weights must be a length-2^n distribution (e.g. from
// stationary_distribution) and every state still gets a per_state row.
PhiBarResult phi_mean(const Tpm& tpm, const std::optional<Eigen::VectorXd>& weights,
                      Direction dir, Metric metric, int threads = 1, int hard_cap = 16);

} // namespace ncac
