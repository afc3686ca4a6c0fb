#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncac/network.hpp"
#include "ncac/phi.hpp"
#include "ncac/snn.hpp"

namespace ncac {

// One target term: match the phi of a specific state, or (state empty) the
// state-averaged phi_bar.
struct PhiTargetEntry {
    std::optional<StateIndex> state;
    double phi_star = 0.0;
    double weight = 1.0;
};

struct PhiTarget {
    std::vector<PhiTargetEntry> entries;
};

enum class LossForm { Absolute, Squared };

// How phi is measured inside the loss.
struct PhiProtocol {
    Direction direction = Direction::Effect;
    Metric metric = Metric::Kl;
    std::optional<Eigen::VectorXd> weighting; // for phi_bar terms; empty = uniform
    int threads = 1;
    int hard_cap = 16;
};

struct LossEval {
    double loss = 0.0;
    double phi = 0.0; // weighted mean of the measured phis
};

// Weighted mean over target entries of |phi - phi_star| (or its square).
LossEval ncac_loss_detail(const Tpm& tpm, const PhiTarget& target, LossForm form,
                          const PhiProtocol& proto);
double ncac_loss(const Tpm& tpm, const PhiTarget& target, LossForm form,
                 const PhiProtocol& proto);

enum class OptimizerKind { Spsa, FiniteDifference, RandomSearch };

OptimizerKind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Spsa;
    // Gain schedules: step a_k = a / (k + A)^alpha, perturbation
    // c_k = c / (k + 1)^gamma, iteration counter k starting at 0.
    double a = 0.2;
    double big_a = 50.0;
    double alpha = 0.602;
    double c = 0.1;
    double gamma = 0.101;
    long max_evals = 2000;
    double tol = 1e-3; // stop once the best loss reaches this
    double lo = -1.0;  // box bounds applied to every parameter
    double hi = 1.0;
    std::uint64_t seed = 0;
    long stagnation_window = 200; // evals without >1e-6 improvement -> stop
};

void validate(const OptimizerConfig& cfg);

struct TraceRow {
    long eval = 0; // cumulative optimizer evaluations when the row was taken
    double loss = 0.0;
    double phi = 0.0;
    long iteration = 0;
};

struct AdaptationTrace {
    std::vector<TraceRow> rows; // first row is the initial measurement (eval 0)
    double best_loss = 0.0;
    Eigen::VectorXd best_params;
    bool converged = false;
    std::string stop_reason; // "tol" | "max_evals" | "stagnation"
};

// Generic driver: minimizes loss_fn over the box [lo, hi]^dim starting from
// the (projected) initial point. The initial measurement is recorded as eval
// 0 and not charged to max_evals; afterwards SPSA spends three evaluations
// per iteration (the +/- probe pair and the moved point), central finite
// differences 2*dim + 1, random search one. A non-finite probe loss halves
// the perturbation once before giving up (std::runtime_error). Probe points
// are measurement scaffolding: best_loss/best_params track the iterates (the
// points in rows), so best_loss equals the minimum loss over the trace.
AdaptationTrace optimize(const Eigen::VectorXd& initial,
                         const std::function<LossEval(const Eigen::VectorXd&)>& loss_fn,
                         const OptimizerConfig& cfg);

// Adapts the edge weights of a causal network toward the phi target.
// Parameters are the edge weights in edge-list order; every evaluation
// rebuilds the TPM. Returns the network rebuilt from the best parameters.
std::pair<CausalNetwork, AdaptationTrace> adapt(const CausalNetwork& net,
                                                const PhiTarget& target, LossForm form,
                                                const PhiProtocol& proto,
                                                const OptimizerConfig& cfg);

// Fixed measurement pipeline for spiking-network adaptation: drive the net,
// binarize the raster, estimate a TPM, and take phi_bar. When proto.weighting
// is empty the empirical state frequencies of the same run are used.
struct SnnPhiProtocol {
    Eigen::MatrixXd stimulus; // steps x n, reused by every evaluation
    int bin_width = 5;
    double smoothing = 1.0;
    std::uint64_t seed = 0;
};

// Adapts the synaptic weights (off-diagonal entries, plus the diagonal when
// self-synapses are allowed), same driver and trace semantics.
std::pair<SpikingNetwork, AdaptationTrace> adapt(const SpikingNetwork& net,
                                                 const PhiTarget& target, LossForm form,
                                                 const PhiProtocol& proto,
                                                 const SnnPhiProtocol& snn_proto,
                                                 const OptimizerConfig& cfg);

// STDP pre-shaping pass: runs the network under the rule and returns the
// resulting network (weights moved, dynamic state advanced).
SpikingNetwork unsupervised_pretrain(const SpikingNetwork& net, const StdpRule& rule,
                                     const Eigen::MatrixXd& stimulus, std::uint64_t seed);

} // namespace ncac
