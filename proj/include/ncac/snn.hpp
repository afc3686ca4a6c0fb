#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ncac/network.hpp"

namespace ncac {

// Leaky integrate-and-fire parameters. Time in ms, potentials in arbitrary
// consistent units; dt is the Euler step shared by the whole network.
struct LifParams {
    double tau_m = 10.0;
    double v_rest = 0.0;
    double v_reset = 0.0;
    double v_th = 1.0;
    double r_m = 1.0;
    double t_ref = 0.0;
    double dt = 0.1;
};

// tau_m > 0, r_m > 0, t_ref >= 0, 0 < dt < tau_m, v_th above rest and reset.
void validate(const LifParams& p);

struct SpikingNetwork {
    int n = 0;
    std::vector<LifParams> lif; // size n; dt must agree across neurons
    Eigen::MatrixXd weights;    // weights(post, pre); synaptic efficacy
    Eigen::MatrixXi delays;     // whole steps, >= 1
    Eigen::VectorXd membrane;
    Eigen::VectorXi refractory; // remaining held steps
    bool allow_self = false;    // diagonal synapses permitted?
};

// Fresh network at rest with zero weights and unit delays.
SpikingNetwork make_lif_network(int n, const LifParams& shared, bool allow_self = false);

void validate(const SpikingNetwork& net);

// One Euler step of dv/dt = (-(v - v_rest) + r_m * i_in) / tau_m. Returns the
// post-step potential before any reset, and whether it crossed threshold
// (closed: v >= v_th).
std::pair<double, bool> lif_step(double v, double i_in, const LifParams& p);

struct StdpRule {
    double a_plus = 0.01;
    double a_minus = 0.012;
    double tau_plus = 20.0;  // ms
    double tau_minus = 20.0; // ms
    double w_min = 0.0;
    double w_max = 1.0;
};

// Nearest-neighbor pair update for spike lag dt_ms = t_post - t_pre:
// potentiation a_plus * exp(-dt/tau_plus) for dt >= 0 (coincident spikes
// count as potentiation), depression -a_minus * exp(dt/tau_minus) for dt < 0.
double stdp_delta(double dt_ms, const StdpRule& r);

struct SpikeRaster {
    int steps = 0;
    int n = 0;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> spikes; // steps x n
};

// Advances the network `steps` steps driven by per-step injected currents
// (steps x n matrix). Mutates membrane, refractory counters, and — under
// STDP — weights, in place. Spikes reach postsynaptic neurons after their
// synaptic delay as delta currents of size weights(post, pre). STDP pairs
// each spike with the nearest preceding spike of the other neuron (same-step
// pairs count once, as potentiation at lag zero; self-pairs never count) and
// clamps weights to [w_min, w_max] after every step. The integrator is
// deterministic; `seed` is reserved for future stochastic inputs and recorded
// by the harness.
SpikeRaster run(SpikingNetwork& net, const Eigen::MatrixXd& stimulus, int steps,
                const std::optional<StdpRule>& stdp, std::uint64_t seed);

// Per-step traces for analyses that need more than spike times. v_pre holds
// the pre-reset potential (so threshold crossings stay visible); refractory
// marks steps where the potential was held at v_reset.
struct StepTrace {
    Eigen::MatrixXd v_pre;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> refractory;
};

SpikeRaster run_traced(SpikingNetwork& net, const Eigen::MatrixXd& stimulus, int steps,
                       const std::optional<StdpRule>& stdp, StepTrace* trace);

// --- rate matching with a surrogate gradient --------------------------------
//
// The forward pass is the exact hard-threshold dynamics. For training, each
// non-refractory step contributes a soft spike value S(v_pre - v_th) in
// (0, 1); fast_sigmoid uses S(u) = (1 + s*u / (1 + s*|u|)) / 2, whose
// derivative is the fast-sigmoid surrogate s / (2 * (1 + s*|u|)^2), and
// piecewise_linear uses the clamped ramp S(u) = clip(1/2 + s*u/2, 0, 1).
// Soft spikes are low-pass filtered (EMA over ~5 steps), summed into a soft
// spike count, and scaled to a rate in Hz; the loss is the mean squared rate
// error. Backpropagation is exact for this smoothed readout: hard spikes,
// resets, and refractory gates are treated as constants of the trajectory, so
// the returned gradient matches finite differences of rate_match_loss.

enum class SurrogateShape { FastSigmoid, PiecewiseLinear };

struct SurrogateSpec {
    SurrogateShape shape = SurrogateShape::FastSigmoid;
    double slope = 10.0;
    Eigen::VectorXd target_rates_hz; // one per neuron
};

// Soft firing rates (Hz) under the current weights. Pure: the caller's
// network state is untouched.
Eigen::VectorXd measure_soft_rates(const SpikingNetwork& net, const SurrogateSpec& spec,
                                   const Eigen::MatrixXd& stimulus);

// Mean squared soft-rate error against spec.target_rates_hz. Pure.
double rate_match_loss(const SpikingNetwork& net, const SurrogateSpec& spec,
                       const Eigen::MatrixXd& stimulus);

// dL/dW for rate_match_loss via backpropagation through time. Pure.
Eigen::MatrixXd rate_match_gradient(const SpikingNetwork& net, const SurrogateSpec& spec,
                                    const Eigen::MatrixXd& stimulus);

struct TrainResult {
    std::vector<double> loss_history; // one entry per epoch, pre-update
};

// Plain gradient descent on the synaptic weights; every epoch restarts from
// the entry membrane state so epochs differ only through the weights. Aborts
// (std::runtime_error) if the loss diverges past 1e6x its initial value.
// `seed` is reserved for future stochastic variants.
TrainResult train_rate_match(SpikingNetwork& net, const SurrogateSpec& spec,
                             const Eigen::MatrixXd& stimulus, int epochs, double lr,
                             std::uint64_t seed);

// --- raster post-processing --------------------------------------------------

// One SystemState per bin of bin_width steps: bit i set iff neuron i spiked
// in the bin. A trailing partial bin is dropped. Capped at 20 neurons.
std::vector<StateIndex> binarize_raster(const SpikeRaster& raster, int bin_width);

// Node-conditional TPM from consecutive state pairs with additive smoothing:
// cond(i, s) = (times node i fired from s + smoothing) / (visits of s +
// 2 * smoothing). Unvisited states get 0.5 when smoothing is zero.
Tpm estimate_tpm(const std::vector<StateIndex>& states, int n, double smoothing);

} // namespace ncac
