#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ncac/snn.hpp"

namespace ncac {

struct PerturbationSpec {
    std::vector<int> target_neurons;
    double amplitude = 0.0;
    int onset_step = 0;      // pulse start; also the end of the baseline window
    int duration_steps = 1;
    int trials = 1;
    int baseline_steps = 10; // window [onset - baseline, onset)
    int response_steps = 1;  // window [onset, onset + response)
};

// trials >= 1, duration >= 1, response >= 1, baseline >= 10 (over B samples
// the largest possible z-score is sqrt(B - 1); ten keep a k = 3 cut from
// flagging its own baseline), onset >= baseline (steps before the baseline
// window are settle time), targets in range and distinct.
void validate(const PerturbationSpec& spec, int n);

struct ResponseMatrix {
    int trials = 0;
    int n = 0;
    int baseline_steps = 0;
    int response_steps = 0;
    std::vector<Eigen::MatrixXd> baseline; // per trial: baseline_steps x n
    std::vector<Eigen::MatrixXd> response; // per trial: response_steps x n
};

// Zap protocol. Each trial runs a fresh copy of the network: membrane drawn
// uniformly in [v_rest, v_th) from the trial's sub-seed (splitmix64 of
// `seed`), refractory cleared, no background drive. A square current pulse of
// `amplitude` hits the target neurons for duration_steps starting at
// onset_step. Recorded signals are pre-reset membrane potentials, so spikes
// stay visible as threshold crossings.
ResponseMatrix perturb_and_record(const SpikingNetwork& net, const PerturbationSpec& spec,
                                  std::uint64_t seed);

struct BinaryResponse {
    double k = 3.0;
    int n = 0;
    std::vector<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>> per_trial;
    // Trial-mean significance: response_steps x n.
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> significance;
};

// Deviation thresholding against baseline statistics of the trial-mean
// signal: cell (t, c) is significant when |x - mean_c| > k * sd_c. Channels
// whose baseline variance vanishes fall back to the pooled all-channel
// baseline SD, then to 1e-12. The thresholds are a pure function of the
// baseline block, so an amplitude-zero protocol stays all-zero in
// distribution.
BinaryResponse binarize_responses(const ResponseMatrix& rm, double k);

// Number of phrases in the exhaustive-history incremental parse of the bit
// string (Lempel-Ziv 1976). Copies may self-overlap; the final phrase may be
// a plain reproduction. Nondecreasing in prefix length.
long lz76_complexity(const std::vector<std::uint8_t>& bits);

// Concatenation order for the trial bit strings: trial, then channel, then time.
std::vector<std::uint8_t> flatten_binary(const BinaryResponse& br);

struct PciResult {
    double pci = 0.0;
    long lz_count = 0;
    long length = 0;
    double source_entropy = 0.0; // binary entropy of the 1-rate, bits
    double k = 3.0;
};

// pci = lz_count * log2(length) / (length * source_entropy), computed over
// the flattened per-trial binary responses; a constant string scores 0.
// Fair-coin strings normalize to ~1.
PciResult pci(const BinaryResponse& br);

} // namespace ncac
