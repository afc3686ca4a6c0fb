#include "ncac/pci.hpp"

#include <cmath>
#include <set>

#include "ncac/errors.hpp"
#include "ncac/rng.hpp"

namespace ncac {

void validate(const PerturbationSpec& spec, int n) {
    if (spec.trials < 1) throw ConfigError("perturbation: trials must be >= 1");
    if (spec.duration_steps < 1) throw ConfigError("perturbation: duration_steps must be >= 1");
    if (spec.response_steps < 1) throw ConfigError("perturbation: response_steps must be >= 1");
    // 10 points keep the k=3 cut honest: over B samples the largest possible
    // z-score is sqrt(B - 1), so shorter baselines could flag their own noise.
    if (spec.baseline_steps < 10)
        throw ConfigError("perturbation: baseline_steps must be >= 10");
    if (spec.onset_step < spec.baseline_steps)
        throw ConfigError("perturbation: onset_step must be >= baseline_steps so the "
                          "baseline window fits before the pulse");
    if (!std::isfinite(spec.amplitude)) throw ConfigError("perturbation: non-finite amplitude");
    std::set<int> seen;
    for (int t : spec.target_neurons) {
        if (t < 0 || t >= n)
            throw ConfigError("perturbation: target neuron " + std::to_string(t) +
                              " out of range for n=" + std::to_string(n));
        if (!seen.insert(t).second)
            throw ConfigError("perturbation: duplicate target neuron " + std::to_string(t));
    }
}

ResponseMatrix perturb_and_record(const SpikingNetwork& net, const PerturbationSpec& spec,
                                  std::uint64_t seed) {
    validate(net);
    validate(spec, net.n);
    const int steps = spec.onset_step + spec.response_steps;

    Eigen::MatrixXd stimulus = Eigen::MatrixXd::Zero(steps, net.n);
    const int pulse_end = std::min(steps, spec.onset_step + spec.duration_steps);
    for (int t = spec.onset_step; t < pulse_end; ++t)
        for (int tgt : spec.target_neurons) stimulus(t, tgt) += spec.amplitude;

    ResponseMatrix rm;
    rm.trials = spec.trials;
    rm.n = net.n;
    rm.baseline_steps = spec.baseline_steps;
    rm.response_steps = spec.response_steps;
    rm.baseline.reserve(spec.trials);
    rm.response.reserve(spec.trials);

    for (int trial = 0; trial < spec.trials; ++trial) {
        SpikingNetwork sim = net;
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
        for (int i = 0; i < sim.n; ++i) {
            const LifParams& p = sim.lif[i];
            sim.membrane(i) = p.v_rest + canonical_double(rng) * (p.v_th - p.v_rest);
        }
        sim.refractory.setZero();

        StepTrace trace;
        run_traced(sim, stimulus, steps, std::nullopt, &trace);
        rm.baseline.push_back(
            trace.v_pre.middleRows(spec.onset_step - spec.baseline_steps, spec.baseline_steps));
        rm.response.push_back(trace.v_pre.middleRows(spec.onset_step, spec.response_steps));
    }
    return rm;
}

BinaryResponse binarize_responses(const ResponseMatrix& rm, double k) {
    if (rm.trials < 1 || static_cast<int>(rm.response.size()) != rm.trials ||
        static_cast<int>(rm.baseline.size()) != rm.trials)
        throw ConfigError("binarize_responses: malformed response matrix");
    if (!(k > 0.0)) throw ConfigError("binarize_responses: k must be > 0");

    const int n = rm.n, B = rm.baseline_steps, R = rm.response_steps;
    Eigen::MatrixXd base_mean = Eigen::MatrixXd::Zero(B, n);
    Eigen::MatrixXd resp_mean = Eigen::MatrixXd::Zero(R, n);
    for (int tr = 0; tr < rm.trials; ++tr) {
        base_mean += rm.baseline[tr];
        resp_mean += rm.response[tr];
    }
    base_mean /= rm.trials;
    resp_mean /= rm.trials;

    // Per-channel baseline statistics of the trial-mean signal.
    Eigen::VectorXd mu(n), sd(n);
    double pooled_var = 0.0;
    for (int c = 0; c < n; ++c) {
        mu(c) = base_mean.col(c).mean();
        const double var = (base_mean.col(c).array() - mu(c)).square().sum() / B;
        sd(c) = std::sqrt(var);
        pooled_var += var;
    }
    const double pooled_sd = std::sqrt(pooled_var / n);
    for (int c = 0; c < n; ++c) {
        if (sd(c) == 0.0) sd(c) = pooled_sd;
        if (sd(c) == 0.0) sd(c) = 1e-12;
    }

    BinaryResponse br;
    br.k = k;
    br.n = n;
    br.significance.setZero(R, n);
    for (int t = 0; t < R; ++t)
        for (int c = 0; c < n; ++c)
            br.significance(t, c) = std::abs(resp_mean(t, c) - mu(c)) > k * sd(c) ? 1 : 0;

    br.per_trial.reserve(rm.trials);
    for (int tr = 0; tr < rm.trials; ++tr) {
        Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> bits(R, n);
        for (int t = 0; t < R; ++t)
            for (int c = 0; c < n; ++c)
                bits(t, c) = std::abs(rm.response[tr](t, c) - mu(c)) > k * sd(c) ? 1 : 0;
        br.per_trial.push_back(std::move(bits));
    }
    return br;
}

long lz76_complexity(const std::vector<std::uint8_t>& bits) {
    const long n = static_cast<long>(bits.size());
    if (n == 0) throw ConfigError("lz76_complexity: empty sequence");
    if (n == 1) return 1;
    // Exhaustive-history parse (Kaspar & Schuster's formulation): scan for the
    // longest prefix of the remainder reproducible from anywhere in the
    // history, allowing the copy to run into the phrase itself.
    long c = 1, l = 1, i = 0, k = 1, kmax = 1;
    while (true) {
        if (bits[i + k - 1] == bits[l + k - 1]) {
            ++k;
            if (l + k > n) {
                ++c; // final, possibly still-reproducible phrase
                break;
            }
        } else {
            kmax = std::max(kmax, k);
            ++i;
            if (i == l) {
                ++c;
                l += kmax;
                if (l + 1 > n) break;
                i = 0;
                k = 1;
                kmax = 1;
            } else {
                k = 1;
            }
        }
    }
    return c;
}

std::vector<std::uint8_t> flatten_binary(const BinaryResponse& br) {
    std::vector<std::uint8_t> bits;
    if (br.per_trial.empty()) throw ConfigError("flatten_binary: no trials");
    const Eigen::Index R = br.per_trial[0].rows();
    bits.reserve(br.per_trial.size() * R * br.n);
    for (const auto& trial : br.per_trial)
        for (int c = 0; c < br.n; ++c)
            for (Eigen::Index t = 0; t < R; ++t) bits.push_back(trial(t, c));
    return bits;
}

PciResult pci(const BinaryResponse& br) {
    const std::vector<std::uint8_t> bits = flatten_binary(br);
    PciResult res;
    res.k = br.k;
    res.length = static_cast<long>(bits.size());
    res.lz_count = lz76_complexity(bits);

    long ones = 0;
    for (std::uint8_t b : bits) ones += b;
    const double p1 = static_cast<double>(ones) / static_cast<double>(res.length);
    if (p1 > 0.0 && p1 < 1.0)
        res.source_entropy = -p1 * std::log2(p1) - (1.0 - p1) * std::log2(1.0 - p1);

    if (res.source_entropy > 0.0 && res.length > 1)
        res.pci = static_cast<double>(res.lz_count) * std::log2(static_cast<double>(res.length)) /
                  (static_cast<double>(res.length) * res.source_entropy);
    return res;
}

} // namespace ncac
