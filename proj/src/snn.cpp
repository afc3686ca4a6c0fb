#include "ncac/snn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ncac/errors.hpp"

namespace ncac {

void validate(const LifParams& p) {
    if (!(p.tau_m > 0.0)) throw ConfigError("lif: tau_m must be > 0");
    if (!(p.r_m > 0.0)) throw ConfigError("lif: r_m must be > 0");
    if (!(p.t_ref >= 0.0)) throw ConfigError("lif: t_ref must be >= 0");
    if (!(p.dt > 0.0) || !(p.dt < p.tau_m))
        throw ConfigError("lif: need 0 < dt < tau_m for a stable Euler step");
    if (!(p.v_th > p.v_rest) || !(p.v_th > p.v_reset))
        throw ConfigError("lif: v_th must exceed v_rest and v_reset");
}

SpikingNetwork make_lif_network(int n, const LifParams& shared, bool allow_self) {
    if (n < 1) throw ConfigError("spiking network needs n >= 1");
    validate(shared);
    SpikingNetwork net;
    net.n = n;
    net.lif.assign(n, shared);
    net.weights = Eigen::MatrixXd::Zero(n, n);
    net.delays = Eigen::MatrixXi::Ones(n, n);
    net.membrane = Eigen::VectorXd::Constant(n, shared.v_rest);
    net.refractory = Eigen::VectorXi::Zero(n);
    net.allow_self = allow_self;
    return net;
}

void validate(const SpikingNetwork& net) {
    if (net.n < 1) throw ConfigError("spiking network needs n >= 1");
    if (static_cast<int>(net.lif.size()) != net.n)
        throw ConfigError("expected one LifParams per neuron");
    for (const auto& p : net.lif) validate(p);
    for (int i = 1; i < net.n; ++i)
        if (net.lif[i].dt != net.lif[0].dt)
            throw ConfigError("all neurons must share one integration step dt");
    if (net.weights.rows() != net.n || net.weights.cols() != net.n)
        throw ConfigError("weights must be n x n");
    if (net.delays.rows() != net.n || net.delays.cols() != net.n)
        throw ConfigError("delays must be n x n");
    if ((net.delays.array() < 1).any())
        throw ConfigError("synaptic delays must be >= 1 step");
    if (net.membrane.size() != net.n || net.refractory.size() != net.n)
        throw ConfigError("membrane/refractory state must have one entry per neuron");
    if (!net.allow_self && net.weights.diagonal().array().abs().maxCoeff() != 0.0)
        throw ConfigError("self-synapses present but allow_self is false");
}

std::pair<double, bool> lif_step(double v, double i_in, const LifParams& p) {
    const double lambda = p.dt / p.tau_m;
    const double v_new = v + lambda * ((p.v_rest - v) + p.r_m * i_in);
    return {v_new, v_new >= p.v_th};
}

double stdp_delta(double dt_ms, const StdpRule& r) {
    if (dt_ms >= 0.0) return r.a_plus * std::exp(-dt_ms / r.tau_plus);
    return -r.a_minus * std::exp(dt_ms / r.tau_minus);
}

SpikeRaster run(SpikingNetwork& net, const Eigen::MatrixXd& stimulus, int steps,
                const std::optional<StdpRule>& stdp, std::uint64_t /*seed*/) {
    return run_traced(net, stimulus, steps, stdp, nullptr);
}

SpikeRaster run_traced(SpikingNetwork& net, const Eigen::MatrixXd& stimulus, int steps,
                       const std::optional<StdpRule>& stdp, StepTrace* trace) {
    validate(net);
    if (steps < 1) throw ConfigError("run needs steps >= 1");
    if (stimulus.rows() != steps || stimulus.cols() != net.n)
        throw ConfigError("stimulus must be steps x n (" + std::to_string(steps) + " x " +
                          std::to_string(net.n) + "), got " + std::to_string(stimulus.rows()) +
                          " x " + std::to_string(stimulus.cols()));

    const int n = net.n;
    const double dt = net.lif[0].dt;
    const int ring_len = net.delays.maxCoeff() + 1;
    Eigen::MatrixXd ring = Eigen::MatrixXd::Zero(ring_len, n); // pending arrivals

    SpikeRaster raster;
    raster.steps = steps;
    raster.n = n;
    raster.spikes.setZero(steps, n);
    if (trace) {
        trace->v_pre.resize(steps, n);
        trace->refractory.setZero(steps, n);
    }

    std::vector<long> last_spike(n, -1); // most recent somatic spike step
    std::vector<int> fired;
    fired.reserve(n);

    for (int t = 0; t < steps; ++t) {
        const int slot = t % ring_len;
        fired.clear();
        for (int i = 0; i < n; ++i) {
            const LifParams& p = net.lif[i];
            if (net.refractory(i) > 0) {
                net.membrane(i) = p.v_reset;
                --net.refractory(i);
                if (trace) {
                    trace->v_pre(t, i) = p.v_reset;
                    trace->refractory(t, i) = 1;
                }
                continue;
            }
            const double i_in = ring(slot, i) + stimulus(t, i);
            auto [v_pre, spiked] = lif_step(net.membrane(i), i_in, p);
            if (trace) trace->v_pre(t, i) = v_pre;
            if (spiked) {
                raster.spikes(t, i) = 1;
                fired.push_back(i);
                net.membrane(i) = p.v_reset;
                // Refractory holding covers the steps after the spike step.
                net.refractory(i) = static_cast<int>(std::lround(p.t_ref / dt));
            } else {
                net.membrane(i) = v_pre;
            }
        }
        ring.row(slot).setZero(); // slot is free again for step t + ring_len

        for (int i : fired) {
            for (int post = 0; post < n; ++post) {
                if (post == i && !net.allow_self) continue;
                const double w = net.weights(post, i);
                if (w == 0.0) continue;
                ring((t + net.delays(post, i)) % ring_len, post) += w;
            }
        }

        if (stdp && !fired.empty()) {
            const StdpRule& r = *stdp;
            // Potentiation: each post spike pairs with the sender's most
            // recent spike at or before t (same-step pairs land here, at lag
            // zero, and are not double-counted by the depression branch).
            for (int post : fired) {
                for (int pre = 0; pre < n; ++pre) {
                    if (pre == post) continue;
                    const long t_pre = raster.spikes(t, pre) ? t : last_spike[pre];
                    if (t_pre < 0) continue;
                    double& w = net.weights(post, pre);
                    w += stdp_delta(static_cast<double>(t - t_pre) * dt, r);
                    w = std::clamp(w, r.w_min, r.w_max);
                }
            }
            // Depression: each pre spike pairs with the receiver's most
            // recent strictly earlier spike.
            for (int pre : fired) {
                for (int post = 0; post < n; ++post) {
                    if (post == pre || last_spike[post] < 0) continue;
                    double& w = net.weights(post, pre);
                    w += stdp_delta(static_cast<double>(last_spike[post] - t) * dt, r);
                    w = std::clamp(w, r.w_min, r.w_max);
                }
            }
        }
        for (int i : fired) last_spike[i] = t;
    }
    return raster;
}

// --- surrogate training -------------------------------------------------------

namespace {

inline double soft_spike(double u, const SurrogateSpec& spec) {
    if (spec.shape == SurrogateShape::FastSigmoid)
        return 0.5 * (1.0 + spec.slope * u / (1.0 + spec.slope * std::abs(u)));
    return std::clamp(0.5 + 0.5 * spec.slope * u, 0.0, 1.0);
}

inline double soft_spike_grad(double u, const SurrogateSpec& spec) {
    if (spec.shape == SurrogateShape::FastSigmoid) {
        const double d = 1.0 + spec.slope * std::abs(u);
        return 0.5 * spec.slope / (d * d);
    }
    return std::abs(u) < 1.0 / spec.slope ? 0.5 * spec.slope : 0.0;
}

constexpr double kEmaBeta = 0.81873075307798182; // exp(-1/5): ~5-step smoothing

struct SoftForward {
    SpikeRaster raster;
    StepTrace trace;
    Eigen::VectorXd soft_count; // sum_t of EMA-filtered soft spikes
    Eigen::VectorXd rates_hz;
    double loss = 0.0;
};

SoftForward soft_forward(const SpikingNetwork& net, const SurrogateSpec& spec,
                         const Eigen::MatrixXd& stimulus) {
    if (spec.target_rates_hz.size() != net.n)
        throw ConfigError("need one target rate per neuron");
    if (!(spec.slope > 0.0)) throw ConfigError("surrogate slope must be > 0");
    SpikingNetwork sim = net; // exact hard dynamics on a scratch copy
    SoftForward fw;
    fw.raster = run_traced(sim, stimulus, static_cast<int>(stimulus.rows()),
                           std::nullopt, &fw.trace);

    const int T = fw.raster.steps, n = net.n;
    const double dt = net.lif[0].dt;
    fw.soft_count = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < n; ++i) {
            const double sigma = fw.trace.refractory(t, i)
                                     ? 0.0
                                     : soft_spike(fw.trace.v_pre(t, i) - net.lif[i].v_th, spec);
            z(i) = kEmaBeta * z(i) + (1.0 - kEmaBeta) * sigma;
        }
        fw.soft_count += z;
    }
    fw.rates_hz = fw.soft_count * (1000.0 / (T * dt));
    const Eigen::VectorXd err = fw.rates_hz - spec.target_rates_hz;
    fw.loss = err.squaredNorm() / static_cast<double>(n);
    return fw;
}

Eigen::MatrixXd backward(const SpikingNetwork& net, const SurrogateSpec& spec,
                         const SoftForward& fw) {
    const int T = fw.raster.steps, n = net.n;
    const double dt = net.lif[0].dt;

    // dL/d(soft_count): through the mean-squared rate error and the Hz scale.
    Eigen::VectorXd d_count(n);
    for (int i = 0; i < n; ++i)
        d_count(i) = 2.0 / n * (fw.rates_hz(i) - spec.target_rates_hz(i)) * (1000.0 / (T * dt));

    // A(t, i) = dL/dv_pre(t, i). Spikes, resets and refractory gates are
    // frozen, so the membrane chain only flows through non-spiking,
    // non-refractory steps with factor (1 - dt/tau_m).
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(T, n);
    Eigen::VectorXd g_z = Eigen::VectorXd::Zero(n); // dL/dz_t, accumulated backward
    for (int t = T - 1; t >= 0; --t) {
        for (int i = 0; i < n; ++i) {
            g_z(i) = d_count(i) + (t == T - 1 ? 0.0 : kEmaBeta * g_z(i));
            if (fw.trace.refractory(t, i)) continue;
            const double u = fw.trace.v_pre(t, i) - net.lif[i].v_th;
            double a = (1.0 - kEmaBeta) * g_z(i) * soft_spike_grad(u, spec);
            if (t + 1 < T && !fw.trace.refractory(t + 1, i) && !fw.raster.spikes(t, i))
                a += (1.0 - net.lif[i].dt / net.lif[i].tau_m) * A(t + 1, i);
            A(t, i) = a;
        }
    }

    // v_pre(t, i) picks up lambda_i * r_m_i * w(i, j) for each presynaptic
    // spike of j arriving at t after its delay.
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < n; ++i) {
            if (A(t, i) == 0.0) continue;
            const double gain = A(t, i) * net.lif[i].dt / net.lif[i].tau_m * net.lif[i].r_m;
            for (int j = 0; j < n; ++j) {
                if (j == i && !net.allow_self) continue;
                const int ts = t - net.delays(i, j);
                if (ts >= 0 && fw.raster.spikes(ts, j)) grad(i, j) += gain;
            }
        }
    }
    return grad;
}

} // namespace

Eigen::VectorXd measure_soft_rates(const SpikingNetwork& net, const SurrogateSpec& spec,
                                   const Eigen::MatrixXd& stimulus) {
    return soft_forward(net, spec, stimulus).rates_hz;
}

double rate_match_loss(const SpikingNetwork& net, const SurrogateSpec& spec,
                       const Eigen::MatrixXd& stimulus) {
    return soft_forward(net, spec, stimulus).loss;
}

Eigen::MatrixXd rate_match_gradient(const SpikingNetwork& net, const SurrogateSpec& spec,
                                    const Eigen::MatrixXd& stimulus) {
    const SoftForward fw = soft_forward(net, spec, stimulus);
    return backward(net, spec, fw);
}

TrainResult train_rate_match(SpikingNetwork& net, const SurrogateSpec& spec,
                             const Eigen::MatrixXd& stimulus, int epochs, double lr,
                             std::uint64_t /*seed*/) {
    if (epochs < 1) throw ConfigError("train_rate_match needs epochs >= 1");
    TrainResult result;
    result.loss_history.reserve(epochs);
    double initial = -1.0;
    for (int e = 0; e < epochs; ++e) {
        const SoftForward fw = soft_forward(net, spec, stimulus);
        if (e == 0) initial = fw.loss;
        if (!std::isfinite(fw.loss) || fw.loss > 1e6 * std::max(initial, 1e-9))
            throw std::runtime_error("rate-match training diverged at epoch " +
                                     std::to_string(e) + ": loss " + std::to_string(fw.loss) +
                                     " vs initial " + std::to_string(initial));
        result.loss_history.push_back(fw.loss);
        net.weights -= lr * backward(net, spec, fw);
        if (!net.allow_self) net.weights.diagonal().setZero();
    }
    return result;
}

// --- raster post-processing ---------------------------------------------------

std::vector<StateIndex> binarize_raster(const SpikeRaster& raster, int bin_width) {
    if (bin_width < 1) throw ConfigError("bin_width must be >= 1");
    if (raster.n > 20) throw CapacityError("state encoding capped at 20 neurons");
    const int bins = raster.steps / bin_width; // trailing partial bin dropped
    std::vector<StateIndex> states;
    states.reserve(bins);
    for (int b = 0; b < bins; ++b) {
        StateIndex s = 0;
        for (int i = 0; i < raster.n; ++i)
            for (int t = b * bin_width; t < (b + 1) * bin_width; ++t)
                if (raster.spikes(t, i)) {
                    s |= StateIndex{1} << i;
                    break;
                }
        states.push_back(s);
    }
    return states;
}

Tpm estimate_tpm(const std::vector<StateIndex>& states, int n, double smoothing) {
    if (n < 1 || n > 20) throw ConfigError("estimate_tpm needs 1 <= n <= 20");
    if (smoothing < 0.0) throw ConfigError("smoothing must be >= 0");
    if (states.size() < 2) throw ConfigError("need at least two states for one transition");
    const StateIndex n_states = StateIndex{1} << n;
    for (StateIndex s : states)
        if (s >= n_states) throw ConfigError("state exceeds 2^n - 1");

    Eigen::MatrixXd fires = Eigen::MatrixXd::Zero(n, n_states);
    Eigen::VectorXd visits = Eigen::VectorXd::Zero(n_states);
    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
        visits(states[t]) += 1.0;
        for (int i = 0; i < n; ++i)
            if (state_bit(states[t + 1], i)) fires(i, states[t]) += 1.0;
    }

    Tpm tpm;
    tpm.n = n;
    tpm.cond.resize(n, n_states);
    for (StateIndex s = 0; s < n_states; ++s) {
        const double denom = visits(s) + 2.0 * smoothing;
        for (int i = 0; i < n; ++i)
            tpm.cond(i, s) = denom > 0.0 ? (fires(i, s) + smoothing) / denom : 0.5;
    }
    return tpm;
}

} // namespace ncac
