#include "ncac/adaptation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ncac/errors.hpp"
#include "ncac/rng.hpp"

namespace ncac {

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "spsa") return OptimizerKind::Spsa;
    if (s == "fd") return OptimizerKind::FiniteDifference;
    if (s == "random") return OptimizerKind::RandomSearch;
    throw ConfigError("unknown optimizer kind '" + s + "' (want spsa|fd|random)");
}

std::string to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::Spsa: return "spsa";
        case OptimizerKind::FiniteDifference: return "fd";
        case OptimizerKind::RandomSearch: return "random";
    }
    throw ConfigError("invalid optimizer kind enum value");
}

void validate(const OptimizerConfig& cfg) {
    if (!(cfg.a > 0.0) || !(cfg.c > 0.0))
        throw ConfigError("optimizer: gains a and c must be > 0");
    if (!(cfg.big_a >= 0.0)) throw ConfigError("optimizer: A must be >= 0");
    if (!(cfg.alpha > 0.5) || !(cfg.alpha <= 1.0))
        throw ConfigError("optimizer: alpha must lie in (0.5, 1]");
    if (!(cfg.gamma > 0.0) || !(cfg.gamma <= 0.5))
        throw ConfigError("optimizer: gamma must lie in (0, 0.5]");
    if (cfg.max_evals < 1) throw ConfigError("optimizer: max_evals must be >= 1");
    if (!(cfg.tol >= 0.0)) throw ConfigError("optimizer: tol must be >= 0");
    if (!(cfg.lo < cfg.hi)) throw ConfigError("optimizer: bounds need lo < hi");
    if (cfg.stagnation_window < 1)
        throw ConfigError("optimizer: stagnation_window must be >= 1");
}

LossEval ncac_loss_detail(const Tpm& tpm, const PhiTarget& target, LossForm form,
                          const PhiProtocol& proto) {
    if (target.entries.empty()) throw ConfigError("phi target needs at least one entry");
    double w_sum = 0.0;
    for (const auto& e : target.entries) {
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
            throw ConfigError("phi target weights must be finite and >= 0");
        if (!std::isfinite(e.phi_star)) throw ConfigError("phi target value must be finite");
        w_sum += e.weight;
    }
    if (!(w_sum > 0.0)) throw ConfigError("phi target weights must not all be zero");

    LossEval out;
    for (const auto& e : target.entries) {
        double phi;
        if (e.state) {
            phi = find_mip(tpm, *e.state, proto.direction, proto.metric, proto.threads,
                           proto.hard_cap)
                      .phi;
        } else {
            phi = phi_mean(tpm, proto.weighting, proto.direction, proto.metric, proto.threads,
                           proto.hard_cap)
                      .phi_bar;
        }
        const double err = phi - e.phi_star;
        const double term = form == LossForm::Absolute ? std::abs(err) : err * err;
        out.loss += e.weight * term;
        out.phi += e.weight * phi;
    }
    out.loss /= w_sum;
    out.phi /= w_sum;
    return out;
}

double ncac_loss(const Tpm& tpm, const PhiTarget& target, LossForm form,
                 const PhiProtocol& proto) {
    return ncac_loss_detail(tpm, target, form, proto).loss;
}

namespace {

struct EvalTracker {
    const std::function<LossEval(const Eigen::VectorXd&)>& fn;
    long count = 0; // optimizer evaluations (the initial measurement is free)
    double best_loss = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_params{};
    long last_improve_eval = 0;

    // Gradient probes are charged to the budget but are measurement
    // scaffolding, not candidate solutions: best tracks iterates only, so the
    // reported best equals the minimum over the trace rows.
    LossEval probe(const Eigen::VectorXd& x) {
        ++count;
        return fn(x);
    }

    LossEval operator()(const Eigen::VectorXd& x, bool charged = true) {
        if (charged) ++count;
        LossEval le = fn(x);
        if (le.loss < best_loss) {
            if (best_loss - le.loss > 1e-6) last_improve_eval = count;
            best_loss = le.loss;
            best_params = x;
        }
        return le;
    }
};

} // namespace

AdaptationTrace optimize(const Eigen::VectorXd& initial,
                         const std::function<LossEval(const Eigen::VectorXd&)>& loss_fn,
                         const OptimizerConfig& cfg) {
    validate(cfg);
    const Eigen::Index dim = initial.size();
    if (dim < 1) throw ConfigError("optimizer needs at least one parameter");

    auto proj = [&](Eigen::VectorXd x) {
        for (Eigen::Index i = 0; i < dim; ++i) x(i) = std::clamp(x(i), cfg.lo, cfg.hi);
        return x;
    };

    std::mt19937_64 rng(cfg.seed);
    EvalTracker eval{loss_fn};
    AdaptationTrace trace;

    Eigen::VectorXd theta = proj(initial);
    const LossEval first = eval(theta, /*charged=*/false);
    trace.rows.push_back({0, first.loss, first.phi, 0});

    auto stop = [&](const char* reason) {
        trace.best_loss = eval.best_loss;
        trace.best_params = eval.best_params;
        trace.stop_reason = reason;
        trace.converged = trace.stop_reason == "tol";
        return trace;
    };

    if (eval.best_loss <= cfg.tol) return stop("tol");

    // Evaluations one iteration will consume, for the budget check.
    const long per_iter = cfg.kind == OptimizerKind::Spsa              ? 3
                          : cfg.kind == OptimizerKind::FiniteDifference ? 2 * dim + 1
                                                                        : 1;
    for (long k = 0;; ++k) {
        if (eval.count + per_iter > cfg.max_evals) return stop("max_evals");

        const double a_k = cfg.a / std::pow(static_cast<double>(k) + cfg.big_a, cfg.alpha);
        double c_k = cfg.c / std::pow(static_cast<double>(k) + 1.0, cfg.gamma);
        LossEval current{};

        switch (cfg.kind) {
            case OptimizerKind::Spsa: {
                Eigen::VectorXd delta(dim);
                for (Eigen::Index i = 0; i < dim; ++i)
                    delta(i) = canonical_double(rng) < 0.5 ? -1.0 : 1.0;
                double lp = eval.probe(proj(theta + c_k * delta)).loss;
                double lm = eval.probe(proj(theta - c_k * delta)).loss;
                if (!std::isfinite(lp) || !std::isfinite(lm)) {
                    // One rescue attempt at half the perturbation.
                    c_k *= 0.5;
                    lp = eval.probe(proj(theta + c_k * delta)).loss;
                    lm = eval.probe(proj(theta - c_k * delta)).loss;
                    if (!std::isfinite(lp) || !std::isfinite(lm))
                        throw std::runtime_error(
                            "optimizer: non-finite loss at iteration " + std::to_string(k) +
                            " even after halving the perturbation (c_k=" + std::to_string(c_k) +
                            ")");
                }
                const Eigen::VectorXd grad = (lp - lm) / (2.0 * c_k) * delta.cwiseInverse();
                theta = proj(theta - a_k * grad);
                current = eval(theta);
                break;
            }
            case OptimizerKind::FiniteDifference: {
                Eigen::VectorXd grad(dim);
                for (Eigen::Index i = 0; i < dim; ++i) {
                    Eigen::VectorXd xp = theta, xm = theta;
                    xp(i) += c_k;
                    xm(i) -= c_k;
                    grad(i) = (eval.probe(proj(xp)).loss - eval.probe(proj(xm)).loss) /
                              (2.0 * c_k);
                }
                if (!grad.allFinite())
                    throw std::runtime_error("optimizer: non-finite finite-difference gradient at "
                                             "iteration " +
                                             std::to_string(k));
                theta = proj(theta - a_k * grad);
                current = eval(theta);
                break;
            }
            case OptimizerKind::RandomSearch: {
                Eigen::VectorXd x(dim);
                for (Eigen::Index i = 0; i < dim; ++i)
                    x(i) = cfg.lo + canonical_double(rng) * (cfg.hi - cfg.lo);
                current = eval(x);
                theta = eval.best_params;
                break;
            }
        }

        trace.rows.push_back({eval.count, current.loss, current.phi, k + 1});
        if (eval.best_loss <= cfg.tol) return stop("tol");
        if (eval.count - eval.last_improve_eval >= cfg.stagnation_window)
            return stop("stagnation");
    }
}

std::pair<CausalNetwork, AdaptationTrace> adapt(const CausalNetwork& net,
                                                const PhiTarget& target, LossForm form,
                                                const PhiProtocol& proto,
                                                const OptimizerConfig& cfg) {
    validate(net);
    if (net.edges.empty()) throw ConfigError("nothing to adapt: network has no edges");

    Eigen::VectorXd params(net.edges.size());
    for (std::size_t e = 0; e < net.edges.size(); ++e) params(e) = net.edges[e].weight;

    auto with_params = [&](const Eigen::VectorXd& x) {
        CausalNetwork m = net;
        for (std::size_t e = 0; e < m.edges.size(); ++e) m.edges[e].weight = x(e);
        return m;
    };
    auto loss_fn = [&](const Eigen::VectorXd& x) {
        return ncac_loss_detail(build_tpm(with_params(x)), target, form, proto);
    };

    AdaptationTrace trace = optimize(params, loss_fn, cfg);
    return {with_params(trace.best_params), trace};
}

namespace {

Eigen::VectorXd empirical_weights(const std::vector<StateIndex>& states, int n) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
    for (StateIndex s : states) w(s) += 1.0;
    return w / static_cast<double>(states.size());
}

} // namespace

std::pair<SpikingNetwork, AdaptationTrace> adapt(const SpikingNetwork& net,
                                                 const PhiTarget& target, LossForm form,
                                                 const PhiProtocol& proto,
                                                 const SnnPhiProtocol& snn_proto,
                                                 const OptimizerConfig& cfg) {
    validate(net);
    if (snn_proto.bin_width < 1) throw ConfigError("snn adapt: bin_width must be >= 1");
    if (!(snn_proto.smoothing >= 0.0)) throw ConfigError("snn adapt: smoothing must be >= 0");

    // Free parameters: every permitted synapse.
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < net.n; ++i)
        for (int j = 0; j < net.n; ++j)
            if (i != j || net.allow_self) slots.push_back({i, j});

    Eigen::VectorXd params(slots.size());
    for (std::size_t s = 0; s < slots.size(); ++s)
        params(s) = net.weights(slots[s].first, slots[s].second);

    auto with_params = [&](const Eigen::VectorXd& x) {
        SpikingNetwork m = net;
        for (std::size_t s = 0; s < slots.size(); ++s)
            m.weights(slots[s].first, slots[s].second) = x(s);
        return m;
    };
    auto loss_fn = [&](const Eigen::VectorXd& x) {
        SpikingNetwork m = with_params(x);
        const SpikeRaster raster = run(m, snn_proto.stimulus,
                                       static_cast<int>(snn_proto.stimulus.rows()), std::nullopt,
                                       snn_proto.seed);
        const std::vector<StateIndex> states = binarize_raster(raster, snn_proto.bin_width);
        const Tpm tpm = estimate_tpm(states, net.n, snn_proto.smoothing);
        PhiProtocol effective = proto;
        if (!effective.weighting) effective.weighting = empirical_weights(states, net.n);
        return ncac_loss_detail(tpm, target, form, effective);
    };

    AdaptationTrace trace = optimize(params, loss_fn, cfg);
    return {with_params(trace.best_params), trace};
}

SpikingNetwork unsupervised_pretrain(const SpikingNetwork& net, const StdpRule& rule,
                                     const Eigen::MatrixXd& stimulus, std::uint64_t seed) {
    SpikingNetwork out = net;
    run(out, stimulus, static_cast<int>(stimulus.rows()), rule, seed);
    return out;
}

} // namespace ncac
