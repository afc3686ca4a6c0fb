#include <doctest.h>

#include <cmath>
#include <random>

#include "ncac/adaptation.hpp"
#include "ncac/errors.hpp"
#include "ncac/network.hpp"
#include "ncac/phi.hpp"

using namespace ncac;

namespace {

CausalNetwork copy_swap() {
    CausalNetwork net;
    net.n = 2;
    net.nodes = {{NodeKind::Copy, 0.0, {}}, {NodeKind::Copy, 0.0, {}}};
    net.edges = {{1, 0, 1.0}, {0, 1, 1.0}};
    return net;
}

CausalNetwork isolated_pair() {
    CausalNetwork net;
    net.n = 2;
    net.nodes = {{NodeKind::Or, 0.0, {}}, {NodeKind::Or, 0.0, {}}};
    return net;
}

PhiProtocol kl_effect() {
    PhiProtocol proto;
    proto.direction = Direction::Effect;
    proto.metric = Metric::Kl;
    return proto;
}

LossEval quadratic_to_ones(const Eigen::VectorXd& w) {
    return {(w.array() - 1.0).square().sum(), 0.0};
}

} // namespace

TEST_CASE("loss pins from known phi values") {
    const PhiProtocol proto = kl_effect();

    // The swap net integrates exactly two bits in every state.
    const Tpm swap = build_tpm(copy_swap());
    PhiTarget hit;
    hit.entries = {{StateIndex{1}, 2.0, 1.0}};
    CHECK(ncac_loss(swap, hit, LossForm::Absolute, proto) == 0.0);
    CHECK(ncac_loss(swap, hit, LossForm::Squared, proto) == 0.0);

    PhiTarget off;
    off.entries = {{StateIndex{1}, 1.0, 1.0}};
    CHECK(ncac_loss(swap, off, LossForm::Squared, proto) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ncac_loss(swap, off, LossForm::Absolute, proto) == doctest::Approx(1.0).epsilon(1e-9));

    // A disconnected net has phi 0, so the loss is the target itself.
    const Tpm flat = build_tpm(isolated_pair());
    PhiTarget two;
    two.entries = {{StateIndex{0}, 2.0, 1.0}};
    CHECK(ncac_loss(flat, two, LossForm::Absolute, proto) == 2.0);

    // Weighted mean across entries.
    PhiTarget mixed;
    mixed.entries = {{StateIndex{1}, 2.0, 1.0}, {StateIndex{1}, 0.0, 3.0}};
    CHECK(ncac_loss(swap, mixed, LossForm::Absolute, proto) ==
          doctest::Approx(1.5).epsilon(1e-9));

    // A stateless entry scores phi_bar; for the swap net that is 2 as well.
    PhiTarget mean_entry;
    mean_entry.entries = {{std::nullopt, 2.0, 1.0}};
    CHECK(ncac_loss(swap, mean_entry, LossForm::Absolute, proto) ==
          doctest::Approx(0.0).epsilon(1e-9));

    PhiTarget bad;
    bad.entries = {{StateIndex{0}, 1.0, -1.0}};
    CHECK_THROWS_AS(ncac_loss(swap, bad, LossForm::Absolute, proto), ConfigError);
    PhiTarget zero_w;
    zero_w.entries = {{StateIndex{0}, 1.0, 0.0}};
    CHECK_THROWS_AS(ncac_loss(swap, zero_w, LossForm::Absolute, proto), ConfigError);
    CHECK_THROWS_AS(ncac_loss(swap, PhiTarget{}, LossForm::Absolute, proto), ConfigError);
}

TEST_CASE("spsa settles a quadratic bowl within budget") {
    OptimizerConfig cfg;
    cfg.max_evals = 2000;
    cfg.tol = 0.0; // force the full budget unless stagnation hits
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const AdaptationTrace tr = optimize(Eigen::VectorXd::Zero(4), quadratic_to_ones, cfg);
        CHECK(tr.best_loss <= 5e-2);
        CHECK((tr.best_params.array() >= cfg.lo).all());
        CHECK((tr.best_params.array() <= cfg.hi).all());
        total += tr.best_loss;
        // Monotone best-so-far.
        double best = std::numeric_limits<double>::infinity();
        for (const TraceRow& row : tr.rows) {
            best = std::min(best, row.loss);
            CHECK(row.eval <= cfg.max_evals);
        }
        CHECK(tr.best_loss == best);
    }
    CHECK(total / 10.0 <= 1e-2);
}

TEST_CASE("finite differences and random search also find the bowl") {
    OptimizerConfig cfg;
    cfg.tol = 1e-4;
    cfg.max_evals = 2000;

    cfg.kind = OptimizerKind::FiniteDifference;
    const AdaptationTrace fd = optimize(Eigen::VectorXd::Zero(3), quadratic_to_ones, cfg);
    CHECK(fd.best_loss <= 1e-2);

    cfg.kind = OptimizerKind::RandomSearch;
    const AdaptationTrace rs = optimize(
        Eigen::VectorXd::Zero(1),
        [](const Eigen::VectorXd& w) {
            return LossEval{(w(0) - 0.25) * (w(0) - 0.25), 0.0};
        },
        cfg);
    CHECK(rs.best_loss <= 1e-2);
}

TEST_CASE("a flat loss never moves the parameters and stops on stagnation") {
    OptimizerConfig cfg;
    cfg.max_evals = 5000;
    cfg.tol = 0.0;
    cfg.stagnation_window = 100;
    const Eigen::VectorXd start = Eigen::VectorXd::Constant(2, 0.25);
    const AdaptationTrace tr =
        optimize(start, [](const Eigen::VectorXd&) { return LossEval{7.0, 0.0}; }, cfg);
    CHECK(tr.stop_reason == "stagnation");
    CHECK_FALSE(tr.converged);
    CHECK(tr.best_loss == 7.0);
    CHECK(tr.best_params == start); // zero gradient estimate: theta never moves
    CHECK(tr.rows.back().eval < 100 + 3 + 1); // window plus one spsa iteration
}

TEST_CASE("an already-met tolerance stops before spending evaluations") {
    OptimizerConfig cfg;
    cfg.tol = 10.0;
    const AdaptationTrace tr =
        optimize(Eigen::VectorXd::Zero(3), quadratic_to_ones, cfg);
    REQUIRE(tr.rows.size() == 1);
    CHECK(tr.rows[0].eval == 0);
    CHECK(tr.stop_reason == "tol");
    CHECK(tr.converged);
    CHECK(tr.best_loss == 3.0);
}

TEST_CASE("the evaluation budget is charged three per spsa iteration") {
    OptimizerConfig cfg;
    cfg.max_evals = 7;
    cfg.tol = 0.0;
    const AdaptationTrace tr = optimize(Eigen::VectorXd::Zero(2), quadratic_to_ones, cfg);
    CHECK(tr.stop_reason == "max_evals");
    REQUIRE(tr.rows.size() == 3); // initial row + two iterations
    CHECK(tr.rows[0].eval == 0);
    CHECK(tr.rows[1].eval == 3);
    CHECK(tr.rows[2].eval == 6);
}

TEST_CASE("projection pins boundary optima exactly") {
    OptimizerConfig cfg;
    cfg.lo = -1.0;
    cfg.hi = 1.0;
    cfg.tol = 0.0;
    cfg.max_evals = 600;
    const AdaptationTrace tr = optimize(
        Eigen::VectorXd::Zero(1),
        [](const Eigen::VectorXd& w) {
            const double d = w(0) + 2.0; // pulls toward -2, clipped at -1
            return LossEval{d * d, 0.0};
        },
        cfg);
    CHECK(tr.best_params(0) == -1.0);
    CHECK(tr.best_loss == 1.0);
}

TEST_CASE("optimization is deterministic in the seed") {
    OptimizerConfig cfg;
    cfg.max_evals = 120;
    cfg.tol = 0.0;
    cfg.seed = 99;
    const AdaptationTrace a = optimize(Eigen::VectorXd::Zero(3), quadratic_to_ones, cfg);
    const AdaptationTrace b = optimize(Eigen::VectorXd::Zero(3), quadratic_to_ones, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].loss == b.rows[i].loss);
        CHECK(a.rows[i].eval == b.rows[i].eval);
    }
    CHECK(a.best_params == b.best_params);
}

TEST_CASE("a relentlessly non-finite loss aborts with diagnostics") {
    OptimizerConfig cfg;
    cfg.tol = 0.0;
    const auto nan_loss = [](const Eigen::VectorXd&) {
        return LossEval{std::numeric_limits<double>::quiet_NaN(), 0.0};
    };
    CHECK_THROWS_AS(optimize(Eigen::VectorXd::Zero(2), nan_loss, cfg),
                    std::runtime_error);
}

TEST_CASE("optimizer configuration validation") {
    OptimizerConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    SUBCASE("alpha range") {
        cfg.alpha = 0.5;
        CHECK_THROWS_AS(validate(cfg), ConfigError);
    }
    SUBCASE("gamma range") {
        cfg.gamma = 0.6;
        CHECK_THROWS_AS(validate(cfg), ConfigError);
    }
    SUBCASE("bounds ordering") {
        cfg.lo = 1.0;
        cfg.hi = 1.0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);
    }
    SUBCASE("nonpositive c") {
        cfg.c = 0.0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);
    }
}

TEST_CASE("adapting a causal network meets an attainable target") {
    CausalNetwork net = copy_swap();
    net.edges[0].weight = 0.4; // still a copy relay: weight only gates degree
    PhiTarget target;
    target.entries = {{StateIndex{1}, 2.0, 1.0}};
    OptimizerConfig cfg;
    cfg.max_evals = 60;
    cfg.tol = 1e-6;

    // The swap net scores phi 2.0 at every state already: converged at eval 0.
    auto [adapted, trace] = adapt(net, target, LossForm::Absolute, kl_effect(), cfg);
    CHECK(trace.converged);
    CHECK(trace.stop_reason == "tol");
    CHECK(trace.rows.size() == 1);
    CHECK(adapted.edges.size() == net.edges.size());

    // An impossible target (phi > n bits) must exhaust the budget instead.
    PhiTarget wild;
    wild.entries = {{StateIndex{1}, 10.0, 1.0}};
    cfg.max_evals = 30;
    auto [ignored, failed] = adapt(net, wild, LossForm::Absolute, kl_effect(), cfg);
    (void)ignored;
    CHECK_FALSE(failed.converged);
    CHECK(failed.stop_reason == "max_evals");

    CausalNetwork empty = isolated_pair();
    CHECK_THROWS_AS(adapt(empty, target, LossForm::Absolute, kl_effect(), cfg),
                    ConfigError);
}

TEST_CASE("adapting a spiking network runs the full measurement loop") {
    LifParams p;
    p.tau_m = 10.0;
    p.dt = 1.0;
    SpikingNetwork net = make_lif_network(3, p);
    net.weights << 0, 20, -10, 15, 0, 10, -5, 25, 0;

    SnnPhiProtocol snn_proto;
    snn_proto.stimulus = Eigen::MatrixXd::Constant(120, 3, 0.8);
    snn_proto.stimulus(0, 0) = 20.0;
    snn_proto.bin_width = 4;
    snn_proto.smoothing = 1.0;

    PhiTarget target;
    target.entries = {{std::nullopt, 0.5, 1.0}};

    OptimizerConfig cfg;
    cfg.max_evals = 20;
    cfg.tol = 0.0;
    cfg.lo = -30.0;
    cfg.hi = 30.0;

    auto [adapted, trace] = adapt(net, target, LossForm::Absolute, kl_effect(), snn_proto, cfg);
    CHECK(trace.rows.size() >= 2);
    CHECK(std::isfinite(trace.best_loss));
    CHECK(adapted.weights.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((adapted.weights.array() >= cfg.lo).all());
    CHECK((adapted.weights.array() <= cfg.hi).all());
    // Same config, same seed: the whole pipeline is deterministic.
    auto [again, trace2] = adapt(net, target, LossForm::Absolute, kl_effect(), snn_proto, cfg);
    CHECK(again.weights == adapted.weights);
    CHECK(trace2.best_loss == trace.best_loss);
}

TEST_CASE("plasticity pre-shaping moves weights only when spikes flow") {
    LifParams p;
    p.tau_m = 10.0;
    p.dt = 1.0;
    SpikingNetwork net = make_lif_network(2, p);
    net.weights << 0.0, 0.3, 0.3, 0.0;
    StdpRule rule;

    const SpikingNetwork still =
        unsupervised_pretrain(net, rule, Eigen::MatrixXd::Zero(50, 2), 0);
    CHECK(still.weights == net.weights); // no spikes, no pairings

    // Pre fires 5 ms before post, repeatedly: that synapse potentiates.
    Eigen::MatrixXd stim = Eigen::MatrixXd::Zero(100, 2);
    for (int t = 5; t + 5 < 100; t += 20) {
        stim(t, 0) = 1000.0;
        stim(t + 5, 1) = 1000.0;
    }
    const SpikingNetwork shaped = unsupervised_pretrain(net, rule, stim, 0);
    CHECK(shaped.weights(1, 0) > net.weights(1, 0));
    CHECK(shaped.weights(0, 1) < net.weights(0, 1)); // reverse pairs depress
    const SpikingNetwork shaped2 = unsupervised_pretrain(net, rule, stim, 0);
    CHECK(shaped2.weights == shaped.weights);
}
