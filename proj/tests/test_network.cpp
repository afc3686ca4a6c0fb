#include <doctest.h>

#include <cmath>
#include <random>

#include "ncac/errors.hpp"
#include "ncac/network.hpp"
#include "ncac/rng.hpp"
#include "test_util.hpp"

using namespace ncac;

namespace {

CausalNetwork two_node_and_pair() {
    // Both nodes compute AND of the previous joint state.
    CausalNetwork net;
    net.n = 2;
    net.nodes = {{NodeKind::And, 0.0, {}}, {NodeKind::And, 0.0, {}}};
    net.edges = {{0, 0, 1.0}, {1, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}};
    return net;
}

} // namespace

TEST_CASE("isolated self-copy node reproduces its own bit") {
    CausalNetwork net;
    net.n = 1;
    net.nodes = {{NodeKind::Copy, 0.0, {}}};
    net.edges = {{0, 0, 1.0}};
    const Tpm tpm = build_tpm(net);
    CHECK(tpm.cond(0, 0) == 0.0);
    CHECK(tpm.cond(0, 1) == 1.0);
}

TEST_CASE("two-node AND pair fires only from the all-on state") {
    const Tpm tpm = build_tpm(two_node_and_pair());
    for (StateIndex s = 0; s < 4; ++s) {
        const double expected = s == 3 ? 1.0 : 0.0;
        CHECK(tpm.cond(0, s) == expected);
        CHECK(tpm.cond(1, s) == expected);
    }
}

TEST_CASE("deterministic gate truth tables") {
    // Node kinds, one per node: or, xor, majority, threshold; inputs are
    // nodes 4 and 5 (copy-of-self so their bits are free).
    CausalNetwork net;
    net.n = 6;
    net.nodes = {{NodeKind::Or, 0.0, {}},       {NodeKind::Xor, 0.0, {}},
                 {NodeKind::Majority, 0.0, {}}, {NodeKind::Threshold, 1.5, {}},
                 {NodeKind::Copy, 0.0, {}},     {NodeKind::Copy, 0.0, {}}};
    net.edges = {{4, 0, 1.0}, {5, 0, 1.0}, {4, 1, 1.0}, {5, 1, 1.0},
                 {4, 2, 1.0}, {5, 2, 1.0}, {4, 3, 1.0}, {5, 3, 1.0},
                 {4, 4, 1.0}, {5, 5, 1.0}};
    const Tpm tpm = build_tpm(net);
    for (int b4 = 0; b4 < 2; ++b4)
        for (int b5 = 0; b5 < 2; ++b5) {
            const StateIndex s = (StateIndex(b4) << 4) | (StateIndex(b5) << 5);
            const int on = b4 + b5;
            CHECK(tpm.cond(0, s) == (on > 0 ? 1.0 : 0.0));      // or
            CHECK(tpm.cond(1, s) == (on % 2 == 1 ? 1.0 : 0.0)); // xor
            // majority over total weight 2: strict u > 1
            CHECK(tpm.cond(2, s) == (on == 2 ? 1.0 : 0.0));
            // threshold at 1.5, closed
            CHECK(tpm.cond(3, s) == (on == 2 ? 1.0 : 0.0));
        }
}

TEST_CASE("vacuous gates: and true, or false, copy without input off") {
    CausalNetwork net;
    net.n = 3;
    net.nodes = {{NodeKind::And, 0.0, {}}, {NodeKind::Or, 0.0, {}}, {NodeKind::Copy, 0.0, {}}};
    const Tpm tpm = build_tpm(net);
    for (StateIndex s = 0; s < 8; ++s) {
        CHECK(tpm.cond(0, s) == 1.0);
        CHECK(tpm.cond(1, s) == 0.0);
        CHECK(tpm.cond(2, s) == 0.0);
    }
}

TEST_CASE("threshold boundary is closed, majority tie stays off") {
    CausalNetwork net;
    net.n = 2;
    net.nodes = {{NodeKind::Threshold, 1.0, {}}, {NodeKind::Majority, 0.0, {}}};
    net.edges = {{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}};
    const Tpm tpm = build_tpm(net);
    CHECK(tpm.cond(0, 1) == 1.0); // u = 1 = theta -> fires
    CHECK(tpm.cond(0, 0) == 0.0);
    // majority total weight 2: u = 1 is exactly half -> off
    CHECK(tpm.cond(1, 1) == 0.0);
    CHECK(tpm.cond(1, 3) == 1.0);
}

TEST_CASE("noisy mechanisms match the logistic rule computed by hand") {
    const double beta = 2.5;
    CausalNetwork net;
    net.n = 3;
    net.nodes = {{NodeKind::Majority, 0.0, beta},
                 {NodeKind::Threshold, 0.4, beta},
                 {NodeKind::Xor, 0.0, beta}};
    net.edges = {{0, 0, 0.8}, {1, 0, -0.3}, {2, 0, 1.1}, {0, 1, 0.9},
                 {2, 1, -0.7}, {0, 2, 1.0}, {1, 2, 1.0}};
    const Tpm tpm = build_tpm(net);

    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    const double w_total0 = 0.8 - 0.3 + 1.1;
    for (StateIndex s = 0; s < 8; ++s) {
        const int b0 = s & 1, b1 = (s >> 1) & 1, b2 = (s >> 2) & 1;
        const double u0 = 0.8 * b0 - 0.3 * b1 + 1.1 * b2;
        CHECK(tpm.cond(0, s) == doctest::Approx(sigmoid(beta * (u0 - 0.5 * w_total0)))
                                    .epsilon(1e-15));
        const double u1 = 0.9 * b0 - 0.7 * b2;
        CHECK(tpm.cond(1, s) == doctest::Approx(sigmoid(beta * (u1 - 0.4))).epsilon(1e-15));
        const int parity = b0 ^ b1;
        CHECK(tpm.cond(2, s) ==
              doctest::Approx(sigmoid(beta * (parity ? 1.0 : -1.0))).epsilon(1e-15));
    }
}

TEST_CASE("tpm rows define distributions and joint_row is consistent") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const CausalNetwork net = testutil::random_network(2 + rep % 4, rng);
        const Tpm tpm = build_tpm(net);
        CHECK((tpm.cond.array() >= 0.0).all());
        CHECK((tpm.cond.array() <= 1.0).all());
        for (StateIndex s = 0; s < (StateIndex{1} << net.n); ++s) {
            const Eigen::VectorXd row = joint_row(tpm, s);
            CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK((row.array() >= 0.0).all());
            // joint_row must factor exactly as the product of per-node
            // Bernoulli terms (same association order as its definition).
            for (StateIndex t = 0; t < (StateIndex{1} << net.n); ++t) {
                double p = 1.0;
                for (int i = 0; i < net.n; ++i)
                    p *= state_bit(t, i) ? tpm.cond(i, s) : 1.0 - tpm.cond(i, s);
                CHECK(row(t) == doctest::Approx(p).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("deterministic networks give one-hot joint rows") {
    const Tpm tpm = build_tpm(two_node_and_pair());
    for (StateIndex s = 0; s < 4; ++s) {
        const Eigen::VectorXd row = joint_row(tpm, s);
        const StateIndex expect = s == 3 ? 3 : 0;
        for (StateIndex t = 0; t < 4; ++t) CHECK(row(t) == (t == expect ? 1.0 : 0.0));
    }
}

TEST_CASE("networks without cross edges factorize exactly") {
    // Self-loops only: the joint row must equal the product of per-node
    // marginals bit for bit.
    CausalNetwork net;
    net.n = 4;
    net.nodes = {{NodeKind::Copy, 0.0, {}},
                 {NodeKind::Threshold, 0.5, 1.7},
                 {NodeKind::Or, 0.0, 3.0},
                 {NodeKind::And, 0.0, {}}};
    net.edges = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}};
    const Tpm tpm = build_tpm(net);
    for (StateIndex s = 0; s < 16; ++s) {
        const Eigen::VectorXd row = joint_row(tpm, s);
        for (StateIndex t = 0; t < 16; ++t) {
            double p = 1.0;
            for (int i = 0; i < 4; ++i)
                p *= state_bit(t, i) ? tpm.cond(i, s) : 1.0 - tpm.cond(i, s);
            CHECK(row(t) == p); // exact: same association order
        }
    }
}

TEST_CASE("node degrees count nonzero-weight edges and sums agree") {
    std::mt19937_64 rng(7);
    const CausalNetwork net = testutil::random_network(5, rng);
    int in_sum = 0, out_sum = 0, nonzero = 0;
    for (int i = 0; i < net.n; ++i) {
        const auto [in, out] = node_degree(net, i);
        in_sum += in;
        out_sum += out;
    }
    for (const Edge& e : net.edges)
        if (e.weight != 0.0) ++nonzero;
    CHECK(in_sum == nonzero);
    CHECK(out_sum == nonzero);
    CHECK_THROWS_AS(node_degree(net, net.n), ConfigError);
}

TEST_CASE("relabeling nodes permutes the tpm consistently") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 3 + rep % 3;
        const CausalNetwork net = testutil::random_network(n, rng);

        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[static_cast<int>(canonical_double(rng) * (i + 1))]);

        CausalNetwork relabeled;
        relabeled.n = n;
        relabeled.nodes.resize(n);
        for (int i = 0; i < n; ++i) relabeled.nodes[perm[i]] = net.nodes[i];
        for (const Edge& e : net.edges)
            relabeled.edges.push_back({perm[e.src], perm[e.dst], e.weight});

        auto map_state = [&](StateIndex s) {
            StateIndex t = 0;
            for (int i = 0; i < n; ++i)
                if (state_bit(s, i)) t |= StateIndex{1} << perm[i];
            return t;
        };

        const Tpm a = build_tpm(net);
        const Tpm b = build_tpm(relabeled);
        for (StateIndex s = 0; s < (StateIndex{1} << n); ++s)
            for (int i = 0; i < n; ++i)
                CHECK(a.cond(i, s) == b.cond(perm[i], map_state(s)));
    }
}

TEST_CASE("stationary distribution of a two-state cycle splits evenly") {
    // Node 0 copies node 1 and vice versa: (0,1) <-> (1,0).
    CausalNetwork net;
    net.n = 2;
    net.nodes = {{NodeKind::Copy, 0.0, {}}, {NodeKind::Copy, 0.0, {}}};
    net.edges = {{1, 0, 1.0}, {0, 1, 1.0}};
    const Tpm tpm = build_tpm(net);
    const Eigen::VectorXd occ = stationary_distribution(tpm, 10, 1000, 99, /*start=*/2);
    CHECK(occ(1) == 0.5);
    CHECK(occ(2) == 0.5);
    CHECK(occ(0) == 0.0);
    CHECK(occ(3) == 0.0);
}

TEST_CASE("chain sampler matches an independent implementation of its policy") {
    std::mt19937_64 net_rng(5);
    const CausalNetwork net = testutil::random_network(3, net_rng);
    const Tpm tpm = build_tpm(net);

    const std::uint64_t seed = 1234;
    const int burn_in = 17, samples = 400;
    const StateIndex start = 5;

    // Straight re-implementation from the documented policy.
    std::mt19937_64 rng(seed);
    StateIndex s = start;
    auto advance = [&]() {
        StateIndex next = 0;
        for (int i = 0; i < tpm.n; ++i) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u < tpm.cond(i, s)) next |= StateIndex{1} << i;
        }
        s = next;
    };
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(8);
    for (int b = 0; b < burn_in; ++b) advance();
    for (int k = 0; k < samples; ++k) {
        counts(s) += 1.0;
        advance();
    }
    counts /= samples;

    const Eigen::VectorXd occ = stationary_distribution(tpm, burn_in, samples, seed, start);
    for (int i = 0; i < 8; ++i) CHECK(occ(i) == counts(i));
}

TEST_CASE("validation rejects malformed networks") {
    CausalNetwork net;
    net.n = 2;
    net.nodes = {{NodeKind::Or, 0.0, {}}, {NodeKind::Copy, 0.0, {}}};
    net.edges = {{0, 1, 1.0}};
    CHECK_NOTHROW(validate(net));

    SUBCASE("edge endpoint out of range") {
        net.edges.push_back({5, 0, 1.0});
        CHECK_THROWS_WITH_AS(validate(net), doctest::Contains("src=5"), ConfigError);
    }
    SUBCASE("duplicate edge") {
        net.edges.push_back({0, 1, -2.0});
        CHECK_THROWS_WITH_AS(validate(net), doctest::Contains("duplicate"), ConfigError);
    }
    SUBCASE("copy with two inputs") {
        net.edges.push_back({1, 1, 1.0});
        CHECK_THROWS_WITH_AS(validate(net), doctest::Contains("copy"), ConfigError);
    }
    SUBCASE("nonpositive beta") {
        net.nodes[0].beta = 0.0;
        CHECK_THROWS_AS(validate(net), ConfigError);
    }
    SUBCASE("non-finite weight") {
        net.edges[0].weight = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(validate(net), ConfigError);
    }
}

TEST_CASE("tpm construction enforces the size cap") {
    CausalNetwork net;
    net.n = 21;
    net.nodes.assign(21, {NodeKind::Or, 0.0, {}});
    CHECK_THROWS_AS(build_tpm(net), CapacityError);
}
