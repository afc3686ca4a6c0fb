#include "ncac/phi.hpp"

#include <algorithm>
#include <cmath>

#include "ncac/errors.hpp"
#include "ncac/parallel.hpp"

namespace ncac {

Direction direction_from_string(const std::string& s) {
    if (s == "cause") return Direction::Cause;
    if (s == "effect") return Direction::Effect;
    if (s == "min") return Direction::MinCauseEffect;
    throw ConfigError("unknown direction '" + s + "' (want cause|effect|min)");
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::Cause: return "cause";
        case Direction::Effect: return "effect";
        case Direction::MinCauseEffect: return "min";
    }
    throw ConfigError("invalid direction enum value");
}

Metric metric_from_string(const std::string& s) {
    if (s == "kl") return Metric::Kl;
    if (s == "emd") return Metric::EmdHamming;
    throw ConfigError("unknown metric '" + s + "' (want kl|emd)");
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::Kl: return "kl";
        case Metric::EmdHamming: return "emd";
    }
    throw ConfigError("invalid metric enum value");
}

std::vector<Bipartition> enumerate_bipartitions(int n) {
    if (n < 2) throw ConfigError("bipartitions need n >= 2");
    if (n > 31) throw CapacityError("bipartition masks capped at 31 nodes");
    const std::uint32_t all = (std::uint32_t{1} << n) - 1;
    std::vector<Bipartition> cuts;
    cuts.reserve((std::size_t{1} << (n - 1)) - 1);
    // Canonical form: part_a holds node 0, so each unordered split appears once.
    for (std::uint32_t a = 1; a < all; a += 2) cuts.push_back({a, all & ~a});
    return cuts;
}

namespace {

void check_masks(const Tpm& tpm, StateIndex s, std::uint32_t over, std::uint32_t noised) {
    const std::uint32_t all = (std::uint32_t{1} << tpm.n) - 1;
    if (s > all) throw ConfigError("state out of range");
    if ((over | all) != all || (noised | all) != all)
        throw ConfigError("node mask out of range");
    if (over == 0) throw ConfigError("repertoire needs a nonempty node subset");
}

// Product of per-node Bernoulli factors restricted to `over`, conditioned on
// full prior state s, expanded in ascending node order of `over`.
Eigen::VectorXd conditional_product(const Tpm& tpm, StateIndex s, std::uint32_t over) {
    Eigen::VectorXd probs = Eigen::VectorXd::Ones(1);
    for (std::uint32_t m = over; m; m &= m - 1) {
        const int i = std::countr_zero(m);
        const double q = tpm.cond(i, s);
        Eigen::VectorXd next(probs.size() * 2);
        for (Eigen::Index x = 0; x < probs.size(); ++x) {
            next(x) = probs(x) * (1.0 - q);
            next(x + probs.size()) = probs(x) * q;
        }
        probs.swap(next);
    }
    return probs;
}

} // namespace

Repertoire effect_repertoire(const Tpm& tpm, StateIndex s, std::uint32_t over,
                             std::uint32_t noised) {
    check_masks(tpm, s, over, noised);
    const int k = std::popcount(noised);
    Repertoire rep;
    rep.over = over;
    rep.direction = Direction::Effect;
    rep.probs = Eigen::VectorXd::Zero(Eigen::Index{1} << std::popcount(over));
    // Average over the 2^k fair-coin assignments of the noised inputs.
    for (StateIndex a = 0; a < (StateIndex{1} << k); ++a) {
        const StateIndex s_a = (s & ~noised) | unpack_state(a, noised);
        rep.probs += conditional_product(tpm, s_a, over);
    }
    rep.probs /= static_cast<double>(StateIndex{1} << k);
    return rep;
}

Repertoire cause_repertoire(const Tpm& tpm, StateIndex s, std::uint32_t over,
                            std::uint32_t noised) {
    check_masks(tpm, s, over, noised);
    const std::uint32_t all = (std::uint32_t{1} << tpm.n) - 1;
    const std::uint32_t observed = all & ~noised;
    const StateIndex n_states = StateIndex{1} << tpm.n;

    Repertoire rep;
    rep.over = over;
    rep.direction = Direction::Cause;
    rep.probs = Eigen::VectorXd::Zero(Eigen::Index{1} << std::popcount(over));

    // Uniform prior over prior states; likelihood of the observed bits only.
    double total = 0.0;
    for (StateIndex p = 0; p < n_states; ++p) {
        double lik = 1.0;
        for (std::uint32_t m = observed; m; m &= m - 1) {
            const int j = std::countr_zero(m);
            lik *= state_bit(s, j) ? tpm.cond(j, p) : 1.0 - tpm.cond(j, p);
        }
        rep.probs(pack_state(p, over)) += lik;
        total += lik;
    }
    if (total == 0.0) {
        // No prior state can produce the observation: unreachable state.
        rep.probs.setConstant(1.0 / static_cast<double>(rep.probs.size()));
        rep.uniform_fallback = true;
    } else {
        rep.probs /= total;
    }
    return rep;
}

double kl_bits(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size()) throw ConfigError("kl_bits: length mismatch");
    constexpr double eps = 1e-12;
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) <= 0.0) continue;
        const double qi = q(i) > 0.0 ? q(i) : eps;
        kl += p(i) * std::log2(p(i) / qi);
    }
    return kl;
}

namespace {

double divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q, Metric metric) {
    return metric == Metric::Kl ? kl_bits(p, q) : emd_hamming(p, q);
}

struct WholeRepertoires {
    std::optional<Repertoire> cause, effect;
};

// ei for one direction, reusing the precomputed whole repertoire (it is
// cut-independent, so MIP sweeps compute it once).
EiValue ei_one_direction(const Tpm& tpm, StateIndex s, const Bipartition& cut,
                         Direction dir, Metric metric, const Repertoire& whole) {
    const Repertoire ra = dir == Direction::Effect
                              ? effect_repertoire(tpm, s, cut.part_a, cut.part_b)
                              : cause_repertoire(tpm, s, cut.part_a, cut.part_b);
    const Repertoire rb = dir == Direction::Effect
                              ? effect_repertoire(tpm, s, cut.part_b, cut.part_a)
                              : cause_repertoire(tpm, s, cut.part_b, cut.part_a);
    const StateIndex n_states = StateIndex{1} << tpm.n;
    Eigen::VectorXd prod(n_states);
    for (StateIndex x = 0; x < n_states; ++x)
        prod(x) = ra.probs(pack_state(x, cut.part_a)) * rb.probs(pack_state(x, cut.part_b));

    EiValue v;
    v.ei = divergence(whole.probs, prod, metric);
    if (std::abs(v.ei) < kEiZeroSnap) v.ei = 0.0;
    const int smaller = std::min(std::popcount(cut.part_a), std::popcount(cut.part_b));
    v.normalized_ei = v.ei / static_cast<double>(smaller);
    v.unreachable = whole.uniform_fallback || ra.uniform_fallback || rb.uniform_fallback;
    return v;
}

} // namespace

EiValue effective_information(const Tpm& tpm, StateIndex s, const Bipartition& cut,
                              Direction dir, Metric metric) {
    const std::uint32_t all = (std::uint32_t{1} << tpm.n) - 1;
    if (cut.part_a == 0 || cut.part_b == 0 || (cut.part_a & cut.part_b) != 0 ||
        (cut.part_a | cut.part_b) != all)
        throw ConfigError("cut must split all nodes into two nonempty disjoint parts");

    if (dir == Direction::MinCauseEffect) {
        const EiValue c = effective_information(tpm, s, cut, Direction::Cause, metric);
        const EiValue e = effective_information(tpm, s, cut, Direction::Effect, metric);
        EiValue v;
        v.ei = std::min(c.ei, e.ei);
        v.normalized_ei = std::min(c.normalized_ei, e.normalized_ei);
        v.unreachable = c.unreachable;
        return v;
    }
    const Repertoire whole = dir == Direction::Effect
                                 ? effect_repertoire(tpm, s, all, 0)
                                 : cause_repertoire(tpm, s, all, 0);
    return ei_one_direction(tpm, s, cut, dir, metric, whole);
}

namespace {

PhiResult find_mip_single(const Tpm& tpm, StateIndex s, Direction dir, Metric metric,
                          int threads) {
    const std::uint32_t all = (std::uint32_t{1} << tpm.n) - 1;
    const Repertoire whole = dir == Direction::Effect
                                 ? effect_repertoire(tpm, s, all, 0)
                                 : cause_repertoire(tpm, s, all, 0);
    const std::vector<Bipartition> cuts = enumerate_bipartitions(tpm.n);
    std::vector<EiValue> values(cuts.size());
    parallel_for(
        0, static_cast<std::int64_t>(cuts.size()),
        [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t c = lo; c < hi; ++c)
                values[c] = ei_one_direction(tpm, s, cuts[c], dir, metric, whole);
        },
        threads);

    // Serial argmin over the dense value table keeps the result independent
    // of the worker count. Ties go to the lowest part_a mask.
    std::size_t best = 0;
    for (std::size_t c = 1; c < cuts.size(); ++c)
        if (values[c].normalized_ei < values[best].normalized_ei) best = c;

    PhiResult res;
    res.state = s;
    res.direction = dir;
    res.mip = cuts[best];
    res.phi = std::max(values[best].ei, 0.0);
    res.unreachable = whole.uniform_fallback;
    if (tpm.n <= 12) {
        res.per_partition.resize(cuts.size());
        for (std::size_t c = 0; c < cuts.size(); ++c)
            res.per_partition[c] = {cuts[c], values[c].ei, values[c].normalized_ei};
    }
    return res;
}

} // namespace

PhiResult find_mip(const Tpm& tpm, StateIndex s, Direction dir, Metric metric,
                   int threads, int hard_cap) {
    if (tpm.n < 2) {
        PhiResult res;
        res.state = s;
        res.direction = dir;
        res.phi = 0.0; // no bipartition exists; integration is zero by definition
        return res;
    }
    if (tpm.n > hard_cap)
        throw CapacityError("find_mip over n=" + std::to_string(tpm.n) + " needs 2^" +
                            std::to_string(tpm.n) + "=" +
                            std::to_string(std::uint64_t{1} << tpm.n) +
                            " states per repertoire; hard cap is n=" + std::to_string(hard_cap));
    if (s >= (StateIndex{1} << tpm.n)) throw ConfigError("state out of range");

    if (dir == Direction::MinCauseEffect) {
        PhiResult cause = find_mip_single(tpm, s, Direction::Cause, metric, threads);
        PhiResult effect = find_mip_single(tpm, s, Direction::Effect, metric, threads);
        PhiResult res = cause.phi < effect.phi ? std::move(cause) : std::move(effect);
        res.direction = Direction::MinCauseEffect;
        res.unreachable = cause.unreachable;
        return res;
    }
    return find_mip_single(tpm, s, dir, metric, threads);
}

PhiBarResult phi_mean(const Tpm& tpm, const std::optional<Eigen::VectorXd>& weights,
                      Direction dir, Metric metric, int threads, int hard_cap) {
    const StateIndex n_states = StateIndex{1} << tpm.n;
    Eigen::VectorXd w;
    if (weights) {
        w = *weights;
        if (w.size() != static_cast<Eigen::Index>(n_states))
            throw ConfigError("weighting must have one entry per state (" +
                              std::to_string(n_states) + ")");
        if ((w.array() < 0.0).any() || std::abs(w.sum() - 1.0) > 1e-9)
            throw ConfigError("weighting must be a distribution over states");
    } else {
        w = Eigen::VectorXd::Constant(n_states, 1.0 / static_cast<double>(n_states));
    }
    if (tpm.n >= 2 && tpm.n > hard_cap) // surface the capacity error before looping
        find_mip(tpm, 0, dir, metric, threads, hard_cap);

    std::vector<double> phis(n_states);
    parallel_for(
        0, static_cast<std::int64_t>(n_states),
        [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t s = lo; s < hi; ++s)
                phis[s] = find_mip(tpm, static_cast<StateIndex>(s), dir, metric, 1, hard_cap).phi;
        },
        threads);

    PhiBarResult res;
    res.weighting = weights ? "empirical" : "uniform";
    res.per_state.reserve(n_states);
    for (StateIndex s = 0; s < n_states; ++s) {
        res.per_state.push_back({s, phis[s], w(s)});
        res.phi_bar += w(s) * phis[s];
    }
    return res;
}

} // namespace ncac
