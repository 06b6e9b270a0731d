#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "arboreal/electrical.hpp"
#include "arboreal/forest_measure.hpp"
#include "arboreal/graph.hpp"

namespace arboreal {

/// xoshiro256** seeded through splitmix64. Fixed, documented algorithm so a
/// seed reproduces the identical sample stream on any platform; random
/// selections below are integer-exact (no floating point in the draws).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        auto splitmix = [&x]() {
            x += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            return z ^ (z >> 31);
        };
        for (auto& s : s_) s = splitmix();
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, n), unbiased by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw Error("next_below(0)");
        std::uint64_t min = (-n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= min) return r % n;
        }
    }

    /// Uniform in [0, n) for big n, by masked top-limb rejection.
    mpz_class next_mpz_below(const mpz_class& n) {
        if (n <= 0) throw Error("next_mpz_below needs n > 0");
        std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
        std::size_t words = (bits + 63) / 64;
        for (;;) {
            mpz_class r = 0;
            for (std::size_t i = 0; i < words; ++i) {
                r <<= 64;
                mpz_class w(0);
                std::uint64_t raw = next_u64();
                mpz_import(w.get_mpz_t(), 1, 1, sizeof(raw), 0, 0, &raw);
                r |= w;
            }
            // Trim to the exact bit width before the range test.
            mpz_class mask = (mpz_class(1) << bits) - 1;
            r &= mask;
            if (r < n) return r;
        }
    }

    /// Bernoulli(p) for rational p in [0,1], exact.
    bool bernoulli(const Rational& p) {
        if (p.sign() <= 0) return false;
        if (p >= Rational(1)) return true;
        return next_mpz_below(p.denominator()) < p.numerator();
    }

private:
    std::uint64_t s_[4];
};

/// One spanning tree sampled proportionally to the conductance product, by
/// loop-erased random walks rooted at the lowest vertex id. Walk steps pick
/// incident non-loop edges with probability proportional to conductance.
inline std::vector<int> wilson_ust(const Multigraph& g, const Conductances& c, std::uint64_t seed) {
    if (!is_connected(g)) throw DisconnectedError("Wilson's algorithm needs a connected graph");
    if (g.n_vertices() == 0) throw InvalidOperationError("empty graph");

    // Per-vertex transition tables over a common denominator, exact.
    struct Slot { int edge_id; int to; mpz_class cum; };
    std::map<int, std::vector<Slot>> table;
    std::map<int, mpz_class> total;
    for (int v : g.vertices()) {
        mpz_class lcm(1);
        std::vector<const Edge*> inc;
        for (const auto* e : g.incident(v)) {
            if (e->is_loop()) continue;
            inc.push_back(e);
            mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), c.at(e->id).denominator().get_mpz_t());
        }
        mpz_class run(0);
        for (const auto* e : inc) {
            const Rational& ce = c.at(e->id);
            run += ce.numerator() * (lcm / ce.denominator());
            table[v].push_back({e->id, e->other(v), run});
        }
        total[v] = run;
    }

    Rng rng(seed);
    int root = g.vertices().front();
    std::set<int> in_tree{root};
    std::map<int, int> next_edge; // successor edge choice per vertex; overwrite = loop erasure
    std::vector<int> tree;

    for (int start : g.vertices()) {
        if (in_tree.count(start)) continue;
        int at = start;
        while (!in_tree.count(at)) {
            const auto& slots = table.at(at);
            mpz_class draw = rng.next_mpz_below(total.at(at));
            const Slot* pick = nullptr;
            for (const auto& s : slots)
                if (draw < s.cum) { pick = &s; break; }
            next_edge[at] = pick->edge_id;
            at = pick->to;
        }
        // Commit the loop-erased path.
        at = start;
        while (!in_tree.count(at)) {
            int eid = next_edge.at(at);
            tree.push_back(eid);
            in_tree.insert(at);
            at = g.edge(eid).other(at);
        }
    }
    std::sort(tree.begin(), tree.end());
    return tree;
}

struct SampleOptions {
    Rational acceptance_floor{1, 10000};
    std::uint64_t trial_window = 50000;
};

struct SampleReport {
    std::uint64_t n_samples = 0; // accepted samples
    std::uint64_t proposals = 0;
    std::uint64_t rng_seed = 0;
    Rational acceptance_rate;
    std::map<int, std::uint64_t> edge_counts;
    std::map<std::pair<int, int>, std::uint64_t> pair_counts;

    Rational edge_frequency(int id) const {
        auto it = edge_counts.find(id);
        std::uint64_t k = it == edge_counts.end() ? 0 : it->second;
        return Rational(static_cast<long>(k), static_cast<long>(n_samples));
    }

    Rational pair_frequency(int a, int b) const {
        auto it = pair_counts.find({std::min(a, b), std::max(a, b)});
        std::uint64_t k = it == pair_counts.end() ? 0 : it->second;
        return Rational(static_cast<long>(k), static_cast<long>(n_samples));
    }
};

/// Rejection sampling of the uniform-beta forest measure through Bernoulli
/// bond percolation at p = beta/(1+beta), rejecting cyclic configurations.
/// `n` counts accepted samples.
inline SampleReport arboreal_rejection(const Multigraph& g, const Rational& beta,
                                       std::uint64_t seed, std::uint64_t n,
                                       const SampleOptions& opts = {}) {
    if (beta.sign() <= 0) throw Error("beta must be positive");
    Rational p = beta / (Rational(1) + beta);

    std::map<int, int> vidx;
    for (int v : g.vertices()) vidx[v] = static_cast<int>(vidx.size());
    const auto& edges = g.edges();

    SampleReport rep;
    rep.rng_seed = seed;
    Rng rng(seed);
    std::vector<int> chosen;
    while (rep.n_samples < n) {
        ++rep.proposals;
        chosen.clear();
        FlatUnionFind uf(g.n_vertices());
        bool acyclic = true;
        for (const auto& e : edges) {
            if (!rng.bernoulli(p)) continue;
            if (e.is_loop() || !uf.unite(vidx.at(e.u), vidx.at(e.v))) { acyclic = false; break; }
            chosen.push_back(e.id);
        }
        if (!acyclic) {
            if (rep.proposals >= opts.trial_window && rep.n_samples == 0)
                throw TooDenseError("acceptance rate below floor; use the exact methods");
            if (rep.proposals >= opts.trial_window) {
                Rational rate(static_cast<long>(rep.n_samples), static_cast<long>(rep.proposals));
                if (rate < opts.acceptance_floor)
                    throw TooDenseError("acceptance rate below floor; use the exact methods");
            }
            continue;
        }
        ++rep.n_samples;
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            ++rep.edge_counts[chosen[i]];
            for (std::size_t j = i + 1; j < chosen.size(); ++j)
                ++rep.pair_counts[{std::min(chosen[i], chosen[j]), std::max(chosen[i], chosen[j])}];
        }
    }
    rep.acceptance_rate = Rational(static_cast<long>(rep.n_samples),
                                   static_cast<long>(rep.proposals));
    return rep;
}

struct NCProbe {
    double estimate = 0.0;
    double stderr_est = 0.0;
    std::uint64_t n_samples = 0;
};

/// Monte Carlo probe of P[e1]P[e2] - P[e1e2] with a delta-method standard
/// error. Advisory only; never a verdict.
inline NCProbe mc_nc_probe(const Multigraph& g, const Rational& beta, int e1, int e2,
                           std::uint64_t seed, std::uint64_t n, const SampleOptions& opts = {}) {
    SampleReport rep = arboreal_rejection(g, beta, seed, n, opts);
    double N = static_cast<double>(rep.n_samples);
    double p1 = rep.edge_frequency(e1).to_double();
    double p2 = rep.edge_frequency(e2).to_double();
    double p12 = rep.pair_frequency(e1, e2).to_double();

    NCProbe probe;
    probe.n_samples = rep.n_samples;
    probe.estimate = p1 * p2 - p12;

    // Delta method for f(p1,p2,p12) = p1 p2 - p12 over the multinomial
    // covariance of the three indicators.
    double g1 = p2, g2 = p1, g3 = -1.0;
    double v11 = p1 * (1 - p1), v22 = p2 * (1 - p2), v33 = p12 * (1 - p12);
    double v12 = p12 - p1 * p2;
    double v13 = p12 * (1 - p1);
    double v23 = p12 * (1 - p2);
    double var = g1 * g1 * v11 + g2 * g2 * v22 + g3 * g3 * v33 +
                 2 * (g1 * g2 * v12 + g1 * g3 * v13 + g2 * g3 * v23);
    probe.stderr_est = var > 0 ? std::sqrt(var / N) : 0.0;
    return probe;
}

} // namespace arboreal
