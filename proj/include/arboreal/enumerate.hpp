#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "arboreal/graph.hpp"

namespace arboreal {

namespace detail {

/// Bit position of pair (u,v), u<v, in the u-major order used by the
/// complete-graph generator.
inline int pair_bit(int n, int u, int v) {
    return u * n - u * (u + 1) / 2 + (v - u - 1);
}

/// Iterated degree refinement (1-WL): isomorphism-invariant vertex colors
/// used to prune the permutation search.
inline std::vector<int> wl_colors(int n, const std::vector<std::vector<int>>& adj_count) {
    std::vector<int> color(n);
    for (int v = 0; v < n; ++v)
        color[v] = std::accumulate(adj_count[v].begin(), adj_count[v].end(), 0);
    for (int round = 0; round < n; ++round) {
        std::vector<std::pair<int, std::vector<int>>> sigs(n);
        for (int v = 0; v < n; ++v) {
            std::vector<int> nbr;
            for (int w = 0; w < n; ++w)
                for (int k = 0; k < adj_count[v][w]; ++k) nbr.push_back(color[w]);
            std::sort(nbr.begin(), nbr.end());
            sigs[v] = {color[v], std::move(nbr)};
        }
        // New ids follow sorted signature order, so colorings of isomorphic
        // graphs stay comparable across graphs.
        std::map<std::pair<int, std::vector<int>>, int> sig_to_new;
        for (const auto& s : sigs) sig_to_new[s] = 0;
        int next_id = 0;
        for (auto& [sig, id] : sig_to_new) id = next_id++;
        std::vector<int> next(n);
        for (int v = 0; v < n; ++v) next[v] = sig_to_new[sigs[v]];
        if (next == color) break;
        color = next;
    }
    return color;
}

/// Enumerates the color-class-respecting vertex orderings and feeds each to
/// `fn(perm)` where perm[slot] = original vertex. Classes are laid out in
/// sorted-color order, so the ordering set is isomorphism-invariant.
template <class Fn>
void for_each_class_permutation(const std::vector<int>& color, Fn&& fn) {
    int n = static_cast<int>(color.size());
    std::map<int, std::vector<int>> classes;
    for (int v = 0; v < n; ++v) classes[color[v]].push_back(v);
    std::vector<std::vector<int>> groups;
    for (auto& [c, members] : classes) groups.push_back(members);

    std::vector<int> perm(n);
    std::function<void(std::size_t, int)> rec = [&](std::size_t gi, int base) {
        if (gi == groups.size()) {
            fn(perm);
            return;
        }
        std::vector<int>& g = groups[gi];
        std::sort(g.begin(), g.end());
        do {
            for (std::size_t i = 0; i < g.size(); ++i) perm[base + static_cast<int>(i)] = g[i];
            rec(gi + 1, base + static_cast<int>(g.size()));
        } while (std::next_permutation(g.begin(), g.end()));
    };
    rec(0, 0);
}

} // namespace detail

/// Minimum adjacency code of a simple graph given as an edge bitmask over the
/// u-major pair order, taken over all class-respecting vertex permutations.
inline std::uint32_t canonical_code(int n, std::uint32_t mask) {
    std::vector<std::vector<int>> adj(n, std::vector<int>(n, 0));
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (mask >> detail::pair_bit(n, u, v) & 1u) adj[u][v] = adj[v][u] = 1;

    std::vector<int> color = detail::wl_colors(n, adj);
    std::uint32_t best = ~0u;
    detail::for_each_class_permutation(color, [&](const std::vector<int>& perm) {
        std::uint32_t code = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (adj[perm[i]][perm[j]]) code |= 1u << detail::pair_bit(n, i, j);
        if (code < best) best = code;
    });
    return best;
}

/// Streams all connected simple graphs on exactly n vertices, n = 2..n_max,
/// as edge subsets of K_n. With dedup, yields one representative per
/// isomorphism class (the minimum-code labeled form). Caps at n_max <= 8.
template <class Fn>
void enumerate_small_graphs(int n_max, bool dedup, const Rational& weight, Fn&& fn) {
    if (n_max > 8) throw SizeLimitError("small-graph enumeration capped at 8 vertices");
    for (int n = 2; n <= n_max; ++n) {
        int m = n * (n - 1) / 2;
        for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
            // Connectivity over all n vertices.
            std::vector<int> ids(n);
            std::iota(ids.begin(), ids.end(), 0);
            UnionFind uf(ids);
            int classes = n;
            for (int u = 0; u < n; ++u)
                for (int v = u + 1; v < n; ++v)
                    if (mask >> detail::pair_bit(n, u, v) & 1u)
                        if (uf.unite(u, v)) --classes;
            if (classes != 1) continue;
            if (dedup && canonical_code(n, mask) != mask) continue;

            Multigraph g = Multigraph::with_vertices(n);
            for (int u = 0; u < n; ++u)
                for (int v = u + 1; v < n; ++v)
                    if (mask >> detail::pair_bit(n, u, v) & 1u) g.add_edge(u, v, weight);
            fn(g);
        }
    }
}

inline std::vector<Multigraph> small_connected_graphs(int n_max, bool dedup,
                                                      const Rational& weight = Rational(1)) {
    std::vector<Multigraph> out;
    enumerate_small_graphs(n_max, dedup, weight, [&](const Multigraph& g) { out.push_back(g); });
    return out;
}

/// Structure-only isomorphism for small multigraphs (weights ignored),
/// by brute permutation over WL color classes of the adjacency count matrix.
inline bool is_isomorphic(const Multigraph& a, const Multigraph& b) {
    if (a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges()) return false;
    int n = static_cast<int>(a.n_vertices());
    if (n > 8) throw SizeLimitError("isomorphism test capped at 8 vertices");

    auto count_matrix = [n](const Multigraph& g) {
        std::map<int, int> idx;
        int next = 0;
        for (int v : g.vertices()) idx[v] = next++;
        std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
        for (const auto& e : g.edges()) {
            if (e.is_loop()) {
                m[idx.at(e.u)][idx.at(e.u)] += 1;
            } else {
                m[idx.at(e.u)][idx.at(e.v)] += 1;
                m[idx.at(e.v)][idx.at(e.u)] += 1;
            }
        }
        return m;
    };
    auto ma = count_matrix(a);
    auto mb = count_matrix(b);

    auto ca = detail::wl_colors(n, ma);
    auto cb = detail::wl_colors(n, mb);
    {
        auto sa = ca, sb = cb;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return false;
    }

    bool found = false;
    // Try mappings slot-by-slot: order b's vertices canonically by color,
    // permute a's vertices within matching classes.
    std::map<int, std::vector<int>> b_classes;
    for (int v = 0; v < n; ++v) b_classes[cb[v]].push_back(v);
    std::vector<int> b_order;
    for (auto& [c, members] : b_classes)
        for (int v : members) b_order.push_back(v);

    detail::for_each_class_permutation(ca, [&](const std::vector<int>& perm) {
        if (found) return;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (ma[perm[i]][perm[j]] != mb[b_order[i]][b_order[j]]) return;
        found = true;
    });
    return found;
}

} // namespace arboreal
