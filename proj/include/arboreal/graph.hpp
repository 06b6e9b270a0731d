#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "arboreal/errors.hpp"
#include "arboreal/rational.hpp"

namespace arboreal {

/// Union-find over arbitrary int ids, path halving + union by size.
class UnionFind {
public:
    explicit UnionFind(const std::vector<int>& ids) {
        for (int id : ids) { parent_[id] = id; size_[id] = 1; }
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns false when x and y are already in the same class.
    bool unite(int x, int y) {
        int rx = find(x), ry = find(y);
        if (rx == ry) return false;
        if (size_[rx] < size_[ry]) std::swap(rx, ry);
        parent_[ry] = rx;
        size_[rx] += size_[ry];
        return true;
    }

    bool same(int x, int y) { return find(x) == find(y); }

private:
    std::map<int, int> parent_;
    std::map<int, int> size_;
};

/// Dense-index union-find for hot enumeration loops; copyable cheaply.
class FlatUnionFind {
public:
    explicit FlatUnionFind(std::size_t n) : parent_(n) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(int x, int y) {
        int rx = find(x), ry = find(y);
        if (rx == ry) return false;
        parent_[ry] = rx;
        return true;
    }

private:
    std::vector<int> parent_;
};

struct Edge {
    int id;
    int u, v;
    Rational weight;
    std::string label;

    bool is_loop() const { return u == v; }
    /// The endpoint that is not `from`; for loops returns the vertex itself.
    int other(int from) const { return from == u ? v : u; }
};

/// Renaming of edge ids induced by a structural edit or reduction stage.
/// Total on the declared source edge set minus the dropped list.
struct EdgeMap {
    std::map<int, int> mapped;
    std::vector<int> dropped;

    std::optional<int> image(int edge_id) const {
        auto it = mapped.find(edge_id);
        if (it != mapped.end()) return it->second;
        return std::nullopt;
    }

    static EdgeMap identity_on(const std::vector<int>& ids) {
        EdgeMap m;
        for (int id : ids) m.mapped[id] = id;
        return m;
    }

    /// this, then `next`. Edges dropped at either stage end up dropped.
    EdgeMap then(const EdgeMap& next) const {
        EdgeMap out;
        out.dropped = dropped;
        for (const auto& [src, mid] : mapped) {
            auto img = next.image(mid);
            if (img) out.mapped[src] = *img;
            else out.dropped.push_back(src);
        }
        return out;
    }
};

/// Undirected multigraph with stable edge identities. Parallel edges and
/// self-loops are permitted; edge ids are never recycled across edits.
class Multigraph {
public:
    Multigraph() = default;

    static Multigraph with_vertices(int n) {
        Multigraph g;
        for (int i = 0; i < n; ++i) g.add_vertex(i);
        return g;
    }

    void add_vertex(int id) {
        if (!has_vertex(id))
            vertices_.insert(std::lower_bound(vertices_.begin(), vertices_.end(), id), id);
    }

    bool has_vertex(int id) const {
        return std::binary_search(vertices_.begin(), vertices_.end(), id);
    }

    int add_edge(int u, int v, const Rational& weight, std::string label = {}) {
        if (!has_vertex(u) || !has_vertex(v))
            throw InvalidOperationError("edge endpoint is not a vertex");
        if (weight.sign() <= 0)
            throw InvalidOperationError("edge weights must be strictly positive");
        int id = next_edge_id_++;
        edges_.push_back(Edge{id, u, v, weight, std::move(label)});
        return id;
    }

    std::size_t n_vertices() const { return vertices_.size(); }
    std::size_t n_edges() const { return edges_.size(); }

    const std::vector<int>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }

    const Edge& edge(int id) const {
        for (const auto& e : edges_)
            if (e.id == id) return e;
        throw InvalidOperationError("no edge with id " + std::to_string(id));
    }

    bool has_edge(int id) const {
        for (const auto& e : edges_)
            if (e.id == id) return true;
        return false;
    }

    void set_weight(int id, const Rational& w) {
        if (w.sign() <= 0) throw InvalidOperationError("edge weights must be strictly positive");
        for (auto& e : edges_)
            if (e.id == id) { e.weight = w; return; }
        throw InvalidOperationError("no edge with id " + std::to_string(id));
    }

    /// All edge weights equal (self-loops included); vacuously true when edgeless.
    bool uniform_weights() const {
        for (std::size_t i = 1; i < edges_.size(); ++i)
            if (edges_[i].weight != edges_[0].weight) return false;
        return true;
    }

    Multigraph without_edge(int id) const {
        Multigraph g = *this;
        auto it = std::find_if(g.edges_.begin(), g.edges_.end(),
                               [&](const Edge& e) { return e.id == id; });
        if (it == g.edges_.end()) throw InvalidOperationError("deleting unknown edge");
        g.edges_.erase(it);
        return g;
    }

    Multigraph without_edges(const std::vector<int>& ids) const {
        std::set<int> del(ids.begin(), ids.end());
        Multigraph g = *this;
        g.edges_.erase(std::remove_if(g.edges_.begin(), g.edges_.end(),
                                      [&](const Edge& e) { return del.count(e.id) > 0; }),
                       g.edges_.end());
        return g;
    }

    Multigraph without_vertex(int id) const {
        Multigraph g = *this;
        g.vertices_.erase(std::remove(g.vertices_.begin(), g.vertices_.end(), id), g.vertices_.end());
        g.edges_.erase(std::remove_if(g.edges_.begin(), g.edges_.end(),
                                      [&](const Edge& e) { return e.u == id || e.v == id; }),
                       g.edges_.end());
        return g;
    }

    /// Contracts edge `id`: endpoints merge into the smaller vertex id.
    /// Parallel edges survive; edges that become loops are deleted iff
    /// `drop_loops`, and always listed as dropped in the returned map.
    std::pair<Multigraph, EdgeMap> contract(int id, bool drop_loops) const {
        const Edge& e = edge(id);
        if (e.is_loop())
            throw InvalidOperationError("cannot contract a self-loop");
        int keep = std::min(e.u, e.v);
        int gone = std::max(e.u, e.v);

        Multigraph g;
        g.next_edge_id_ = next_edge_id_;
        for (int v : vertices_)
            if (v != gone) g.add_vertex(v);

        EdgeMap map;
        map.dropped.push_back(id);
        for (const auto& f : edges_) {
            if (f.id == id) continue;
            int u2 = f.u == gone ? keep : f.u;
            int v2 = f.v == gone ? keep : f.v;
            if (u2 == v2 && drop_loops) {
                map.dropped.push_back(f.id);
                continue;
            }
            g.edges_.push_back(Edge{f.id, u2, v2, f.weight, f.label});
            map.mapped[f.id] = f.id;
        }
        return {g, map};
    }

    /// Edge-endpoint degree; a self-loop contributes 2.
    int degree(int vertex) const {
        int d = 0;
        for (const auto& e : edges_) {
            if (e.u == vertex) ++d;
            if (e.v == vertex) ++d;
        }
        return d;
    }

    std::vector<const Edge*> incident(int vertex) const {
        std::vector<const Edge*> out;
        for (const auto& e : edges_)
            if (e.u == vertex || e.v == vertex) out.push_back(&e);
        return out;
    }

    /// Induced subgraph on the given vertex set (edge ids preserved).
    Multigraph induced(const std::set<int>& verts) const {
        Multigraph g;
        g.next_edge_id_ = next_edge_id_;
        for (int v : vertices_)
            if (verts.count(v)) g.add_vertex(v);
        for (const auto& e : edges_)
            if (verts.count(e.u) && verts.count(e.v)) g.edges_.push_back(e);
        return g;
    }

    /// Deterministic structural key: sorted (min,max,weight) edge triples over
    /// current vertex ids. Used for memoization, not isomorphism.
    std::string structure_key() const {
        std::vector<std::string> parts;
        parts.reserve(edges_.size());
        for (const auto& e : edges_) {
            int a = std::min(e.u, e.v), b = std::max(e.u, e.v);
            parts.push_back(std::to_string(a) + "," + std::to_string(b) + "," + e.weight.to_string());
        }
        std::sort(parts.begin(), parts.end());
        std::string key = std::to_string(vertices_.size()) + "|";
        for (int v : vertices_) key += std::to_string(v) + ".";
        key += "|";
        for (auto& p : parts) { key += p; key += ";"; }
        return key;
    }

private:
    std::vector<int> vertices_; // sorted
    std::vector<Edge> edges_;   // insertion order; ids stable
    int next_edge_id_ = 0;
};

/// Connected components as vertex-id classes, deterministic order (each class
/// sorted, classes ordered by smallest member).
inline std::vector<std::vector<int>> components(const Multigraph& g) {
    UnionFind uf(g.vertices());
    for (const auto& e : g.edges()) uf.unite(e.u, e.v);
    std::map<int, std::vector<int>> by_root;
    for (int v : g.vertices()) by_root[uf.find(v)].push_back(v);
    std::vector<std::vector<int>> out;
    for (auto& [root, verts] : by_root) {
        std::sort(verts.begin(), verts.end());
        out.push_back(std::move(verts));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

inline bool is_connected(const Multigraph& g) {
    return g.n_vertices() <= 1 || components(g).size() == 1;
}

inline bool same_component(const Multigraph& g, int u, int v) {
    UnionFind uf(g.vertices());
    for (const auto& e : g.edges()) uf.unite(e.u, e.v);
    return uf.same(u, v);
}

/// True when the named edge set contains no cycle (self-loops are cycles).
inline bool is_acyclic_subset(const Multigraph& g, const std::vector<int>& edge_ids) {
    UnionFind uf(g.vertices());
    for (int id : edge_ids) {
        const Edge& e = g.edge(id);
        if (e.is_loop()) return false;
        if (!uf.unite(e.u, e.v)) return false;
    }
    return true;
}

/// Pivotal (bridge) edges: removal disconnects the endpoints. A self-loop or
/// an edge with a parallel partner is never pivotal. Tarjan low-link pass.
inline std::set<int> bridges(const Multigraph& g) {
    // Parallel classes: only a class of size one can be a bridge.
    std::map<std::pair<int, int>, std::vector<int>> cls;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        cls[{std::min(e.u, e.v), std::max(e.u, e.v)}].push_back(e.id);
    }

    std::map<int, std::vector<std::pair<int, int>>> adj; // vertex -> (neighbor, edge id)
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        adj[e.u].push_back({e.v, e.id});
        adj[e.v].push_back({e.u, e.id});
    }

    std::map<int, int> disc, low;
    std::set<int> out;
    int timer = 0;

    // Iterative DFS to keep deep paths safe.
    for (int start : g.vertices()) {
        if (disc.count(start)) continue;
        std::vector<std::tuple<int, int, std::size_t>> stack; // (vertex, via edge id, child index)
        stack.push_back({start, -1, 0});
        disc[start] = low[start] = timer++;
        while (!stack.empty()) {
            auto& [v, via, idx] = stack.back();
            auto& nbrs = adj[v];
            if (idx < nbrs.size()) {
                auto [w, eid] = nbrs[idx++];
                if (eid == via) continue;
                if (!disc.count(w)) {
                    disc[w] = low[w] = timer++;
                    stack.push_back({w, eid, 0});
                } else {
                    low[v] = std::min(low[v], disc[w]);
                }
            } else {
                int done = v, done_via = via;
                stack.pop_back();
                if (!stack.empty()) {
                    int parent = std::get<0>(stack.back());
                    low[parent] = std::min(low[parent], low[done]);
                    if (low[done] > disc[parent]) out.insert(done_via);
                }
            }
        }
    }

    // Drop anything in a parallel class of size > 1 (cannot happen with the
    // via-edge rule above, but the contract is explicit about it).
    for (auto it = out.begin(); it != out.end();) {
        const Edge& e = g.edge(*it);
        auto key = std::make_pair(std::min(e.u, e.v), std::max(e.u, e.v));
        if (cls[key].size() > 1) it = out.erase(it);
        else ++it;
    }
    return out;
}

enum class GraphKind { complete, path, cycle, ladder, complete_bipartite, bowtie };

/// Named generators with uniform weights. Edge index order is the generation
/// order documented per kind; the CLI addresses edges by that order.
inline Multigraph generate(GraphKind kind, const std::vector<int>& params, const Rational& weight) {
    auto need = [&](std::size_t k) {
        if (params.size() != k) throw InvalidOperationError("generator arity mismatch");
        for (int p : params)
            if (p < 1) throw InvalidOperationError("generator size parameters must be >= 1");
    };
    switch (kind) {
        case GraphKind::complete: {
            need(1);
            int n = params[0];
            Multigraph g = Multigraph::with_vertices(n);
            for (int u = 0; u < n; ++u)
                for (int v = u + 1; v < n; ++v) g.add_edge(u, v, weight);
            return g;
        }
        case GraphKind::path: {
            need(1);
            int n = params[0];
            Multigraph g = Multigraph::with_vertices(n);
            for (int u = 0; u + 1 < n; ++u) g.add_edge(u, u + 1, weight);
            return g;
        }
        case GraphKind::cycle: {
            need(1);
            int n = params[0];
            if (n < 3) throw InvalidOperationError("cycle needs at least 3 vertices");
            Multigraph g = Multigraph::with_vertices(n);
            for (int u = 0; u < n; ++u) g.add_edge(u, (u + 1) % n, weight);
            return g;
        }
        case GraphKind::ladder: {
            // Vertices (i,j) for i=1..d, j=0,1 numbered 2(i-1)+j.
            // Edges: d rungs first, then bottom rails, then top rails.
            need(1);
            int d = params[0];
            Multigraph g = Multigraph::with_vertices(2 * d);
            for (int i = 0; i < d; ++i) g.add_edge(2 * i, 2 * i + 1, weight);
            for (int i = 0; i + 1 < d; ++i) g.add_edge(2 * i, 2 * (i + 1), weight);
            for (int i = 0; i + 1 < d; ++i) g.add_edge(2 * i + 1, 2 * (i + 1) + 1, weight);
            return g;
        }
        case GraphKind::complete_bipartite: {
            need(2);
            int a = params[0], b = params[1];
            Multigraph g = Multigraph::with_vertices(a + b);
            for (int i = 0; i < a; ++i)
                for (int j = 0; j < b; ++j) g.add_edge(i, a + j, weight);
            return g;
        }
        case GraphKind::bowtie: {
            // Two triangles sharing vertex 2.
            need(0);
            Multigraph g = Multigraph::with_vertices(5);
            g.add_edge(0, 1, weight);
            g.add_edge(0, 2, weight);
            g.add_edge(1, 2, weight);
            g.add_edge(2, 3, weight);
            g.add_edge(2, 4, weight);
            g.add_edge(3, 4, weight);
            return g;
        }
    }
    throw InvalidOperationError("unknown generator kind");
}

// ---------------------------------------------------------------------------
// Graph text format: "vertices <n>", then "<u> <v> <num>/<den> [label]" per
// edge, 0-based vertices, '#' comments ignored. Edge ids follow line order.
// ---------------------------------------------------------------------------

inline Multigraph parse_graph(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    long n = -1;
    Multigraph g;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (n < 0) {
            if (tok != "vertices") throw ParseError("expected 'vertices <n>' header", lineno);
            if (!(ls >> n) || n < 0) throw ParseError("bad vertex count", lineno);
            g = Multigraph::with_vertices(static_cast<int>(n));
            continue;
        }
        long u, v;
        std::string wtext, label;
        try {
            u = std::stol(tok);
        } catch (...) {
            throw ParseError("bad edge endpoint", lineno);
        }
        if (!(ls >> v >> wtext)) throw ParseError("edge line needs '<u> <v> <num>/<den>'", lineno);
        ls >> label; // optional
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw ParseError("edge endpoint out of range", lineno);
        Rational w;
        try {
            w = Rational::from_string(wtext);
        } catch (const Error&) {
            throw ParseError("bad edge weight '" + wtext + "'", lineno);
        }
        if (w.sign() <= 0) throw ParseError("edge weight must be positive", lineno);
        g.add_edge(static_cast<int>(u), static_cast<int>(v), w, label);
    }
    if (n < 0) throw ParseError("missing 'vertices <n>' header", lineno == 0 ? 1 : lineno);
    return g;
}

inline Multigraph parse_graph(const std::string& text) {
    std::istringstream in(text);
    return parse_graph(in);
}

/// Writes the text format; vertices are renumbered densely (sorted id order)
/// so that reduced graphs round-trip.
inline std::string write_graph(const Multigraph& g) {
    std::map<int, int> renum;
    int next = 0;
    for (int v : g.vertices()) renum[v] = next++;
    std::ostringstream out;
    out << "vertices " << g.n_vertices() << "\n";
    for (const auto& e : g.edges()) {
        out << renum[e.u] << " " << renum[e.v] << " " << e.weight.to_fraction_string();
        if (!e.label.empty()) out << " " << e.label;
        out << "\n";
    }
    return out.str();
}

} // namespace arboreal
