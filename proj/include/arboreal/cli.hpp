#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arboreal/correlation.hpp"
#include "arboreal/electrical.hpp"
#include "arboreal/enumerate.hpp"
#include "arboreal/forest_measure.hpp"
#include "arboreal/graph.hpp"
#include "arboreal/reduction.hpp"
#include "arboreal/sampling.hpp"

namespace arboreal::cli {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
constexpr const char* kWorkersEnv = "ARBOREAL_WORKERS";

// Exit codes: 0 ok, 1 NC violation witnessed, 2 input error, 3 size limit.
enum ExitCode : int { kOk = 0, kViolation = 1, kInputError = 2, kSizeLimit = 3 };

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) { out.push_back(cur); cur.clear(); }
        else cur += c;
    }
    out.push_back(cur);
    return out;
}

inline Multigraph generator_from_spec(const std::string& spec) {
    auto parts = split(spec, ':');
    const std::string& kind = parts[0];
    std::vector<int> params;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        for (const auto& piece : split(parts[i], ',')) {
            if (piece.empty()) continue;
            params.push_back(std::stoi(piece));
        }
    }
    Rational w(1);
    if (kind == "complete") return generate(GraphKind::complete, params, w);
    if (kind == "path") return generate(GraphKind::path, params, w);
    if (kind == "cycle") return generate(GraphKind::cycle, params, w);
    if (kind == "ladder") return generate(GraphKind::ladder, params, w);
    if (kind == "complete_bipartite") return generate(GraphKind::complete_bipartite, params, w);
    if (kind == "bowtie") return generate(GraphKind::bowtie, params, w);
    throw InvalidOperationError("unknown generator '" + kind + "'");
}

/// Maps a 0-based CLI edge index (file/generator order) to the edge id.
inline int edge_by_index(const Multigraph& g, int index) {
    if (index < 0 || static_cast<std::size_t>(index) >= g.n_edges())
        throw InvalidOperationError("edge index out of range: " + std::to_string(index));
    return g.edges()[static_cast<std::size_t>(index)].id;
}

inline std::vector<int> edges_by_indices(const Multigraph& g, const std::string& csv) {
    std::vector<int> out;
    for (const auto& piece : split(csv, ',')) {
        if (piece.empty()) continue;
        out.push_back(edge_by_index(g, std::stoi(piece)));
    }
    return out;
}

inline json graph_echo(const Multigraph& g) {
    json edges = json::array();
    int index = 0;
    for (const auto& e : g.edges()) {
        edges.push_back(json{{"index", index++},
                             {"id", e.id},
                             {"u", e.u},
                             {"v", e.v},
                             {"weight", e.weight.to_string()}});
    }
    return json{{"n_vertices", g.n_vertices()}, {"n_edges", g.n_edges()}, {"edges", edges}};
}

inline json measure_json(const MeasureValue& m) {
    if (m.mode() == WeightMode::numeric) return json(m.as_rational().to_string());
    json coeffs = json::array();
    for (const auto& c : m.as_polynomial().coeff_strings()) coeffs.push_back(c);
    return json{{"coeffs", coeffs}, {"text", m.as_polynomial().to_string()}};
}

} // namespace detail

struct RunConfig {
    std::string command;
    std::optional<std::string> input_path;
    std::optional<std::string> gen_spec;
    std::string beta_text;                 // "", "symbolic", "p/q", or grid for scan
    std::string format = "json";
    std::uint64_t seed = 1;
    int workers = 0;                       // 0 = env or 1
    std::size_t memo_limit = 1u << 20;

    WeightMode mode = WeightMode::numeric;
    std::optional<Rational> beta_override;

    int resolved_workers() const {
        if (workers > 0) return workers;
        if (const char* env = std::getenv(kWorkersEnv)) {
            int w = std::atoi(env);
            if (w > 0) return w;
        }
        return 1;
    }

    Multigraph load_graph() const {
        if (input_path && gen_spec)
            throw InvalidOperationError("give exactly one of --input and --gen");
        Multigraph g;
        if (input_path) {
            std::ifstream in(*input_path);
            if (!in) throw InvalidOperationError("cannot open input file " + *input_path);
            g = parse_graph(in);
        } else if (gen_spec) {
            g = detail::generator_from_spec(*gen_spec);
        } else {
            throw InvalidOperationError("give exactly one of --input and --gen");
        }
        if (beta_override)
            for (const auto& e : g.edges()) g.set_weight(e.id, *beta_override);
        return g;
    }

    void resolve_beta() {
        if (beta_text.empty()) return;
        if (beta_text == "symbolic") {
            mode = WeightMode::symbolic;
            return;
        }
        beta_override = Rational::from_string(beta_text);
        if (beta_override->sign() <= 0) throw InvalidOperationError("beta must be positive");
    }

    std::vector<Rational> beta_grid() const {
        std::vector<Rational> out;
        for (const auto& piece : detail::split(beta_text, ',')) {
            if (piece.empty()) continue;
            Rational b = Rational::from_string(piece);
            if (b.sign() <= 0) throw InvalidOperationError("beta must be positive");
            out.push_back(b);
        }
        if (out.empty()) out.push_back(Rational(1));
        return out;
    }

    MuOptions mu_options() const { return MuOptions{memo_limit}; }
};

namespace detail {

/// Renders a finished report per --format. CSV is limited to scalar results.
inline int emit(const RunConfig& cfg, json report, long long ms, std::ostream& out) {
    report["timing_ms"] = ms;
    report["version"] = kVersion;
    if (cfg.format == "json") {
        out << report.dump(2) << "\n";
        return kOk;
    }
    if (cfg.format == "text") {
        std::function<void(const json&, std::string)> walk = [&](const json& j, std::string prefix) {
            if (j.is_object()) {
                for (auto it = j.begin(); it != j.end(); ++it)
                    walk(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
            } else if (j.is_array()) {
                int i = 0;
                for (const auto& v : j) walk(v, prefix + "[" + std::to_string(i++) + "]");
            } else {
                out << prefix << " = " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
            }
        };
        walk(report, "");
        return kOk;
    }
    if (cfg.format == "csv") {
        if (!report.contains("results") || !report["results"].is_object())
            throw InvalidOperationError("csv output needs a scalar result table");
        std::string hdr, row;
        for (auto it = report["results"].begin(); it != report["results"].end(); ++it) {
            if (it.value().is_object() || it.value().is_array())
                throw InvalidOperationError("csv output is limited to scalar reports");
            hdr += (hdr.empty() ? "" : ",") + it.key();
            row += (row.empty() ? "" : ",") +
                   (it.value().is_string() ? it.value().get<std::string>() : it.value().dump());
        }
        out << hdr << "\n" << row << "\n";
        return kOk;
    }
    throw InvalidOperationError("unknown format '" + cfg.format + "'");
}

inline json base_report(const RunConfig& cfg, const Multigraph* g) {
    json rep;
    rep["command"] = cfg.command;
    json input;
    input["source"] = cfg.input_path ? *cfg.input_path
                                     : (cfg.gen_spec ? "gen:" + *cfg.gen_spec : "none");
    if (g) input["graph"] = graph_echo(*g);
    rep["input"] = input;
    rep["params"] = json::object();
    rep["results"] = json::object();
    rep["verdicts"] = json::object();
    rep["witnesses"] = json::array();
    return rep;
}

// ---------------------------------------------------------------------------
// Scan machinery: all pairs on all connected graphs up to n_max, per grid
// beta, fanned out over workers; margins from the enumeration path.
// ---------------------------------------------------------------------------

struct ScanWitness {
    std::string graph_text;
    int e1_index, e2_index;
    Rational beta;
    Rational margin;
};

/// Total order on witnesses so that tie-broken minima are reproducible no
/// matter how worker threads interleave.
inline bool witness_less(const ScanWitness& a, const ScanWitness& b) {
    if (a.margin != b.margin) return a.margin < b.margin;
    if (a.graph_text != b.graph_text) return a.graph_text < b.graph_text;
    if (a.beta != b.beta) return a.beta < b.beta;
    if (a.e1_index != b.e1_index) return a.e1_index < b.e1_index;
    return a.e2_index < b.e2_index;
}

struct PerGraphMin {
    std::string graph_text;
    Rational beta;
    Rational min_margin;
};

/// Margin distribution buckets (probability scale); exact edges.
struct MarginHistogram {
    std::uint64_t negative = 0;
    std::uint64_t zero = 0;
    std::uint64_t tiny = 0;  // (0, 1e-4]
    std::uint64_t small = 0; // (1e-4, 1e-2]
    std::uint64_t mid = 0;   // (1e-2, 1e-1]
    std::uint64_t large = 0; // (1e-1, inf)

    void add(const Rational& m) {
        if (m.sign() < 0) ++negative;
        else if (m.is_zero()) ++zero;
        else if (m <= Rational(1, 10000)) ++tiny;
        else if (m <= Rational(1, 100)) ++small;
        else if (m <= Rational(1, 10)) ++mid;
        else ++large;
    }

    void fold(const MarginHistogram& o) {
        negative += o.negative;
        zero += o.zero;
        tiny += o.tiny;
        small += o.small;
        mid += o.mid;
        large += o.large;
    }
};

struct ScanSummary {
    std::uint64_t graphs = 0;
    std::uint64_t pairs = 0;
    MarginHistogram histogram;
    std::optional<ScanWitness> min_witness;
    std::vector<PerGraphMin> per_graph;
    std::vector<ScanWitness> violations;

    void fold(const ScanSummary& o) {
        graphs += o.graphs;
        pairs += o.pairs;
        histogram.fold(o.histogram);
        if (o.min_witness && (!min_witness || witness_less(*o.min_witness, *min_witness)))
            min_witness = o.min_witness;
        per_graph.insert(per_graph.end(), o.per_graph.begin(), o.per_graph.end());
        violations.insert(violations.end(), o.violations.begin(), o.violations.end());
    }
};

inline ScanSummary scan_one(const Multigraph& base, const Rational& beta) {
    Multigraph g = base;
    for (const auto& e : g.edges()) g.set_weight(e.id, beta);
    PairMarginTable table = pair_margin_table(g);
    std::string text = write_graph(g);

    ScanSummary s;
    s.graphs = 1;
    std::optional<Rational> local_min;
    const auto& edges = g.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            Rational m = table.prob_margin(edges[i].id, edges[j].id);
            ++s.pairs;
            s.histogram.add(m);
            ScanWitness w{text, static_cast<int>(i), static_cast<int>(j), beta, m};
            if (!s.min_witness || witness_less(w, *s.min_witness)) s.min_witness = w;
            if (!local_min || m < *local_min) local_min = m;
            if (m.sign() < 0) s.violations.push_back(std::move(w));
        }
    }
    if (local_min) s.per_graph.push_back(PerGraphMin{text, beta, *local_min});
    return s;
}

inline ScanSummary run_scan(int n_max, const std::vector<Rational>& grid, int workers,
                            bool dedup = true) {
    if (n_max > 7) throw SizeLimitError("scan capped at 7 vertices");
    std::vector<Multigraph> graphs = small_connected_graphs(n_max, dedup);

    std::vector<std::pair<std::size_t, std::size_t>> tasks; // (graph, beta index)
    for (std::size_t gi = 0; gi < graphs.size(); ++gi)
        for (std::size_t bi = 0; bi < grid.size(); ++bi) tasks.push_back({gi, bi});

    ScanSummary total;
    std::mutex merge_mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        ScanSummary local;
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            local.fold(scan_one(graphs[tasks[t].first], grid[tasks[t].second]));
        }
        std::lock_guard<std::mutex> lock(merge_mu);
        total.fold(local);
    };

    int w = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int i = 1; i < w; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Counters above tally (graph, beta) tasks; report distinct graphs, and
    // order the merged rows deterministically regardless of thread timing.
    total.graphs = graphs.size();
    auto row_less = [](const PerGraphMin& a, const PerGraphMin& b) {
        if (a.graph_text != b.graph_text) return a.graph_text < b.graph_text;
        return a.beta < b.beta;
    };
    std::sort(total.per_graph.begin(), total.per_graph.end(), row_less);
    std::sort(total.violations.begin(), total.violations.end(), witness_less);
    return total;
}

/// Confirms a scan violation independently: replays the witness through the
/// deletion-contraction margin route.
inline bool replay_confirms(const ScanWitness& w) {
    Multigraph g = parse_graph(w.graph_text);
    int e1 = edge_by_index(g, w.e1_index);
    int e2 = edge_by_index(g, w.e2_index);
    NCMargin m = nc_pair(g, e1, e2, WeightMode::numeric);
    // nc_pair margin is in mu scale; the scan margin is probability scale.
    // Signs must agree; confirmation means a strictly negative exact margin.
    return m.margin.as_rational().sign() < 0 && w.margin.sign() < 0;
}

inline json witness_json(const ScanWitness& w) {
    return json{{"graph", w.graph_text},
                {"e1", w.e1_index},
                {"e2", w.e2_index},
                {"beta", w.beta.to_string()},
                {"prob_margin", w.margin.to_string()}};
}

} // namespace detail

/// Entry point shared by the binary and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;

    CLI::App app{"Exact Arboreal Gas (weighted random forest) analyses on multigraphs"};
    app.require_subcommand(1);

    std::string e1_s, e2_s, s1_csv, s2_csv, require_csv, forbid_csv;
    int u = -1, v = -1, n_param = 0, n_max = 6, bound_scan = 0;
    std::uint64_t samples = 10000;
    std::string method = "wilson", witness_out;
    bool explain = false, dedup = true, fixpoint = false;

    auto add_common = [&](CLI::App* sub, bool needs_graph) {
        if (needs_graph) {
            sub->add_option("--input", cfg.input_path, "graph text file");
            sub->add_option("--gen", cfg.gen_spec,
                            "generator spec: complete:N | path:N | cycle:N | ladder:D | "
                            "complete_bipartite:A,B | bowtie");
        }
        sub->add_option("--beta", cfg.beta_text,
                        "rational p/q, 'symbolic', or a comma grid (scan)");
        sub->add_option("--format", cfg.format, "json | text | csv")->default_str("json");
        sub->add_option("--seed", cfg.seed, "RNG seed");
        sub->add_option("--workers", cfg.workers, "worker threads (scan)");
        sub->add_option("--memo-limit", cfg.memo_limit, "memo cache entry bound");
    };

    CLI::App* c_gen = app.add_subcommand("gen", "emit a generated graph in the text format");
    add_common(c_gen, true);

    CLI::App* c_poly = app.add_subcommand("poly", "forest polynomial / mu of an event");
    add_common(c_poly, true);
    c_poly->add_option("--require", require_csv, "required edge indices, comma separated");
    c_poly->add_option("--forbid", forbid_csv, "forbidden edge indices, comma separated");

    CLI::App* c_trees = app.add_subcommand("trees", "weighted spanning tree count");
    add_common(c_trees, true);
    c_trees->add_option("--require", require_csv, "required edge indices");
    c_trees->add_option("--forbid", forbid_csv, "forbidden edge indices");

    CLI::App* c_res = app.add_subcommand("resistance", "effective resistance between terminals");
    add_common(c_res, true);
    c_res->add_option("--u", u, "source vertex")->required();
    c_res->add_option("--v", v, "sink vertex")->required();

    CLI::App* c_flow = app.add_subcommand("flow", "exact unit current flow");
    add_common(c_flow, true);
    c_flow->add_option("--u", u, "source vertex")->required();
    c_flow->add_option("--v", v, "sink vertex")->required();

    CLI::App* c_pair = app.add_subcommand("nc-pair", "negative-correlation margin for a pair");
    add_common(c_pair, true);
    c_pair->add_option("--e1", e1_s, "first edge index")->required();
    c_pair->add_option("--e2", e2_s, "second edge index")->required();

    CLI::App* c_all = app.add_subcommand("nc-all", "margins for every edge pair");
    add_common(c_all, true);

    CLI::App* c_sets = app.add_subcommand("nc-sets", "set-level margin P[S1]P[S2]-P[S1S2]");
    add_common(c_sets, true);
    c_sets->add_option("--s1", s1_csv, "first edge index set")->required();
    c_sets->add_option("--s2", s2_csv, "second edge index set")->required();

    CLI::App* c_reduce = app.add_subcommand("reduce", "pivotal/series/parallel reduction pipeline");
    add_common(c_reduce, true);
    c_reduce->add_flag("--explain", explain, "emit the step-by-step trace");
    c_reduce->add_flag("--fixpoint", fixpoint, "re-run the pass until the graph stabilizes");

    CLI::App* c_kn = app.add_subcommand("kn", "complete-graph closed forms and the I_k bound");
    add_common(c_kn, false);
    c_kn->add_option("--n", n_param, "K_n order (n >= 5)");
    c_kn->add_option("--bound-scan", bound_scan, "scan the I_k bound for n in [5, N]");

    CLI::App* c_sample = app.add_subcommand("sample", "Monte Carlo cross-checks");
    add_common(c_sample, true);
    c_sample->add_option("--method", method, "wilson | rejection | probe");
    c_sample->add_option("--n", samples, "sample count");
    c_sample->add_option("--e1", e1_s, "first edge index (probe)");
    c_sample->add_option("--e2", e2_s, "second edge index (probe)");

    CLI::App* c_scan = app.add_subcommand("scan", "NC conjecture scan over small graphs");
    add_common(c_scan, false);
    c_scan->add_option("--n-max", n_max, "largest vertex count (<= 7)");
    c_scan->add_flag("--no-dedup{false}", dedup, "scan labeled graphs instead of classes");
    c_scan->add_option("--witness-out", witness_out, "write any violation witness to this file");

    try {
        std::vector<std::string> argv_sim = args;
        std::vector<const char*> argv;
        argv.push_back("arboreal");
        for (const auto& a : argv_sim) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return kOk;
        }
        err << "argument error: " << e.what() << "\n";
        return kInputError;
    }

    auto started = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - started)
            .count();
    };

    try {
        if (!c_scan->parsed()) cfg.resolve_beta(); // scan takes a beta grid instead
        MuOptions opts = cfg.mu_options();

        if (c_gen->parsed()) {
            cfg.command = "gen";
            Multigraph g = cfg.load_graph();
            out << write_graph(g);
            return kOk;
        }

        if (c_poly->parsed()) {
            cfg.command = "poly";
            Multigraph g = cfg.load_graph();
            EventSpec ev{detail::edges_by_indices(g, require_csv),
                         detail::edges_by_indices(g, forbid_csv)};
            WeightMode mode = cfg.mode;
            json rep = detail::base_report(cfg, &g);
            rep["params"]["require"] = require_csv;
            rep["params"]["forbid"] = forbid_csv;
            rep["params"]["mode"] = mode == WeightMode::symbolic ? "symbolic" : "numeric";
            rep["results"]["mu"] = detail::measure_json(mu(g, ev, mode, opts));
            return detail::emit(cfg, rep, elapsed_ms(), out);
        }

        if (c_trees->parsed()) {
            cfg.command = "trees";
            Multigraph g = cfg.load_graph();
            Conductances c = Conductances::from_weights(g);
            json rep = detail::base_report(cfg, &g);
            Rational t = tree_count(g, c, detail::edges_by_indices(g, require_csv),
                                    detail::edges_by_indices(g, forbid_csv));
            rep["results"]["tree_count"] = t.to_string();
            return detail::emit(cfg, rep, elapsed_ms(), out);
        }

        if (c_res->parsed()) {
            cfg.command = "resistance";
            Multigraph g = cfg.load_graph();
            Conductances c = Conductances::from_weights(g);
            json rep = detail::base_report(cfg, &g);
            rep["params"]["u"] = u;
            rep["params"]["v"] = v;
            rep["results"]["r_eff"] = effective_resistance(g, c, u, v).to_string();
            return detail::emit(cfg, rep, elapsed_ms(), out);
        }

        if (c_flow->parsed()) {
            cfg.command = "flow";
            Multigraph g = cfg.load_graph();
            Conductances c = Conductances::from_weights(g);
            CurrentFlow flow = unit_current_flow(g, c, u, v);
            json rep = detail::base_report(cfg, &g);
            rep["params"]["u"] = u;
            rep["params"]["v"] = v;
            json pot = json::object();
            for (const auto& [vert, phi] : flow.potential)
                pot[std::to_string(vert)] = phi.to_string();
            json cur = json::array();
            int index = 0;
            for (const auto& e : g.edges()) {
                cur.push_back(json{{"index", index++},
                                   {"u", e.u},
                                   {"v", e.v},
                                   {"current", flow.edge_current(e, c).to_string()}});
            }
            rep["results"]["potentials"] = pot;
            rep["results"]["edge_currents"] = cur;
            rep["results"]["r_eff"] = flow.potential.at(u).to_string();
            rep["results"]["energy"] = flow.energy(g, c).to_string();
            return detail::emit(cfg, rep, elapsed_ms(), out);
        }

        if (c_pair->parsed()) {
            cfg.command = "nc-pair";
            Multigraph g = cfg.load_graph();
            int e1 = detail::edge_by_index(g, std::stoi(e1_s));
            int e2 = detail::edge_by_index(g, std::stoi(e2_s));
            NCMargin m = nc_pair(g, e1, e2, cfg.mode, opts);
            json rep = detail::base_report(cfg, &g);
            rep["params"]["e1"] = std::stoi(e1_s);
            rep["params"]["e2"] = std::stoi(e2_s);
            rep["params"]["mode"] = cfg.mode == WeightMode::symbolic ? "symbolic" : "numeric";
            rep["results"]["margin"] = detail::measure_json(m.margin);
            rep["results"]["mu_e1"] = detail::measure_json(m.mu_e1);
            rep["results"]["mu_e2"] = detail::measure_json(m.mu_e2);
            rep["results"]["mu_e1e2"] = detail::measure_json(m.mu_both);
            rep["results"]["mu_1"] = detail::measure_json(m.mu_one);
            if (cfg.mode == WeightMode::symbolic) {
                long n = static_cast<long>(g.n_vertices());
                const auto& poly = m.margin.as_polynomial();
                rep["results"]["leading_coeff"] =
                    poly.coeff(static_cast<std::size_t>(std::max(0L, 2 * n - 4))).to_string();
                rep["results"]["second_coeff"] =
                    poly.coeff(static_cast<std::size_t>(std::max(0L, 2 * n - 5))).to_string();
                BetaThreshold th = beta_threshold(g, e1, e2, opts);
                json tj;
                tj["side"] = th.side == ThresholdSide::all_beta    ? "all_beta"
                             : th.side == ThresholdSide::large_beta ? "large_beta"
                                                                    : "unknown";
                if (th.beta_star) tj["beta_star"] = th.beta_star->to_string();
                if (th.largest_root)
                    tj["largest_root_bracket"] =
                        json::array({th.largest_root->lo.to_string(), th.largest_root->hi.to_string()});
                rep["results"]["beta_threshold"] = tj;
                SmallBetaProbe probe = small_beta_probe(poly);
                json pj = json::array();
                for (const auto& [b, val] : probe.points)
                    pj.push_back(json{{"beta", b.to_string()}, {"margin", val.to_string()}});
                rep["results"]["small_beta_probe"] = pj;
                rep["results"]["small_beta_all_nonnegative"] = probe.all_nonnegative;
            }
            rep["verdicts"]["nc"] = to_string(m.verdict);
            int code = detail::emit(cfg, rep, elapsed_ms(), out);
            return m.verdict == NCVerdict::violated ? kViolation : code;
        }

        if (c_all->parsed()) {
            cfg.command = "nc-all";
            Multigraph g = cfg.load_graph();
            if (cfg.mode == WeightMode::symbolic)
                throw InvalidOperationError("nc-all runs in numeric mode");
            json rep = detail::base_report(cfg, &g);
            json rows = json::array();
            bool violated = false;
            std::optional<Rational> min_margin;
            const auto& edges = g.edges();
            PairMarginTable table = pair_margin_table(g);
            for (std::size_t i = 0; i < edges.size(); ++i) {
                for (std::size_t j = i + 1; j < edges.size(); ++j) {
                    Rational m = table.prob_margin(edges[i].id, edges[j].id);
                    if (!min_margin || m < *min_margin) min_margin = m;
                    if (m.sign() < 0) violated = true;
                    rows.push_back(json{{"e1", i}, {"e2", j}, {"prob_margin", m.to_string()}});
                }
            }
            rep["results"]["pairs"] = rows;
            if (min_margin) rep["results"]["min_margin"] = min_margin->to_string();
            rep["verdicts"]["nc_all_pairs"] = violated ? "violated" : "holds";
            int code = detail::emit(cfg, rep, elapsed_ms(), out);
            return violated ? kViolation : code;
        }

        if (c_sets->parsed()) {
            cfg.command = "nc-sets";
            Multigraph g = cfg.load_graph();
            NCMargin m = nc_sets(g, detail::edges_by_indices(g, s1_csv),
                                 detail::edges_by_indices(g, s2_csv), opts);
            json rep = detail::base_report(cfg, &g);
            rep["params"]["s1"] = s1_csv;
            rep["params"]["s2"] = s2_csv;
            rep["results"]["prob_margin"] = m.margin.as_rational().to_string();
            rep["verdicts"]["nc"] = to_string(m.verdict);
            int code = detail::emit(cfg, rep, elapsed_ms(), out);
            return m.verdict == NCVerdict::violated ? kViolation : code;
        }

        if (c_reduce->parsed()) {
            cfg.command = "reduce";
            Multigraph g = cfg.load_graph();
            ReductionResult res = reduce_pipeline(g, fixpoint);
            json rep = detail::base_report(cfg, &g);
            rep["params"]["fixpoint"] = fixpoint;
            json comps = json::array();
            for (const auto& comp : res.components) comps.push_back(write_graph(comp));
            rep["results"]["reduced"] = write_graph(res.reduced);
            rep["results"]["components"] = comps;
            rep["results"]["pivotal_factor"] = res.trace.pivotal_factor.to_string();
            rep["results"]["constant_C"] = res.trace.constant_C.to_string();
            if (explain) {
                json steps = json::array();
                for (const auto& s : res.trace.steps) steps.push_back(s.describe());
                rep["results"]["trace"] = steps;
                out << res.trace.describe();
            }
            return detail::emit(cfg, rep, elapsed_ms(), out);
        }

        if (c_kn->parsed()) {
            cfg.command = "kn";
            json rep = detail::base_report(cfg, nullptr);
            if (n_param >= 5) {
                KnAnalysis a = kn_closed_forms(n_param);
                rep["params"]["n"] = n_param;
                json ak = json::array(), ik = json::array();
                for (const auto& x : a.a_k) ak.push_back(x.to_string());
                for (const auto& x : a.i_k) ik.push_back(x.to_string());
                rep["results"]["t1"] = a.t1.to_string();
                rep["results"]["te"] = a.te.to_string();
                rep["results"]["tee"] = a.tee.to_string();
                rep["results"]["a_k"] = ak;
                rep["results"]["i_k"] = ik;
                rep["results"]["sum_i"] = a.sum_i.to_string();
                rep["results"]["sum_i_below_one"] = a.sum_i_below_one;
                rep["results"]["second_coeff_from_cases"] = a.second_coeff_from_cases.to_string();
            } else if (bound_scan >= 5) {
                IBoundScan s = i_bound_scan(bound_scan);
                rep["params"]["bound_scan"] = bound_scan;
                rep["results"]["first_n_holding"] = s.first_holding ? json(*s.first_holding) : json();
                rep["results"]["last_n_failing"] = s.last_failing ? json(*s.last_failing) : json();
                rep["results"]["threshold_n"] = s.threshold_n;
            } else {
                throw InvalidOperationError("kn needs --n >= 5 or --bound-scan >= 5");
            }
            return detail::emit(cfg, rep, elapsed_ms(), out);
        }

        if (c_sample->parsed()) {
            cfg.command = "sample";
            Multigraph g = cfg.load_graph();
            json rep = detail::base_report(cfg, &g);
            rep["params"]["method"] = method;
            rep["params"]["n"] = samples;
            rep["params"]["seed"] = cfg.seed;
            if (method == "wilson") {
                Conductances c = Conductances::from_weights(g);
                std::map<int, std::uint64_t> counts;
                Rng seeder(cfg.seed);
                for (std::uint64_t i = 0; i < samples; ++i) {
                    auto tree = wilson_ust(g, c, seeder.next_u64());
                    for (int id : tree) ++counts[id];
                }
                json freqs = json::object();
                int index = 0;
                for (const auto& e : g.edges()) {
                    std::uint64_t k = counts.count(e.id) ? counts[e.id] : 0;
                    freqs[std::to_string(index++)] =
                        Rational(static_cast<long>(k), static_cast<long>(samples)).to_string();
                }
                rep["results"]["edge_frequencies"] = freqs;
            } else if (method == "rejection" || method == "probe") {
                Rational beta = cfg.beta_override ? *cfg.beta_override : Rational(1);
                if (method == "rejection") {
                    SampleReport r = arboreal_rejection(g, beta, cfg.seed, samples);
                    rep["results"]["acceptance_rate"] = r.acceptance_rate.to_string();
                    rep["results"]["proposals"] = r.proposals;
                    json freqs = json::object();
                    int index = 0;
                    for (const auto& e : g.edges())
                        freqs[std::to_string(index++)] = r.edge_frequency(e.id).to_string();
                    rep["results"]["edge_frequencies"] = freqs;
                } else {
                    int e1 = detail::edge_by_index(g, std::stoi(e1_s));
                    int e2 = detail::edge_by_index(g, std::stoi(e2_s));
                    NCProbe p = mc_nc_probe(g, beta, e1, e2, cfg.seed, samples);
                    rep["results"]["estimate"] = p.estimate;
                    rep["results"]["stderr"] = p.stderr_est;
                    rep["results"]["advisory"] = "Monte Carlo probe; never a verdict";
                }
            } else {
                throw InvalidOperationError("unknown method '" + method + "'");
            }
            return detail::emit(cfg, rep, elapsed_ms(), out);
        }

        if (c_scan->parsed()) {
            cfg.command = "scan";
            json rep = detail::base_report(cfg, nullptr);
            auto grid = cfg.beta_grid();
            detail::ScanSummary s = detail::run_scan(n_max, grid, cfg.resolved_workers(), dedup);
            rep["params"]["n_max"] = n_max;
            json grid_json = json::array();
            for (const auto& b : grid) grid_json.push_back(b.to_string());
            rep["params"]["beta_grid"] = grid_json;
            rep["params"]["workers"] = cfg.resolved_workers();
            rep["results"]["graphs"] = s.graphs;
            rep["results"]["pairs_checked"] = s.pairs;
            rep["results"]["margin_distribution"] =
                json{{"negative", s.histogram.negative}, {"zero", s.histogram.zero},
                     {"(0,1e-4]", s.histogram.tiny},     {"(1e-4,1e-2]", s.histogram.small},
                     {"(1e-2,1e-1]", s.histogram.mid},   {"(1e-1,inf)", s.histogram.large}};
            if (s.min_witness) {
                rep["results"]["min_margin"] = s.min_witness->margin.to_string();
                rep["results"]["min_margin_witness"] = detail::witness_json(*s.min_witness);
            }
            json per_graph = json::array();
            for (const auto& row : s.per_graph)
                per_graph.push_back(json{{"graph", row.graph_text},
                                         {"beta", row.beta.to_string()},
                                         {"min_margin", row.min_margin.to_string()}});
            rep["results"]["per_graph_min"] = per_graph;

            bool confirmed = false;
            for (const auto& wv : s.violations) {
                json wj = detail::witness_json(wv);
                wj["replay_confirms"] = detail::replay_confirms(wv);
                rep["witnesses"].push_back(wj);
                if (wj["replay_confirms"].get<bool>()) confirmed = true;
                if (!witness_out.empty()) {
                    std::ofstream f(witness_out);
                    f << "# beta " << wv.beta.to_fraction_string() << " e1 " << wv.e1_index
                      << " e2 " << wv.e2_index << "\n"
                      << wv.graph_text;
                }
            }
            rep["verdicts"]["violations"] = s.violations.size();
            rep["verdicts"]["confirmed_violation"] = confirmed;
            int code = detail::emit(cfg, rep, elapsed_ms(), out);
            return confirmed ? kViolation : code;
        }

        err << "no subcommand selected\n";
        return kInputError;
    } catch (const SizeLimitError& e) {
        err << "size limit: " << e.what() << "\n";
        return kSizeLimit;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kInputError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
}

} // namespace arboreal::cli
