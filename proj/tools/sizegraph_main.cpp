// sizegraph: estimate object size distributions from noisy co-occurrence
// evidence and answer "which is bigger?" queries.
//
// Pipeline stages are separate subcommands so intermediate artifacts (graph,
// observations, model) can be cached and inspected as plain files.

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sizegraph/error.hpp"
#include "sizegraph/evaluation.hpp"
#include "sizegraph/graph.hpp"
#include "sizegraph/inference.hpp"
#include "sizegraph/model.hpp"
#include "sizegraph/observations.hpp"
#include "sizegraph/synth.hpp"

namespace sg = sizegraph;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss << v;  // default 6 significant digits, deterministic
    return ss.str();
}

// ---------------------------------------------------------------------------

struct GraphArgs {
    std::string tags, vocab, out;
    int k = 2;
};

int run_graph(const GraphArgs& a) {
    const auto vocab = sg::load_vocab(a.vocab);
    const auto corpus = sg::load_tag_corpus(a.tags);
    const auto weighted = sg::cooccurrence_costs(corpus, vocab);
    const auto graph = sg::build_size_graph(weighted, vocab, a.k);
    sg::save_size_graph(graph, a.out);

    const auto report = sg::approximation_report(weighted, graph);
    std::cerr << "graph: " << graph.n() << " objects, " << graph.edges.size() << " edges ("
              << a.k << " spanning trees)\n"
              << "cost " << fmt(report.cost) << " within bound " << fmt(report.bound)
              << " (edge costs " << fmt(report.min_cost) << ".." << fmt(report.max_cost)
              << ")\n";
    return 0;
}

struct IngestArgs {
    std::string graph, detections, textual, out;
    std::string scale = "linear";
    std::size_t cap = 100;
};

int run_ingest(const IngestArgs& a) {
    if (a.detections.empty() && a.textual.empty())
        throw UsageError("ingest needs --detections and/or --textual");
    const auto graph = sg::load_size_graph(a.graph);

    std::vector<sg::DetectionPair> detections;
    std::vector<sg::TextualExtraction> extractions;
    if (!a.detections.empty()) {
        auto file = sg::load_detections(a.detections);
        for (const auto& err : file.errors)
            std::cerr << a.detections << " " << err << "\n";
        detections = std::move(file.records);
    }
    if (!a.textual.empty()) {
        auto file = sg::load_textual(a.textual);
        for (const auto& err : file.errors)
            std::cerr << a.textual << " " << err << "\n";
        extractions = std::move(file.records);
    }

    const auto result = sg::aggregate(detections, extractions, graph,
                                      sg::scale_from_string(a.scale),
                                      sg::metric_unit_table(), a.cap);
    sg::save_observations(result.obs, graph.vocab, a.out);

    const auto& s = result.stats;
    std::cerr << "visual: " << s.visual_accepted << " kept, " << s.visual_rejected
              << " low-score, " << s.visual_off_graph << " off-graph, " << s.visual_capped
              << " over cap, " << s.visual_pruned << " outliers\n"
              << "textual: " << s.textual_accepted << " kept, " << s.textual_rejected
              << " rejected\n";
    return 0;
}

struct FitArgs {
    std::string graph, obs, anchors, out;
    std::string scale = "linear";
    sg::FitConfig config;
};

int run_fit(const FitArgs& a) {
    const auto graph = sg::load_size_graph(a.graph);
    const auto loaded = sg::load_observations(a.obs, graph);
    if (loaded.off_graph)
        std::cerr << "dropped " << loaded.off_graph << " observations on non-edges\n";

    std::map<int, sg::LogNormalParams> anchors;
    if (!a.anchors.empty()) anchors = sg::load_anchors(a.anchors, graph.vocab);

    const auto result = sg::fit(graph, loaded.obs, a.config, anchors);

    sg::NamedModel named;
    named.vocab = graph.vocab;
    named.model = result.model;
    named.meta = {result.sweeps, result.loglik, sg::scale_from_string(a.scale)};
    sg::save_model(named, a.out);

    std::cerr << "fit: " << result.sweeps << " sweeps, log-likelihood "
              << fmt(result.loglik) << "\n";
    return 0;
}

struct QueryArgs {
    std::string model;
    std::string a, b;
};

int run_query(const QueryArgs& q) {
    const auto named = sg::load_model(q.model);
    const int a = named.vocab.id_of(q.a);
    const int b = named.vocab.id_of(q.b);
    const auto r = sg::compare(named.model, a, b);

    const std::string decision = r.decision == sg::Winner::A   ? named.vocab.names[a]
                                 : r.decision == sg::Winner::B ? named.vocab.names[b]
                                                               : "tie";
    std::printf("P(%s > %s) = %.6f  decision=%s  confidence=%.6f\n",
                named.vocab.names[a].c_str(), named.vocab.names[b].c_str(), r.p_bigger,
                decision.c_str(), r.confidence);
    return 0;
}

struct EvalArgs {
    std::string model, pairs, out;
    std::vector<double> declaration_grid;
    std::string inject_truth, graph, obs;
    std::vector<int> inject_counts;
    sg::FitConfig config;
};

int run_eval(const EvalArgs& a) {
    const auto named = sg::load_model(a.model);
    const auto dataset = sg::bind_pairs(sg::load_pairs(a.pairs), named.vocab);
    if (dataset.pairs.empty()) throw sg::DataError("pairs file has no comparisons");

    const auto report = sg::accuracy(named.model, dataset);

    // metric,key,value rows accumulate here; also echoed as a table.
    std::vector<std::array<std::string, 3>> rows;
    rows.push_back({"overall", "", fmt(report.overall)});
    for (const auto& [id, counts] : report.per_object) {
        (void)counts;
        rows.push_back({"per_object", named.vocab.names[id],
                        fmt(report.per_object_accuracy(id))});
    }

    if (!a.declaration_grid.empty()) {
        for (const auto& [dr, precision] :
             sg::declaration_curve(named.model, dataset, a.declaration_grid))
            rows.push_back({"declaration", fmt(dr), fmt(precision)});
    }

    if (!a.inject_truth.empty()) {
        if (a.graph.empty() || a.obs.empty() || a.inject_counts.empty())
            throw UsageError("--inject needs --graph, --obs and --inject-counts");
        const auto graph = sg::load_size_graph(a.graph);
        if (graph.vocab.names != named.vocab.names)
            throw sg::DataError("graph and model vocabularies differ");
        const auto loaded = sg::load_observations(a.obs, graph);
        const auto truth = sg::load_anchors(a.inject_truth, graph.vocab);
        for (const auto& [count, acc] :
             sg::anchor_injection_curve(graph, loaded.obs, truth, dataset,
                                        a.inject_counts, a.config))
            rows.push_back({"injection", std::to_string(count), fmt(acc)});
    }

    std::size_t w0 = 0, w1 = 0;
    for (const auto& r : rows) {
        w0 = std::max(w0, r[0].size());
        w1 = std::max(w1, r[1].size());
    }
    for (const auto& r : rows) {
        std::cout << r[0] << std::string(w0 - r[0].size() + 2, ' ') << r[1]
                  << std::string(w1 - r[1].size() + 2, ' ') << r[2] << "\n";
    }

    std::ostringstream csv;
    csv << "metric,key,value\n";
    for (const auto& r : rows) csv << r[0] << "," << r[1] << "," << r[2] << "\n";
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw sg::DataError("cannot write file: " + a.out);
        out << csv.str();
        if (!out) throw sg::DataError("failed while writing: " + a.out);
    } else {
        std::cout << csv.str();
    }
    return 0;
}

struct SynthArgs {
    sg::SynthConfig config;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int run_synth(const SynthArgs& a) {
    const auto world = sg::generate_world(a.config, a.seed);
    sg::write_world(world, a.out_dir);
    std::cerr << "world: " << world.vocab.size() << " objects, "
              << world.graph.edges.size() << " graph edges, "
              << world.obs.pairwise_count() << " pairwise + " << world.obs.unary_count()
              << " unary observations, " << world.dataset.pairs.size()
              << " ground-truth pairs -> " << a.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"size distributions over object classes from noisy "
                 "pairwise and textual size evidence"};
    app.require_subcommand(1);

    GraphArgs graph_args;
    auto* graph_cmd = app.add_subcommand(
        "graph", "build the k-edge-connected size graph from tag co-occurrence");
    graph_cmd->add_option("--tags", graph_args.tags, "tag corpus, one tab-separated list per line")
        ->required();
    graph_cmd->add_option("--vocab", graph_args.vocab, "object names, one per line")->required();
    graph_cmd->add_option("-k,--k", graph_args.k, "edge-disjoint spanning trees to extract")
        ->capture_default_str();
    graph_cmd->add_option("-o,--out", graph_args.out, "output graph JSON")->required();

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand(
        "ingest", "convert detection/textual records into log-space observations");
    ingest_cmd->add_option("--graph", ingest_args.graph, "size graph JSON")->required();
    ingest_cmd->add_option("--detections", ingest_args.detections,
                           "detection pairs, JSON lines");
    ingest_cmd->add_option("--textual", ingest_args.textual, "textual extractions, JSON lines");
    ingest_cmd->add_option("--scale", ingest_args.scale, "size scale: linear or area")
        ->check(CLI::IsMember({"linear", "area"}))
        ->capture_default_str();
    ingest_cmd->add_option("--cap", ingest_args.cap, "max accepted records per edge")
        ->capture_default_str();
    ingest_cmd->add_option("-o,--out", ingest_args.out, "output observations JSONL")->required();

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit log-normal sizes by coordinate ascent");
    fit_cmd->add_option("--graph", fit_args.graph, "size graph JSON")->required();
    fit_cmd->add_option("--obs", fit_args.obs, "observations JSONL")->required();
    fit_cmd->add_option("--anchors", fit_args.anchors, "anchor parameters JSON");
    fit_cmd->add_option("--scale", fit_args.scale, "scale recorded in model metadata")
        ->check(CLI::IsMember({"linear", "area"}))
        ->capture_default_str();
    fit_cmd->add_option("--eta", fit_args.config.eta, "sigma gradient step")
        ->capture_default_str();
    fit_cmd->add_option("--max-sweeps", fit_args.config.max_sweeps, "sweep budget")
        ->capture_default_str();
    fit_cmd->add_option("--rel-tol", fit_args.config.rel_tol, "relative improvement stop")
        ->capture_default_str();
    fit_cmd->add_option("--max-backtracks", fit_args.config.max_backtracks,
                        "step halvings before skipping a sigma update")
        ->capture_default_str();
    fit_cmd->add_option("-o,--out", fit_args.out, "output model JSON")->required();

    QueryArgs query_args;
    auto* query_cmd = app.add_subcommand("query", "probability that one object outsizes another");
    query_cmd->add_option("--model", query_args.model, "model JSON")->required();
    query_cmd->add_option("a", query_args.a, "first object name")->required();
    query_cmd->add_option("b", query_args.b, "second object name")->required();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "score a model against bigger-than pairs");
    eval_cmd->add_option("--model", eval_args.model, "model JSON")->required();
    eval_cmd->add_option("--pairs", eval_args.pairs, "CSV of bigger,smaller pairs")->required();
    eval_cmd->add_option("-o,--out", eval_args.out, "write metric CSV here instead of stdout");
    eval_cmd
        ->add_option("--declaration-grid", eval_args.declaration_grid,
                     "declaration rates in (0,1], comma separated")
        ->delimiter(',');
    eval_cmd->add_option("--inject", eval_args.inject_truth,
                         "true parameters JSON for the anchor-injection curve");
    eval_cmd
        ->add_option("--inject-counts", eval_args.inject_counts,
                     "anchor counts for the injection curve, comma separated")
        ->delimiter(',');
    eval_cmd->add_option("--graph", eval_args.graph, "size graph JSON (for --inject)");
    eval_cmd->add_option("--obs", eval_args.obs, "observations JSONL (for --inject)");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic world with ground truth");
    synth_cmd->add_option("--n", synth_args.config.n, "number of objects")
        ->capture_default_str();
    synth_cmd->add_option("-k,--k", synth_args.config.k, "spanning trees in the size graph")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.seed, "RNG seed (required: no clock seeding)")
        ->required();
    synth_cmd->add_option("--obs-per-edge", synth_args.config.obs_per_edge,
                          "pairwise samples per edge")
        ->capture_default_str();
    synth_cmd->add_option("--unary-fraction", synth_args.config.unary_fraction,
                          "fraction of objects with textual-style samples")
        ->capture_default_str();
    synth_cmd->add_option("--unary-per-node", synth_args.config.unary_per_node,
                          "unary samples per covered object")
        ->capture_default_str();
    synth_cmd->add_option("--mu-lo", synth_args.config.mu_lo, "true mu lower bound")
        ->capture_default_str();
    synth_cmd->add_option("--mu-hi", synth_args.config.mu_hi, "true mu upper bound")
        ->capture_default_str();
    synth_cmd->add_option("--sigma-lo", synth_args.config.sigma_lo, "true sigma lower bound")
        ->capture_default_str();
    synth_cmd->add_option("--sigma-hi", synth_args.config.sigma_hi, "true sigma upper bound")
        ->capture_default_str();
    synth_cmd->add_flag("--zero-noise", synth_args.config.zero_noise,
                        "emit exact means instead of sampling");
    synth_cmd->add_option("--pair-margin", synth_args.config.pair_margin,
                          "emit only ground-truth pairs with |mu difference| above this")
        ->capture_default_str();
    synth_cmd->add_option("--out-dir", synth_args.out_dir, "directory for the world files")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 0 is --help; anything else is a usage error
    }

    try {
        if (graph_cmd->parsed()) return run_graph(graph_args);
        if (ingest_cmd->parsed()) return run_ingest(ingest_args);
        if (fit_cmd->parsed()) return run_fit(fit_args);
        if (query_cmd->parsed()) return run_query(query_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const sg::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    }
    return 1;
}
