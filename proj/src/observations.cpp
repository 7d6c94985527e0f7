#include "sizegraph/observations.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sizegraph/error.hpp"

namespace sizegraph {

using nlohmann::json;

std::string to_string(SizeScale scale) {
    return scale == SizeScale::linear ? "linear" : "area";
}

SizeScale scale_from_string(const std::string& s) {
    if (s == "linear") return SizeScale::linear;
    if (s == "area") return SizeScale::area;
    throw DataError("unknown size scale: " + s + " (expected linear or area)");
}

const std::map<std::string, double>& metric_unit_table() {
    static const std::map<std::string, double> table{
        {"m", 1.0},    {"cm", 0.01},    {"mm", 0.001},  {"km", 1000.0},
        {"in", 0.0254}, {"ft", 0.3048}, {"yd", 0.9144},
    };
    return table;
}

// ---------------------------------------------------------------------------
// Record conversion

Converted<VisualObservation> visual_observation(const DetectionPair& rec,
                                                const ObjectVocab& vocab,
                                                SizeScale scale) {
    const int i = vocab.id_of(rec.i);
    const int j = vocab.id_of(rec.j);
    if (i == j) throw DataError("detection pair relates an object to itself: " + rec.i);
    for (const DetectionSide* s : {&rec.a, &rec.b}) {
        if (!(std::isfinite(s->area_px) && s->area_px > 0.0))
            throw DataError("detection area must be finite and positive (image " + rec.image + ")");
        if (!(std::isfinite(s->depth) && s->depth > 0.0))
            throw DataError("detection depth must be finite and positive (image " + rec.image + ")");
    }

    if (rec.a.score < rec.a.thresh || rec.b.score < rec.b.thresh)
        return {std::nullopt, "low score"};

    // Area scales with (true size / depth)^2 on the image plane, so the
    // depth-squared factor cancels projection: r estimates the real area
    // ratio of object i to object j.
    const double r = (rec.a.area_px / rec.b.area_px) *
                     ((rec.a.depth * rec.a.depth) / (rec.b.depth * rec.b.depth));
    double log_ratio = std::log(r);
    if (scale == SizeScale::linear) log_ratio *= 0.5;
    return {VisualObservation{i, j, log_ratio}, ""};
}

Converted<TextualObservation> textual_observation(const TextualExtraction& rec,
                                                  const ObjectVocab& vocab,
                                                  const std::map<std::string, double>& units) {
    const int i = vocab.id_of(rec.object);
    if (rec.values.empty())
        throw DataError("textual extraction has no values (source " + rec.source + ")");

    double sum_log = 0.0;
    for (const auto& v : rec.values) {
        auto it = units.find(v.unit);
        if (it == units.end()) return {std::nullopt, "unknown unit: " + v.unit};
        if (!(std::isfinite(v.value) && v.value > 0.0))
            throw DataError("textual value must be finite and positive (source " + rec.source + ")");
        sum_log += std::log(v.value * it->second);
    }
    return {TextualObservation{i, sum_log / static_cast<double>(rec.values.size())}, ""};
}

// ---------------------------------------------------------------------------
// Outlier pruning

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<double> prune_outliers(const std::vector<double>& obs) {
    // Applied to a fixed point: dropping points shifts the median and MAD,
    // which can expose further outliers, and stopping early would make the
    // filter non-idempotent. Each pass strictly shrinks the list, so this
    // terminates.
    std::vector<double> kept = obs;
    for (;;) {
        if (kept.size() < 5) return kept;
        const double med = median_of(kept);
        std::vector<double> dev;
        dev.reserve(kept.size());
        for (double x : kept) dev.push_back(std::abs(x - med));
        const double mad = median_of(std::move(dev));
        if (mad == 0.0) return kept;
        const double cutoff = 3.0 * 1.4826 * mad;
        std::vector<double> next;
        next.reserve(kept.size());
        for (double x : kept)
            if (std::abs(x - med) <= cutoff) next.push_back(x);
        if (next.size() == kept.size()) return kept;
        kept = std::move(next);
    }
}

// ---------------------------------------------------------------------------
// ObservationSet

bool ObservationSet::empty() const {
    return unary_count() == 0 && pairwise_count() == 0;
}

std::size_t ObservationSet::unary_count() const {
    std::size_t c = 0;
    for (const auto& v : unary) c += v.size();
    return c;
}

std::size_t ObservationSet::pairwise_count() const {
    std::size_t c = 0;
    for (const auto& [key, v] : pairwise) c += v.size();
    return c;
}

AggregateResult aggregate(const std::vector<DetectionPair>& detections,
                          const std::vector<TextualExtraction>& extractions,
                          const SizeGraph& graph,
                          SizeScale scale,
                          const std::map<std::string, double>& units,
                          std::size_t per_edge_cap) {
    AggregateResult out;
    out.obs.n = graph.n();
    out.obs.unary.assign(graph.n(), {});

    std::set<std::pair<int, int>> edge_set;
    for (const auto& e : graph.edges) edge_set.insert({e.i, e.j});

    for (const auto& rec : detections) {
        auto conv = visual_observation(rec, graph.vocab, scale);
        if (!conv.accepted()) {
            ++out.stats.visual_rejected;
            continue;
        }
        int lo = conv.value->i, hi = conv.value->j;
        double y = conv.value->log_ratio;
        if (lo > hi) {
            std::swap(lo, hi);
            y = -y;  // store as log(size_lo) - log(size_hi)
        }
        if (!edge_set.count({lo, hi})) {
            ++out.stats.visual_off_graph;
            continue;
        }
        auto& bucket = out.obs.pairwise[{lo, hi}];
        if (bucket.size() >= per_edge_cap) {
            ++out.stats.visual_capped;
            continue;
        }
        bucket.push_back(y);
        ++out.stats.visual_accepted;
    }

    for (auto& [key, bucket] : out.obs.pairwise) {
        auto kept = prune_outliers(bucket);
        out.stats.visual_pruned += bucket.size() - kept.size();
        bucket = std::move(kept);
    }

    for (const auto& rec : extractions) {
        auto conv = textual_observation(rec, graph.vocab, units);
        if (!conv.accepted()) {
            ++out.stats.textual_rejected;
            continue;
        }
        out.obs.unary[conv.value->i].push_back(conv.value->log_size);
        ++out.stats.textual_accepted;
    }

    if (out.obs.empty())
        throw DataError("no observations survived aggregation");
    return out;
}

// ---------------------------------------------------------------------------
// File I/O

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

DetectionSide parse_side(const json& js) {
    DetectionSide s;
    s.area_px = js.at("area_px").get<double>();
    s.depth = js.at("depth").get<double>();
    s.score = js.at("score").get<double>();
    s.thresh = js.at("thresh").get<double>();
    return s;
}

}  // namespace

DetectionFile load_detections(const std::string& path) {
    auto in = open_or_throw(path);
    DetectionFile out;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (blank(line)) continue;
        try {
            json js = json::parse(line);
            DetectionPair rec;
            rec.i = js.at("i").get<std::string>();
            rec.j = js.at("j").get<std::string>();
            rec.image = js.value("image", "");
            rec.a = parse_side(js.at("a"));
            rec.b = parse_side(js.at("b"));
            out.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            out.errors.push_back("line " + std::to_string(no) + ": " + e.what());
        }
    }
    return out;
}

TextualFile load_textual(const std::string& path) {
    auto in = open_or_throw(path);
    TextualFile out;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (blank(line)) continue;
        try {
            json js = json::parse(line);
            TextualExtraction rec;
            rec.object = js.at("object").get<std::string>();
            rec.pattern = js.value("pattern", "");
            rec.source = js.value("source", "");
            for (const auto& jv : js.at("values"))
                rec.values.push_back({jv.at("v").get<double>(), jv.at("unit").get<std::string>()});
            if (rec.values.empty())
                throw DataError("values array is empty");
            out.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            out.errors.push_back("line " + std::to_string(no) + ": " + e.what());
        } catch (const DataError& e) {
            out.errors.push_back("line " + std::to_string(no) + ": " + e.what());
        }
    }
    return out;
}

void save_observations(const ObservationSet& obs, const ObjectVocab& vocab,
                       const std::string& path) {
    if (obs.n != vocab.size())
        throw DataError("observation set and vocabulary disagree on object count");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& [key, ys] : obs.pairwise) {
        for (double y : ys) {
            json js{{"kind", "visual"},
                    {"i", vocab.names[key.first]},
                    {"j", vocab.names[key.second]},
                    {"y", y}};
            out << js.dump() << "\n";
        }
    }
    for (int i = 0; i < obs.n; ++i) {
        for (double y : obs.unary[i]) {
            json js{{"kind", "textual"}, {"i", vocab.names[i]}, {"y", y}};
            out << js.dump() << "\n";
        }
    }
    if (!out) throw DataError("failed while writing: " + path);
}

LoadedObservations load_observations(const std::string& path, const SizeGraph& graph) {
    auto in = open_or_throw(path);
    LoadedObservations out;
    out.obs.n = graph.n();
    out.obs.unary.assign(graph.n(), {});

    std::set<std::pair<int, int>> edge_set;
    for (const auto& e : graph.edges) edge_set.insert({e.i, e.j});

    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (blank(line)) continue;
        json js;
        try {
            js = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + " line " + std::to_string(no) + ": " + e.what());
        }
        try {
            const std::string kind = js.at("kind").get<std::string>();
            if (kind == "visual") {
                int i = graph.vocab.id_of(js.at("i").get<std::string>());
                int j = graph.vocab.id_of(js.at("j").get<std::string>());
                double y = js.at("y").get<double>();
                if (i > j) {
                    std::swap(i, j);
                    y = -y;
                }
                if (!std::isfinite(y))
                    throw DataError("observation value must be finite");
                if (!edge_set.count({i, j})) {
                    ++out.off_graph;
                    continue;
                }
                out.obs.pairwise[{i, j}].push_back(y);
            } else if (kind == "textual") {
                int i = graph.vocab.id_of(js.at("i").get<std::string>());
                double y = js.at("y").get<double>();
                if (!std::isfinite(y))
                    throw DataError("observation value must be finite");
                out.obs.unary[i].push_back(y);
            } else {
                throw DataError("unknown observation kind: " + kind);
            }
        } catch (const json::exception& e) {
            throw DataError(path + " line " + std::to_string(no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path + " line " + std::to_string(no) + ": " + e.what());
        }
    }

    if (out.obs.empty())
        throw DataError("no observations loaded from " + path);
    return out;
}

}  // namespace sizegraph
