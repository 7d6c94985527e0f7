#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sizegraph/graph.hpp"

namespace sizegraph {

// Whether object "size" means a linear extent or an area. Detections measure
// pixel areas while text reports lengths, so the linear scale (default)
// halves the log area ratio to put both modalities on a length scale.
enum class SizeScale { linear, area };

std::string to_string(SizeScale scale);
SizeScale scale_from_string(const std::string& s);

// One detected object instance inside an image.
struct DetectionSide {
    double area_px = 0.0;  // detected box area, pixels^2
    double depth = 0.0;    // mean depth of the box, consistent units
    double score = 0.0;    // detector confidence
    double thresh = 0.0;   // per-class acceptance threshold
};

// Two detections of different classes in one image.
struct DetectionPair {
    std::string i;
    std::string j;
    std::string image;
    DetectionSide a;  // side of object i
    DetectionSide b;  // side of object j
};

// Log relative size evidence in record orientation:
// log_ratio estimates log(size_i / size_j).
struct VisualObservation {
    int i = 0;
    int j = 0;
    double log_ratio = 0.0;
};

// One parsed textual size claim: the numeric values of a pattern match,
// e.g. both numbers of a "30 x 40 cm" hit.
struct TextualValue {
    double value = 0.0;
    std::string unit;
};

struct TextualExtraction {
    std::string object;
    std::string pattern;  // which pattern family matched: dim2 | tall | width
    std::vector<TextualValue> values;
    std::string source;
};

// Absolute log size (meters) evidence for one object.
struct TextualObservation {
    int i = 0;
    double log_size = 0.0;
};

// Converted observation, or the reason the record was rejected. Rejection is
// normal operation (weak detections, unknown units); malformed geometry and
// unknown object names throw DataError instead.
template <typename T>
struct Converted {
    std::optional<T> value;
    std::string reject_reason;

    bool accepted() const { return value.has_value(); }
};

// Supported length units and their meter factors.
const std::map<std::string, double>& metric_unit_table();

// Detection pair -> log size ratio. The raw cue is the area ratio corrected
// for perspective by squared depths (similar triangles); the linear scale
// halves its log. Rejected ("low score") when either detection scores below
// its class threshold.
Converted<VisualObservation> visual_observation(const DetectionPair& rec,
                                                const ObjectVocab& vocab,
                                                SizeScale scale);

// Textual claim -> absolute log size: converts every value to meters and
// averages their logs (log of the geometric mean), so one source contributes
// one observation no matter how many numbers it listed.
Converted<TextualObservation> textual_observation(
    const TextualExtraction& rec, const ObjectVocab& vocab,
    const std::map<std::string, double>& units = metric_unit_table());

// Robust outlier filter: with at least 5 samples, drops values farther than
// 3 scaled-MAD from the median (scale 1.4826 makes MAD track a normal
// sigma). Fewer samples, or MAD == 0, leave the input unchanged.
std::vector<double> prune_outliers(const std::vector<double>& obs);

// All surviving evidence, keyed to a size graph. Pairwise samples live on
// the graph edge (lo, hi) oriented as log(size_lo) - log(size_hi).
struct ObservationSet {
    int n = 0;
    std::vector<std::vector<double>> unary;                       // by node id
    std::map<std::pair<int, int>, std::vector<double>> pairwise;  // by (lo, hi)

    bool empty() const;
    std::size_t unary_count() const;
    std::size_t pairwise_count() const;
};

struct AggregateStats {
    std::size_t visual_accepted = 0;
    std::size_t visual_rejected = 0;   // weak scores
    std::size_t visual_off_graph = 0;  // pair is not an edge of the size graph
    std::size_t visual_capped = 0;     // beyond the per-edge budget
    std::size_t visual_pruned = 0;     // removed by the outlier filter
    std::size_t textual_accepted = 0;
    std::size_t textual_rejected = 0;  // unknown units
};

struct AggregateResult {
    ObservationSet obs;
    AggregateStats stats;
};

// Full conversion pipeline: convert records, drop pairs that are not graph
// edges, keep at most per_edge_cap accepted samples per edge in input order,
// then outlier-prune each edge's sample list. Throws DataError if nothing
// at all survives.
AggregateResult aggregate(const std::vector<DetectionPair>& detections,
                          const std::vector<TextualExtraction>& extractions,
                          const SizeGraph& graph,
                          SizeScale scale,
                          const std::map<std::string, double>& units = metric_unit_table(),
                          std::size_t per_edge_cap = 100);

// Line-delimited JSON readers. Malformed lines are collected as
// "line N: reason" strings rather than aborting the whole file.
struct DetectionFile {
    std::vector<DetectionPair> records;
    std::vector<std::string> errors;
};

struct TextualFile {
    std::vector<TextualExtraction> records;
    std::vector<std::string> errors;
};

DetectionFile load_detections(const std::string& path);
TextualFile load_textual(const std::string& path);

// Aggregated observations round trip (JSON lines, object names not ids).
void save_observations(const ObservationSet& obs, const ObjectVocab& vocab,
                       const std::string& path);

struct LoadedObservations {
    ObservationSet obs;
    std::size_t off_graph = 0;  // pairwise lines dropped: not edges of the graph
};

LoadedObservations load_observations(const std::string& path, const SizeGraph& graph);

}  // namespace sizegraph
