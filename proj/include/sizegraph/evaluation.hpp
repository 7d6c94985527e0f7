#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sizegraph/inference.hpp"
#include "sizegraph/model.hpp"

namespace sizegraph {

enum class PairProvenance { annotated, closure };

// Ordered ground-truth claim: `bigger` is larger than `smaller`.
struct ComparisonPair {
    int bigger = 0;
    int smaller = 0;
    PairProvenance provenance = PairProvenance::annotated;
};

struct ComparisonDataset {
    std::vector<ComparisonPair> pairs;  // acyclic, no duplicates, no self-pairs
};

// Reachability closure of the annotated bigger-than relation; added pairs are
// tagged closure. Throws DataError (naming one cycle) if the input relation
// is cyclic. `names` is only used to make that message readable.
ComparisonDataset close_transitively(const std::vector<std::pair<int, int>>& annotated,
                                     const std::vector<std::string>* names = nullptr);

struct AccuracyReport {
    double overall = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    // per object: pairs containing it, and how many of those were called right
    std::map<int, std::pair<std::size_t, std::size_t>> per_object;  // id -> (correct, total)

    double per_object_accuracy(int id) const;
};

// A pair (b, s) counts as correct only when compare(b, s) decides b; ties
// are wrong by definition (deterministic and pessimistic).
AccuracyReport accuracy(const LogNormalModel& model, const ComparisonDataset& dataset);

// Precision over the most confident ceil(dr*N) queries for each declaration
// rate dr in the grid. Grid values must lie in (0, 1].
std::vector<std::pair<double, double>> declaration_curve(const LogNormalModel& model,
                                                         const ComparisonDataset& dataset,
                                                         const std::vector<double>& grid);

// For each count c: freeze the c most-mentioned objects (dataset appearance
// count, ties by id) at their true parameters, refit, and score. Returns
// (count, accuracy) points.
std::vector<std::pair<int, double>> anchor_injection_curve(
    const SizeGraph& graph, const ObservationSet& obs,
    const std::map<int, LogNormalParams>& truth, const ComparisonDataset& dataset,
    const std::vector<int>& counts, const FitConfig& config = {});

// pairs file: CSV with a "bigger,smaller" header, object names per row.
void save_pairs(const ComparisonDataset& dataset, const ObjectVocab& vocab,
                const std::string& path);
std::vector<std::pair<std::string, std::string>> load_pairs(const std::string& path);

// Name pairs -> id pairs -> transitive closure against this vocabulary.
ComparisonDataset bind_pairs(const std::vector<std::pair<std::string, std::string>>& named,
                             const ObjectVocab& vocab);

}  // namespace sizegraph
