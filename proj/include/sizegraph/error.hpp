#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sizegraph {

// Anything wrong with user-supplied data: malformed files, unknown object
// names, infeasible requests. The CLI maps this to exit code 2; internal
// invariant violations stay std::logic_error and are never caught.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a requested k-edge-connected construction cannot proceed
// because some cut in the (residual) graph has too few edges across it.
// Carries one side of the violating cut so callers can report which
// objects are starved of co-occurrence data.
class DisconnectedError : public DataError {
public:
    DisconnectedError(const std::string& msg, std::vector<int> cut_side, int tree_index)
        : DataError(msg), cut_side_(std::move(cut_side)), tree_index_(tree_index) {}

    // Node ids on the smaller side of the cut.
    const std::vector<int>& cut_side() const { return cut_side_; }
    // 1-based index of the spanning tree being extracted when the residual
    // graph fell apart; 0 if the input graph was under-connected up front.
    int tree_index() const { return tree_index_; }

private:
    std::vector<int> cut_side_;
    int tree_index_;
};

}  // namespace sizegraph
