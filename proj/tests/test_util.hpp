#pragma once

// Shared helpers for the test binaries: scratch directories, file writing,
// and small random-input generators.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "sizegraph/graph.hpp"

namespace testutil {

// Self-cleaning scratch directory under the system temp root.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("sizegraph-test-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("test cannot write " + path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("test cannot read " + path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    return content;
}

// Complete graph with i.i.d. uniform edge costs; no exact cost ties.
inline sizegraph::WeightedGraph random_complete_graph(int n, std::mt19937_64& rng,
                                                      double lo = 1.0, double hi = 10.0) {
    std::uniform_real_distribution<double> cost(lo, hi);
    sizegraph::WeightedGraph g;
    g.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j, cost(rng)});
    return g;
}

inline sizegraph::ObjectVocab numbered_vocab(int n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (int i = 0; i < n; ++i) names.push_back("obj" + std::to_string(i));
    return sizegraph::ObjectVocab::from_names(names);
}

}  // namespace testutil
