#include "sizegraph/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "sizegraph/error.hpp"

namespace sizegraph {

std::string canonical_name(const std::string& raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string out = raw.substr(b, e - b);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

ObjectVocab ObjectVocab::from_names(const std::vector<std::string>& raw) {
    ObjectVocab v;
    v.names.reserve(raw.size());
    for (const auto& r : raw) {
        std::string name = canonical_name(r);
        if (name.empty())
            throw DataError("vocabulary contains an empty object name");
        if (v.index.count(name))
            throw DataError("duplicate object name in vocabulary: " + name);
        v.index.emplace(name, static_cast<int>(v.names.size()));
        v.names.push_back(std::move(name));
    }
    return v;
}

std::optional<int> ObjectVocab::find(const std::string& name) const {
    auto it = index.find(canonical_name(name));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

int ObjectVocab::id_of(const std::string& name) const {
    auto id = find(name);
    if (!id) throw DataError("unknown object name: " + canonical_name(name));
    return *id;
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

bool skippable(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;  // blank
}

}  // namespace

ObjectVocab load_vocab(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (skippable(line)) continue;
        names.push_back(line);
    }
    if (names.empty()) throw DataError("vocabulary file is empty: " + path);
    return ObjectVocab::from_names(names);
}

TagCorpus load_tag_corpus(const std::string& path) {
    auto in = open_or_throw(path);
    TagCorpus corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (skippable(line)) continue;
        std::set<std::string> seen;
        std::vector<std::string> tags;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) {
            std::string tag = canonical_name(field);
            if (tag.empty()) continue;
            if (seen.insert(tag).second) tags.push_back(std::move(tag));
        }
        if (!tags.empty()) corpus.lists.push_back(std::move(tags));
    }
    if (corpus.lists.empty()) throw DataError("empty corpus: " + path);
    return corpus;
}

}  // namespace sizegraph
