#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sizegraph {

// The set of object classes we model. Names are lowercase, trimmed and
// unique; ids are their dense 0..n-1 positions in `names`.
struct ObjectVocab {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> index;

    // Canonicalizes (trim + lowercase) and indexes. Throws DataError on
    // duplicates or empty names.
    static ObjectVocab from_names(const std::vector<std::string>& raw);

    int size() const { return static_cast<int>(names.size()); }
    std::optional<int> find(const std::string& name) const;
    // Like find() but throws DataError for unknown names.
    int id_of(const std::string& name) const;
};

// One tag list per image. Tags are distinct, canonicalized strings; lists
// may mention tags outside the vocabulary (they still count toward list
// length, i.e. toward how diluted each co-mention is).
struct TagCorpus {
    std::vector<std::vector<std::string>> lists;

    std::size_t size() const { return lists.size(); }
};

std::string canonical_name(const std::string& raw);

// vocab file: one object name per line; '#' comments and blank lines ignored.
ObjectVocab load_vocab(const std::string& path);

// tag corpus: one image per line, tab-separated tags. Duplicate tags within
// a line collapse to one. Blank lines and '#' comments ignored.
TagCorpus load_tag_corpus(const std::string& path);

}  // namespace sizegraph
