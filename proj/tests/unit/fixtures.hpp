#pragma once

#include <nontextpd/docmodel.hpp>

#include <set>
#include <string>
#include <vector>

namespace fixtures {

/// A valid document whose citation sequence is `cites` (one marker per
/// element, in order) and whose identifier sequence is `identifiers`.
inline nontextpd::DocumentRecord doc(const std::string& id, const std::vector<std::string>& cites,
                                     const std::vector<std::string>& identifiers = {}, std::string text = {}) {
    nontextpd::DocumentRecord d;
    d.doc_id = id;
    d.title = "Title of " + id;
    d.authors = {"Author " + id};
    std::set<std::string> keys;
    if (text.empty()) {
        for (std::size_t i = 0; i < cites.size(); ++i) {
            text += "word" + std::to_string(i) + " ";
            d.citations.push_back({cites[i], text.size(), {}, {}, {}});
            text += "[" + std::to_string(i + 1) + "] ";
        }
        text += "closing words for the text.";
    } else {
        for (std::size_t i = 0; i < cites.size(); ++i)
            d.citations.push_back({cites[i], text.size() * (i + 1) / (cites.size() + 1), {}, {}, {}});
    }
    d.text = std::move(text);
    for (const auto& k : cites)
        if (keys.insert(k).second) d.references.push_back({k, "Reference " + k, {"Someone"}, 2000});
    d.identifiers = identifiers;
    return d;
}

inline std::vector<std::string> seq(std::initializer_list<int> xs) {
    std::vector<std::string> out;
    for (int x : xs) out.push_back(x < 0 ? "X" + std::to_string(-x) : std::to_string(x));
    return out;
}

} // namespace fixtures
