#pragma once

// In-memory inverted index over a document collection with a plain-file
// persistence format (manifest + JSONL documents + term-sorted postings).

#include "docmodel.hpp"
#include "error.hpp"
#include "imagedetect.hpp"
#include "textdetect.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nontextpd {

inline constexpr int index_format_version = 1;

struct Posting {
    std::string doc_id;
    std::size_t tf = 1;
    friend bool operator==(const Posting&, const Posting&) = default;
};

template <class Key>
using PostingMap = std::map<Key, std::vector<Posting>>; // postings sorted by doc_id

struct DocStats {
    std::size_t tokens = 0;
    std::size_t citations = 0;
    std::size_t references = 0;
    std::size_t identifiers = 0;
    std::size_t signatures = 0;
};

/// Precomputed per-image features. Absent members mean the image carries no
/// usable input for that method.
struct ImageDescriptor {
    std::string doc_id;
    std::string image_id;
    ImageType type = ImageType::other;
    std::optional<PHash> phash;
    std::optional<RatioHash> ratio;
    std::optional<TrigramDescriptor> trigrams;
    std::optional<std::vector<OcrToken>> ocr_tokens;
};

/// Features of one image. Bar heights come from the record when declared,
/// otherwise from the raster of a bar chart.
inline ImageDescriptor describe_image(const std::string& doc_id, const ImageRecord& img) {
    ImageDescriptor d{doc_id, img.image_id, img.image_type, {}, {}, {}, {}};
    if (img.pixels && img.pixels->width >= phash_block && img.pixels->height >= phash_block) {
        const auto h = dct_phash(*img.pixels);
        if (!h.low_confidence) d.phash = h;
    }
    if (img.image_type == ImageType::bar_chart) {
        try {
            if (img.bar_heights && !img.bar_heights->empty()) d.ratio = ratio_hash(*img.bar_heights);
            else if (img.pixels) d.ratio = ratio_hash(extract_bar_heights(*img.pixels));
        } catch (const Error&) {
            // no measurable bars; the image stays out of ratio comparisons
        }
    }
    if (img.ocr_tokens && !img.ocr_tokens->empty()) {
        d.trigrams = trigram_descriptor(*img.ocr_tokens);
        d.ocr_tokens = img.ocr_tokens;
    }
    return d;
}

inline std::vector<ImageDescriptor> describe_images(const DocumentRecord& doc) {
    std::vector<ImageDescriptor> out;
    for (const auto& img : doc.images) out.push_back(describe_image(doc.doc_id, img));
    return out;
}

/// Term counts of the features each retrieval method indexes.
struct DocumentTerms {
    std::map<std::string, std::size_t> references; // tf = citations of the reference (at least 1)
    std::map<std::string, std::size_t> citations;
    std::map<std::string, std::size_t> identifiers;
    std::map<std::uint64_t, std::size_t> signatures;
    Fingerprint fingerprint;
    std::size_t tokens = 0;
};

inline DocumentTerms document_terms(const DocumentRecord& doc, const FingerprintConfig& fp_cfg) {
    DocumentTerms t;
    for (const auto& c : doc.citations) ++t.citations[c.ref_key];
    for (const auto& r : doc.references) {
        const auto it = t.citations.find(r.ref_key);
        t.references[r.ref_key] = it == t.citations.end() ? 1 : it->second;
    }
    for (const auto& id : doc.identifiers) ++t.identifiers[id];
    const auto tokens = tokenize_text(doc.text);
    t.tokens = tokens.size();
    t.fingerprint = build_fingerprint(tokens, fp_cfg);
    for (auto s : t.fingerprint.signatures) ++t.signatures[s];
    return t;
}

class IndexStore {
public:
    explicit IndexStore(FingerprintConfig fp = {}) : fp_cfg_(fp) {}

    const FingerprintConfig& fingerprint_config() const noexcept { return fp_cfg_; }
    std::size_t size() const noexcept { return docs_.size(); }
    bool contains(const std::string& id) const { return docs_.contains(id); }

    void add(DocumentRecord doc) {
        validate(doc);
        if (docs_.contains(doc.doc_id))
            throw Error(ErrorCode::duplicate_doc_id, "document '" + doc.doc_id + "' already indexed");
        const auto terms = document_terms(doc, fp_cfg_);
        const std::string id = doc.doc_id;
        insert_postings(references_, terms.references, id);
        insert_postings(citations_, terms.citations, id);
        insert_postings(identifiers_, terms.identifiers, id);
        insert_postings(signatures_, terms.signatures, id);
        Entry e;
        e.stats = {terms.tokens, doc.citations.size(), doc.references.size(), doc.identifiers.size(),
                   terms.fingerprint.signatures.size()};
        e.fingerprint = terms.fingerprint;
        e.images = describe_images(doc);
        e.doc = std::make_shared<const DocumentRecord>(std::move(doc));
        docs_.emplace(id, std::move(e));
    }

    /// Removes a document and its postings; false when the id is unknown.
    bool remove(const std::string& id) {
        const auto it = docs_.find(id);
        if (it == docs_.end()) return false;
        const auto terms = document_terms(*it->second.doc, fp_cfg_);
        erase_postings(references_, terms.references, id);
        erase_postings(citations_, terms.citations, id);
        erase_postings(identifiers_, terms.identifiers, id);
        erase_postings(signatures_, terms.signatures, id);
        docs_.erase(it);
        return true;
    }

    const DocumentRecord& document(const std::string& id) const { return *entry(id).doc; }
    std::shared_ptr<const DocumentRecord> document_ptr(const std::string& id) const { return entry(id).doc; }
    const DocStats& stats(const std::string& id) const { return entry(id).stats; }
    const Fingerprint& fingerprint(const std::string& id) const { return entry(id).fingerprint; }
    const std::vector<ImageDescriptor>& images(const std::string& id) const { return entry(id).images; }

    /// Ascending doc ids.
    std::vector<std::string> doc_ids() const {
        std::vector<std::string> ids;
        ids.reserve(docs_.size());
        for (const auto& [id, _] : docs_) ids.push_back(id);
        return ids;
    }

    const PostingMap<std::string>& reference_postings() const noexcept { return references_; }
    const PostingMap<std::string>& citation_postings() const noexcept { return citations_; }
    const PostingMap<std::string>& identifier_postings() const noexcept { return identifiers_; }
    const PostingMap<std::uint64_t>& signature_postings() const noexcept { return signatures_; }

    // -- persistence ---------------------------------------------------------

    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        json manifest{{"format", "nontextpd-index"},
                      {"version", index_format_version},
                      {"documents", docs_.size()},
                      {"fingerprint", {{"ngram_len", fp_cfg_.ngram_len},
                                       {"retention_zero_bits", fp_cfg_.retention_zero_bits}}},
                      {"files", {"documents.jsonl", "references.jsonl", "citations.jsonl", "identifiers.jsonl",
                                 "signatures.jsonl"}}};
        write_file(dir / "manifest.json", manifest.dump(2) + "\n");
        std::string docs;
        for (const auto& [id, e] : docs_) docs += to_json(*e.doc, OffsetUnit::byte, true).dump() + "\n";
        write_file(dir / "documents.jsonl", docs);
        write_file(dir / "references.jsonl", postings_jsonl(references_));
        write_file(dir / "citations.jsonl", postings_jsonl(citations_));
        write_file(dir / "identifiers.jsonl", postings_jsonl(identifiers_));
        write_file(dir / "signatures.jsonl", postings_jsonl(signatures_));
    }

    static IndexStore load(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::io_error, "no index at " + dir.string());
        json manifest;
        try {
            manifest = json::parse(read_file(dir / "manifest.json"));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::io_error, std::string("unreadable index manifest: ") + e.what());
        }
        if (manifest.value("format", "") != "nontextpd-index" || manifest.value("version", 0) != index_format_version)
            throw Error(ErrorCode::io_error, "unsupported index format in " + dir.string());
        FingerprintConfig fp;
        fp.ngram_len = manifest.at("fingerprint").at("ngram_len").get<std::size_t>();
        fp.retention_zero_bits = manifest.at("fingerprint").at("retention_zero_bits").get<unsigned>();
        IndexStore store(fp);
        for (const auto& line : split_lines(read_file(dir / "documents.jsonl"))) {
            auto doc = load_document(line);
            const auto terms = document_terms(doc, fp);
            Entry e;
            e.stats = {terms.tokens, doc.citations.size(), doc.references.size(), doc.identifiers.size(),
                       terms.fingerprint.signatures.size()};
            e.fingerprint = terms.fingerprint;
            e.images = describe_images(doc);
            const std::string id = doc.doc_id;
            e.doc = std::make_shared<const DocumentRecord>(std::move(doc));
            if (!store.docs_.emplace(id, std::move(e)).second)
                throw Error(ErrorCode::duplicate_doc_id, "document '" + id + "' stored twice");
        }
        store.references_ = read_postings<std::string>(dir / "references.jsonl");
        store.citations_ = read_postings<std::string>(dir / "citations.jsonl");
        store.identifiers_ = read_postings<std::string>(dir / "identifiers.jsonl");
        store.signatures_ = read_postings<std::uint64_t>(dir / "signatures.jsonl");
        store.check_consistency();
        return store;
    }

    /// Postings reference only stored documents, and identifier term
    /// frequencies sum to each document's identifier count.
    void check_consistency() const {
        std::map<std::string, std::size_t> id_tf;
        auto check = [&](const auto& postings, bool count) {
            for (const auto& [term, list] : postings)
                for (std::size_t i = 0; i < list.size(); ++i) {
                    if (!docs_.contains(list[i].doc_id))
                        throw Error(ErrorCode::io_error, "posting for unknown document '" + list[i].doc_id + "'");
                    if (i > 0 && !(list[i - 1].doc_id < list[i].doc_id))
                        throw Error(ErrorCode::io_error, "postings not sorted by doc id");
                    if (count) id_tf[list[i].doc_id] += list[i].tf;
                }
        };
        check(references_, false);
        check(citations_, false);
        check(identifiers_, true);
        check(signatures_, false);
        for (const auto& [id, e] : docs_) {
            const auto it = id_tf.find(id);
            const std::size_t tf = it == id_tf.end() ? 0 : it->second;
            if (tf != e.stats.identifiers)
                throw Error(ErrorCode::io_error, "identifier postings of '" + id + "' disagree with its record");
        }
    }

private:
    struct Entry {
        std::shared_ptr<const DocumentRecord> doc;
        DocStats stats;
        Fingerprint fingerprint;
        std::vector<ImageDescriptor> images;
    };

    const Entry& entry(const std::string& id) const {
        const auto it = docs_.find(id);
        if (it == docs_.end()) throw Error(ErrorCode::unknown_doc_id, "no document '" + id + "'");
        return it->second;
    }

    template <class Key>
    static void insert_postings(PostingMap<Key>& map, const std::map<Key, std::size_t>& terms, const std::string& id) {
        for (const auto& [term, tf] : terms) {
            auto& list = map[term];
            const auto pos = std::lower_bound(list.begin(), list.end(), id,
                                              [](const Posting& p, const std::string& v) { return p.doc_id < v; });
            list.insert(pos, Posting{id, tf});
        }
    }

    template <class Key>
    static void erase_postings(PostingMap<Key>& map, const std::map<Key, std::size_t>& terms, const std::string& id) {
        for (const auto& [term, _] : terms) {
            auto it = map.find(term);
            if (it == map.end()) continue;
            std::erase_if(it->second, [&](const Posting& p) { return p.doc_id == id; });
            if (it->second.empty()) map.erase(it);
        }
    }

    template <class Key>
    static std::string postings_jsonl(const PostingMap<Key>& map) {
        std::string out;
        for (const auto& [term, list] : map) {
            json row{{"term", term}, {"postings", json::array()}};
            for (const auto& p : list) row["postings"].push_back(json::array({p.doc_id, p.tf}));
            out += row.dump() + "\n";
        }
        return out;
    }

    template <class Key>
    static PostingMap<Key> read_postings(const std::filesystem::path& path) {
        PostingMap<Key> map;
        for (const auto& line : split_lines(read_file(path))) {
            try {
                const auto row = json::parse(line);
                auto& list = map[row.at("term").get<Key>()];
                for (const auto& p : row.at("postings")) list.push_back({p.at(0).get<std::string>(), p.at(1).get<std::size_t>()});
            } catch (const json::exception& e) {
                throw Error(ErrorCode::io_error, path.filename().string() + ": " + e.what());
            }
        }
        return map;
    }

    static std::string read_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    static void write_file(const std::filesystem::path& path, const std::string& data) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
        out << data;
    }

    static std::vector<std::string> split_lines(const std::string& s) {
        std::vector<std::string> lines;
        std::size_t start = 0;
        while (start < s.size()) {
            auto end = s.find('\n', start);
            if (end == std::string::npos) end = s.size();
            if (end > start) lines.push_back(s.substr(start, end - start));
            start = end + 1;
        }
        return lines;
    }

    FingerprintConfig fp_cfg_;
    std::map<std::string, Entry> docs_;
    PostingMap<std::string> references_;
    PostingMap<std::string> citations_;
    PostingMap<std::string> identifiers_;
    PostingMap<std::uint64_t> signatures_;
};

/// Builds an index over `docs`; duplicate ids raise DuplicateDocId.
inline IndexStore build_index(std::vector<DocumentRecord> docs, FingerprintConfig fp = {}) {
    IndexStore store(fp);
    for (auto& d : docs) store.add(std::move(d));
    return store;
}

} // namespace nontextpd
