#pragma once

#include "error.hpp"
#include "raster.hpp"
#include "sequence.hpp"
#include "utf8.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nontextpd {

using json = nlohmann::json;

inline constexpr std::string_view document_format_version = "1";

struct CitationMarker {
    std::string ref_key;
    std::size_t char_offset = 0;
    std::optional<std::size_t> word_index;
    std::optional<std::size_t> sentence_index;
    std::optional<std::size_t> paragraph_index;
    friend bool operator==(const CitationMarker&, const CitationMarker&) = default;
};

struct ReferenceEntry {
    std::string ref_key;
    std::string title;
    std::vector<std::string> authors;
    std::optional<int> year;
    friend bool operator==(const ReferenceEntry&, const ReferenceEntry&) = default;
};

enum class ImageType { photo, bar_chart, table, line_chart, diagram, other };

inline std::string_view to_string(ImageType t) {
    switch (t) {
    case ImageType::photo: return "photo";
    case ImageType::bar_chart: return "bar_chart";
    case ImageType::table: return "table";
    case ImageType::line_chart: return "line_chart";
    case ImageType::diagram: return "diagram";
    case ImageType::other: return "other";
    }
    return "other";
}

inline ImageType parse_image_type(std::string_view s) {
    for (auto t : {ImageType::photo, ImageType::bar_chart, ImageType::table, ImageType::line_chart,
                   ImageType::diagram, ImageType::other}) {
        if (to_string(t) == s) return t;
    }
    throw Error(ErrorCode::schema_error, "unknown image_type '" + std::string(s) + "'");
}

struct OcrToken {
    std::string text;
    double x = 0;
    double y = 0;
    double img_height = 0;
    friend bool operator==(const OcrToken&, const OcrToken&) = default;
};

struct ImageRecord {
    std::string image_id;
    ImageType image_type = ImageType::other;
    std::optional<Raster> pixels;
    std::string pgm_path; // set when pixels were loaded from a file reference
    std::optional<std::vector<double>> bar_heights;
    std::optional<std::vector<OcrToken>> ocr_tokens;
    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// A validated, normalized document. Citation markers are sorted by
/// char_offset; every citation resolves to exactly one reference.
struct DocumentRecord {
    std::string doc_id;
    std::string title;
    std::vector<std::string> authors;
    std::optional<int> year;
    std::string text;
    std::vector<CitationMarker> citations;
    std::vector<ReferenceEntry> references;
    std::vector<std::string> identifiers;
    std::vector<std::string> numbers;
    std::vector<std::string> operators;
    // Optional byte offsets parallel to the token lists above; empty when unknown.
    std::vector<std::size_t> identifier_offsets;
    std::vector<std::size_t> number_offsets;
    std::vector<std::size_t> operator_offsets;
    std::vector<ImageRecord> images;
    friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

enum class OffsetUnit { byte, codepoint };

struct LoadOptions {
    OffsetUnit offsets = OffsetUnit::byte;
    /// Directory against which relative `pgm_path` entries resolve.
    std::filesystem::path base_dir;
    /// Fill missing word/sentence/paragraph indices of citations from the text.
    bool derive_positions = false;
    /// Unify references whose titles are within edit distance 2 and whose
    /// author initials match.
    bool merge_similar_references = false;
};

struct Token {
    std::string text;        // lowercased
    std::size_t offset = 0;  // byte offset into the original text
    std::size_t length = 0;  // byte length in the original text
    friend bool operator==(const Token&, const Token&) = default;
};

/// Lowercased word tokens; any run of non-word characters separates tokens.
inline std::vector<Token> tokenize_text(std::string_view text) {
    std::vector<Token> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto d = utf8::decode(text, pos);
        if (!utf8::is_word_char(d.cp)) {
            pos += d.length;
            continue;
        }
        Token tok;
        tok.offset = pos;
        while (pos < text.size()) {
            d = utf8::decode(text, pos);
            if (!utf8::is_word_char(d.cp)) break;
            utf8::append(tok.text, utf8::to_lower(d.cp));
            pos += d.length;
        }
        tok.length = pos - tok.offset;
        out.push_back(std::move(tok));
    }
    return out;
}

inline std::vector<Token> tokenize_text(const DocumentRecord& doc) { return tokenize_text(doc.text); }

/// ref_keys in ascending char_offset order (ties keep input order).
inline std::vector<std::string> citation_sequence(const DocumentRecord& doc) {
    std::vector<const CitationMarker*> sorted;
    sorted.reserve(doc.citations.size());
    for (const auto& c : doc.citations) sorted.push_back(&c);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto* l, const auto* r) { return l->char_offset < r->char_offset; });
    std::vector<std::string> seq;
    seq.reserve(sorted.size());
    for (const auto* c : sorted) seq.push_back(c->ref_key);
    return seq;
}

/// Boundaries of text units used for positional citation indices. A paragraph
/// ends at a blank line; a sentence ends at '.', '!' or '?' followed by
/// whitespace, or at a paragraph end.
struct TextLayout {
    std::vector<std::size_t> word_starts;
    std::vector<std::size_t> sentence_starts;
    std::vector<std::size_t> paragraph_starts;

    static TextLayout of(std::string_view text) {
        TextLayout layout;
        for (const auto& t : tokenize_text(text)) layout.word_starts.push_back(t.offset);
        layout.paragraph_starts.push_back(0);
        layout.sentence_starts.push_back(0);
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (c == '\n') {
                std::size_t j = i + 1;
                while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
                if (j < text.size() && text[j] == '\n') {
                    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
                    if (j < text.size()) {
                        layout.paragraph_starts.push_back(j);
                        if (layout.sentence_starts.back() < j) layout.sentence_starts.push_back(j);
                    }
                    i = j > 0 ? j - 1 : j;
                    continue;
                }
            }
            if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
                std::isspace(static_cast<unsigned char>(text[i + 1]))) {
                std::size_t j = i + 1;
                while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
                if (j < text.size() && layout.sentence_starts.back() < j) layout.sentence_starts.push_back(j);
            }
        }
        std::sort(layout.sentence_starts.begin(), layout.sentence_starts.end());
        layout.sentence_starts.erase(std::unique(layout.sentence_starts.begin(), layout.sentence_starts.end()),
                                     layout.sentence_starts.end());
        return layout;
    }

    static std::size_t index_at(const std::vector<std::size_t>& starts, std::size_t offset) {
        // number of units starting at or before offset, minus one (clamped)
        const auto it = std::upper_bound(starts.begin(), starts.end(), offset);
        const auto n = static_cast<std::size_t>(it - starts.begin());
        return n == 0 ? 0 : n - 1;
    }

    /// Words starting strictly before `offset`: the word index of a citation marker.
    std::size_t word_index(std::size_t offset) const {
        return static_cast<std::size_t>(std::lower_bound(word_starts.begin(), word_starts.end(), offset) -
                                        word_starts.begin());
    }
    std::size_t sentence_index(std::size_t offset) const { return index_at(sentence_starts, offset); }
    std::size_t paragraph_index(std::size_t offset) const { return index_at(paragraph_starts, offset); }
};

/// Fills absent word/sentence/paragraph indices from the document text.
inline void derive_citation_positions(DocumentRecord& doc) {
    if (doc.citations.empty()) return;
    const auto layout = TextLayout::of(doc.text);
    for (auto& c : doc.citations) {
        if (!c.word_index) c.word_index = layout.word_index(c.char_offset);
        if (!c.sentence_index) c.sentence_index = layout.sentence_index(c.char_offset);
        if (!c.paragraph_index) c.paragraph_index = layout.paragraph_index(c.char_offset);
    }
}

namespace detail {

inline std::string author_initials(const std::vector<std::string>& authors) {
    std::string out;
    for (const auto& a : authors) {
        // surname initial: first letter of the last whitespace-separated word,
        // or of the part before a comma ("Gipp, B.")
        std::string_view name = a;
        const auto comma = name.find(',');
        std::string_view surname = name;
        if (comma != std::string_view::npos) {
            surname = name.substr(0, comma);
        } else {
            const auto space = name.find_last_of(' ');
            if (space != std::string_view::npos) surname = name.substr(space + 1);
        }
        for (char c : surname) {
            if (std::isalpha(static_cast<unsigned char>(c))) {
                out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
                break;
            }
        }
    }
    return out;
}

inline void merge_similar_references(DocumentRecord& doc) {
    std::map<std::string, std::string> alias;
    std::vector<ReferenceEntry> kept;
    for (const auto& ref : doc.references) {
        const auto title = utf8::to_lower(ref.title);
        const auto initials = author_initials(ref.authors);
        bool merged = false;
        for (const auto& k : kept) {
            if (title.empty()) break;
            if (author_initials(k.authors) == initials && edit_distance(utf8::to_lower(k.title), title) <= 2) {
                alias[ref.ref_key] = k.ref_key;
                merged = true;
                break;
            }
        }
        if (!merged) kept.push_back(ref);
    }
    doc.references = std::move(kept);
    for (auto& c : doc.citations) {
        if (auto it = alias.find(c.ref_key); it != alias.end()) c.ref_key = it->second;
    }
}

template <class T>
T require(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::schema_error, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T optional_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string("field '") + key + "': " + e.what());
    }
}

inline std::optional<std::size_t> optional_index(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return require<std::size_t>(j, key);
}

inline std::optional<int> optional_year(const json& j) {
    if (!j.contains("year") || j.at("year").is_null()) return std::nullopt;
    return require<int>(j, "year");
}

inline Raster parse_inline_raster(const json& p) {
    const auto w = require<std::size_t>(p, "width");
    const auto h = require<std::size_t>(p, "height");
    const auto data = require<std::vector<int>>(p, "data");
    if (data.size() != w * h) throw Error(ErrorCode::schema_error, "pixel data size does not match width*height");
    Raster r(w, h);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i] < 0 || data[i] > 255) throw Error(ErrorCode::schema_error, "pixel value outside [0,255]");
        r.pixels[i] = static_cast<std::uint8_t>(data[i]);
    }
    return r;
}

inline ImageRecord parse_image(const json& j, const LoadOptions& opts) {
    ImageRecord img;
    img.image_id = require<std::string>(j, "image_id");
    img.image_type = parse_image_type(require<std::string>(j, "image_type"));
    if (j.contains("pixels") && !j.at("pixels").is_null()) img.pixels = parse_inline_raster(j.at("pixels"));
    if (j.contains("pgm_path") && !j.at("pgm_path").is_null()) {
        img.pgm_path = require<std::string>(j, "pgm_path");
        std::filesystem::path p = img.pgm_path;
        if (p.is_relative() && !opts.base_dir.empty()) p = opts.base_dir / p;
        img.pixels = read_pgm(p.string());
    }
    if (j.contains("bar_heights") && !j.at("bar_heights").is_null()) {
        img.bar_heights = require<std::vector<double>>(j, "bar_heights");
        for (double h : *img.bar_heights)
            if (!(h >= 0)) throw Error(ErrorCode::schema_error, "bar heights must be non-negative");
    }
    if (j.contains("ocr_tokens") && !j.at("ocr_tokens").is_null()) {
        std::vector<OcrToken> toks;
        for (const auto& t : j.at("ocr_tokens")) {
            OcrToken tok{require<std::string>(t, "text"), require<double>(t, "x"), require<double>(t, "y"),
                         require<double>(t, "img_height")};
            if (tok.x < 0 || tok.y < 0) throw Error(ErrorCode::schema_error, "OCR token coordinates must be >= 0");
            if (!(tok.img_height > 0)) throw Error(ErrorCode::schema_error, "OCR token img_height must be > 0");
            toks.push_back(std::move(tok));
        }
        img.ocr_tokens = std::move(toks);
    }
    if (!img.pixels && !img.bar_heights && !img.ocr_tokens)
        throw Error(ErrorCode::schema_error, "image '" + img.image_id + "' has no pixels, bar_heights or ocr_tokens");
    return img;
}

inline std::vector<std::size_t> parse_offsets(const json& j, const char* key, std::size_t expected,
                                              const std::string& text, OffsetUnit unit) {
    auto offs = optional_field<std::vector<std::size_t>>(j, key, {});
    if (offs.empty()) return offs;
    if (offs.size() != expected)
        throw Error(ErrorCode::schema_error, std::string("'") + key + "' length differs from its token list");
    for (auto& o : offs) {
        if (unit == OffsetUnit::codepoint) {
            const auto b = utf8::byte_offset(text, o);
            if (!b) throw Error(ErrorCode::offset_out_of_range, std::string(key) + " beyond text");
            o = *b;
        } else if (o > text.size()) {
            throw Error(ErrorCode::offset_out_of_range, std::string(key) + " beyond text");
        }
    }
    return offs;
}

} // namespace detail

/// Checks every record invariant; throws Error on the first violation.
inline void validate(const DocumentRecord& doc) {
    if (doc.doc_id.empty()) throw Error(ErrorCode::schema_error, "doc_id must be nonempty");
    std::set<std::string> keys;
    for (const auto& r : doc.references) {
        if (!keys.insert(r.ref_key).second)
            throw Error(ErrorCode::duplicate_reference, "reference key '" + r.ref_key + "' listed more than once");
    }
    std::size_t prev_offset = 0;
    std::optional<std::size_t> prev_word, prev_sentence, prev_paragraph;
    for (const auto& c : doc.citations) {
        if (c.char_offset > doc.text.size())
            throw Error(ErrorCode::offset_out_of_range,
                        "citation offset " + std::to_string(c.char_offset) + " beyond text length");
        if (c.char_offset < prev_offset) throw Error(ErrorCode::schema_error, "citations not sorted by char_offset");
        prev_offset = c.char_offset;
        if (!keys.contains(c.ref_key))
            throw Error(ErrorCode::dangling_citation, "citation '" + c.ref_key + "' has no reference entry");
        auto check = [](std::optional<std::size_t>& prev, const std::optional<std::size_t>& v, const char* what) {
            if (!v) return;
            if (prev && *v < *prev)
                throw Error(ErrorCode::schema_error, std::string(what) + " decreases with char_offset");
            prev = v;
        };
        check(prev_word, c.word_index, "word_index");
        check(prev_sentence, c.sentence_index, "sentence_index");
        check(prev_paragraph, c.paragraph_index, "paragraph_index");
    }
    auto check_offsets = [&](const std::vector<std::size_t>& offs, std::size_t n, const char* what) {
        if (offs.empty()) return;
        if (offs.size() != n) throw Error(ErrorCode::schema_error, std::string(what) + " length mismatch");
        for (auto o : offs)
            if (o > doc.text.size()) throw Error(ErrorCode::offset_out_of_range, std::string(what) + " beyond text");
    };
    check_offsets(doc.identifier_offsets, doc.identifiers.size(), "identifier_offsets");
    check_offsets(doc.number_offsets, doc.numbers.size(), "number_offsets");
    check_offsets(doc.operator_offsets, doc.operators.size(), "operator_offsets");
    for (const auto& img : doc.images) {
        if (!img.pixels && !img.bar_heights && !img.ocr_tokens)
            throw Error(ErrorCode::schema_error, "image '" + img.image_id + "' has no content");
    }
}

inline DocumentRecord document_from_json(const json& j, const LoadOptions& opts = {}) {
    if (!j.is_object()) throw Error(ErrorCode::schema_error, "document must be a JSON object");
    if (j.contains("format_version")) {
        const auto& v = j.at("format_version");
        const std::string version = v.is_string() ? v.get<std::string>() : v.dump();
        if (version != document_format_version)
            throw Error(ErrorCode::schema_error, "unsupported format_version " + version);
    }
    DocumentRecord doc;
    doc.doc_id = detail::require<std::string>(j, "doc_id");
    doc.text = detail::require<std::string>(j, "text");
    doc.title = detail::optional_field<std::string>(j, "title", "");
    doc.authors = detail::optional_field<std::vector<std::string>>(j, "authors", {});
    doc.year = detail::optional_year(j);

    const auto& cits = j.contains("citations") ? j.at("citations") : throw Error(ErrorCode::schema_error, "missing field 'citations'");
    if (!cits.is_array()) throw Error(ErrorCode::schema_error, "'citations' must be an array");
    for (const auto& c : cits) {
        CitationMarker m;
        m.ref_key = detail::require<std::string>(c, "ref_key");
        m.char_offset = detail::require<std::size_t>(c, "char_offset");
        if (opts.offsets == OffsetUnit::codepoint) {
            const auto b = utf8::byte_offset(doc.text, m.char_offset);
            if (!b) throw Error(ErrorCode::offset_out_of_range, "citation offset beyond text length");
            m.char_offset = *b;
        }
        m.word_index = detail::optional_index(c, "word_index");
        m.sentence_index = detail::optional_index(c, "sentence_index");
        m.paragraph_index = detail::optional_index(c, "paragraph_index");
        doc.citations.push_back(std::move(m));
    }
    std::stable_sort(doc.citations.begin(), doc.citations.end(),
                     [](const auto& l, const auto& r) { return l.char_offset < r.char_offset; });

    if (!j.contains("references")) throw Error(ErrorCode::schema_error, "missing field 'references'");
    for (const auto& r : j.at("references")) {
        ReferenceEntry ref;
        ref.ref_key = detail::require<std::string>(r, "ref_key");
        ref.title = detail::optional_field<std::string>(r, "title", "");
        ref.authors = detail::optional_field<std::vector<std::string>>(r, "authors", {});
        ref.year = detail::optional_year(r);
        doc.references.push_back(std::move(ref));
    }
    doc.identifiers = detail::require<std::vector<std::string>>(j, "identifiers");
    doc.numbers = detail::optional_field<std::vector<std::string>>(j, "numbers", {});
    doc.operators = detail::optional_field<std::vector<std::string>>(j, "operators", {});
    for (const auto* list : {&doc.identifiers, &doc.numbers, &doc.operators})
        for (const auto& t : *list)
            if (t.empty()) throw Error(ErrorCode::schema_error, "math tokens must be nonempty");
    doc.identifier_offsets = detail::parse_offsets(j, "identifier_offsets", doc.identifiers.size(), doc.text, opts.offsets);
    doc.number_offsets = detail::parse_offsets(j, "number_offsets", doc.numbers.size(), doc.text, opts.offsets);
    doc.operator_offsets = detail::parse_offsets(j, "operator_offsets", doc.operators.size(), doc.text, opts.offsets);

    if (!j.contains("images")) throw Error(ErrorCode::schema_error, "missing field 'images'");
    for (const auto& img : j.at("images")) doc.images.push_back(detail::parse_image(img, opts));

    validate(doc);
    if (opts.merge_similar_references) detail::merge_similar_references(doc);
    if (opts.derive_positions) derive_citation_positions(doc);
    return doc;
}

inline DocumentRecord load_document(std::string_view bytes, const LoadOptions& opts = {}) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::schema_error, std::string("invalid JSON: ") + e.what());
    }
    return document_from_json(j, opts);
}

inline DocumentRecord load_document_file(const std::filesystem::path& path, LoadOptions opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (opts.base_dir.empty()) opts.base_dir = path.parent_path();
    return load_document(ss.str(), opts);
}

/// With `inline_pixels`, rasters loaded from PGM files are embedded instead
/// of referenced by path.
inline json to_json(const DocumentRecord& doc, OffsetUnit unit = OffsetUnit::byte, bool inline_pixels = false) {
    auto off = [&](std::size_t b) { return unit == OffsetUnit::byte ? b : utf8::codepoint_index(doc.text, b); };
    auto offs = [&](const std::vector<std::size_t>& v) {
        json a = json::array();
        for (auto o : v) a.push_back(off(o));
        return a;
    };
    json j;
    j["format_version"] = std::string(document_format_version);
    j["doc_id"] = doc.doc_id;
    j["title"] = doc.title;
    j["authors"] = doc.authors;
    j["year"] = doc.year ? json(*doc.year) : json(nullptr);
    j["text"] = doc.text;
    json cits = json::array();
    for (const auto& c : doc.citations) {
        json m{{"ref_key", c.ref_key}, {"char_offset", off(c.char_offset)}};
        if (c.word_index) m["word_index"] = *c.word_index;
        if (c.sentence_index) m["sentence_index"] = *c.sentence_index;
        if (c.paragraph_index) m["paragraph_index"] = *c.paragraph_index;
        cits.push_back(std::move(m));
    }
    j["citations"] = std::move(cits);
    json refs = json::array();
    for (const auto& r : doc.references) {
        refs.push_back({{"ref_key", r.ref_key},
                        {"title", r.title},
                        {"authors", r.authors},
                        {"year", r.year ? json(*r.year) : json(nullptr)}});
    }
    j["references"] = std::move(refs);
    j["identifiers"] = doc.identifiers;
    j["numbers"] = doc.numbers;
    j["operators"] = doc.operators;
    if (!doc.identifier_offsets.empty()) j["identifier_offsets"] = offs(doc.identifier_offsets);
    if (!doc.number_offsets.empty()) j["number_offsets"] = offs(doc.number_offsets);
    if (!doc.operator_offsets.empty()) j["operator_offsets"] = offs(doc.operator_offsets);
    json imgs = json::array();
    for (const auto& img : doc.images) {
        json m{{"image_id", img.image_id}, {"image_type", std::string(to_string(img.image_type))}};
        if (!img.pgm_path.empty() && !inline_pixels) {
            m["pgm_path"] = img.pgm_path;
        } else if (img.pixels) {
            m["pixels"] = {{"width", img.pixels->width},
                           {"height", img.pixels->height},
                           {"data", std::vector<int>(img.pixels->pixels.begin(), img.pixels->pixels.end())}};
        }
        if (img.bar_heights) m["bar_heights"] = *img.bar_heights;
        if (img.ocr_tokens) {
            json toks = json::array();
            for (const auto& t : *img.ocr_tokens)
                toks.push_back({{"text", t.text}, {"x", t.x}, {"y", t.y}, {"img_height", t.img_height}});
            m["ocr_tokens"] = std::move(toks);
        }
        imgs.push_back(std::move(m));
    }
    j["images"] = std::move(imgs);
    return j;
}

inline std::string serialize_document(const DocumentRecord& doc, OffsetUnit unit = OffsetUnit::byte) {
    return to_json(doc, unit).dump();
}

} // namespace nontextpd
