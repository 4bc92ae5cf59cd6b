#include "opsgraph/corpus.hpp"

#include <algorithm>

#include "opsgraph/error.hpp"
#include "opsgraph/utf8.hpp"

namespace opsgraph {
namespace {

std::u32string unify_line_endings(std::u32string_view in) {
    std::u32string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == U'\r') {
            out.push_back(U'\n');
            if (i + 1 < in.size() && in[i + 1] == U'\n') ++i;
        } else {
            out.push_back(in[i]);
        }
    }
    return out;
}

}  // namespace

std::string Document::slice(Interval iv) const {
    iv.end = std::min(iv.end, text.size());
    iv.start = std::min(iv.start, iv.end);
    return utf8::encode(std::u32string_view(text).substr(iv.start, iv.length()));
}

Document load_document(std::string_view raw_text, std::string_view page_marker, std::string id) {
    if (page_marker.empty()) throw ConfigError("page marker must be non-empty");
    if (raw_text.empty()) throw EmptyDocument();

    const std::u32string source = unify_line_endings(utf8::decode(raw_text));
    const std::u32string marker = unify_line_endings(utf8::decode(page_marker));

    // Marker removal runs as a stack so that text joined across a removed
    // marker cannot form a new marker occurrence.
    std::u32string out;
    out.reserve(source.size());
    std::vector<std::size_t> cuts;
    for (char32_t c : source) {
        out.push_back(c);
        if (out.size() >= marker.size() &&
            std::u32string_view(out).substr(out.size() - marker.size()) == marker) {
            out.resize(out.size() - marker.size());
            for (auto& cut : cuts) cut = std::min(cut, out.size());
            cuts.push_back(out.size());
        }
    }
    if (out.empty()) throw EmptyDocument();

    Document doc;
    doc.id = std::move(id);
    doc.page_offsets.push_back(0);
    for (std::size_t cut : cuts) {
        if (cut > doc.page_offsets.back() && cut < out.size()) doc.page_offsets.push_back(cut);
    }
    doc.text = std::move(out);
    return doc;
}

std::vector<Chunk> segment(const Document& doc, ChunkingMode mode) {
    std::vector<Chunk> chunks;
    if (mode == ChunkingMode::DocumentLevel) {
        chunks.push_back({doc.id, 0, doc.length(), 0});
        return chunks;
    }
    for (std::size_t i = 0; i < doc.page_offsets.size(); ++i) {
        const std::size_t end = i + 1 < doc.page_offsets.size() ? doc.page_offsets[i + 1] : doc.length();
        chunks.push_back({doc.id, doc.page_offsets[i], end, static_cast<int>(i)});
    }
    return chunks;
}

std::string chunk_text(const Document& doc, const Chunk& chunk) { return doc.slice(chunk.interval()); }

std::string_view to_string(ChunkingMode mode) {
    return mode == ChunkingMode::PageLevel ? "page" : "document";
}

ChunkingMode parse_chunking_mode(std::string_view name) {
    if (name == "page") return ChunkingMode::PageLevel;
    if (name == "document") return ChunkingMode::DocumentLevel;
    throw ConfigError("unknown chunking mode '" + std::string(name) + "' (expected page|document)");
}

}  // namespace opsgraph
