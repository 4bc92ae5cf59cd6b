#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace opsgraph {

/// Half-open range of Unicode scalar offsets into Document::text.
struct Interval {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end - start; }
    bool contains(const Interval& other) const noexcept { return start <= other.start && other.end <= end; }
    auto operator<=>(const Interval&) const = default;
};

/// Normalized source text. All provenance offsets index into `text`.
struct Document {
    std::string id;
    std::u32string text;
    std::vector<std::size_t> page_offsets;  // page starts, first is always 0

    std::size_t length() const noexcept { return text.size(); }
    std::string slice(Interval iv) const;  // UTF-8
};

enum class ChunkingMode { PageLevel, DocumentLevel };

struct Chunk {
    std::string document_id;
    std::size_t start = 0;
    std::size_t end = 0;
    int ordinal = 0;

    Interval interval() const noexcept { return {start, end}; }
    bool operator==(const Chunk&) const = default;
};

inline constexpr std::string_view kDefaultPageMarker = "\f";

/// Removes every page marker and unifies line endings to '\n'. Offsets are
/// recorded where each marker stood, in normalized coordinates.
Document load_document(std::string_view raw_text, std::string_view page_marker = kDefaultPageMarker,
                       std::string id = "doc");

std::vector<Chunk> segment(const Document& doc, ChunkingMode mode);

std::string chunk_text(const Document& doc, const Chunk& chunk);

std::string_view to_string(ChunkingMode mode);
ChunkingMode parse_chunking_mode(std::string_view name);

}  // namespace opsgraph
