#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "opsgraph/corpus.hpp"
#include "opsgraph/extraction.hpp"

namespace opsgraph {

/// Ordered from strongest to weakest.
enum class AlignmentClass { MatchExact, MatchFuzzy, MatchLesser, NoMatch };

inline constexpr AlignmentClass kAllAlignments[] = {AlignmentClass::MatchExact, AlignmentClass::MatchFuzzy,
                                                    AlignmentClass::MatchLesser, AlignmentClass::NoMatch};

std::string_view to_string(AlignmentClass a);
std::optional<AlignmentClass> parse_alignment(std::string_view name);

struct GroundingConfig {
    double fuzzy_threshold = 0.75;
    double lesser_threshold = 0.35;
    std::size_t window_stride = 1;

    void validate() const;  // 0 < lesser < fuzzy <= 1, stride >= 1
};

struct GroundedExtraction {
    RawExtraction raw;
    std::string document_id;
    Interval interval;
    AlignmentClass alignment = AlignmentClass::NoMatch;
    double similarity = 0.0;

    bool operator==(const GroundedExtraction&) const = default;
};

/// Leftmost occurrence of `needle` starting at or after `search_from`.
std::optional<Interval> exact_align(std::u32string_view needle, std::u32string_view haystack,
                                    std::size_t search_from = 0);

/// Total characters matched by Ratcliff/Obershelp: take the longest common
/// block (earliest in `a`, then earliest in `b`), recurse on both flanks.
std::size_t matched_characters(std::u32string_view a, std::u32string_view b);

/// 2*M / (|a|+|b|); two empty strings compare as 1.0.
double similarity_ratio(std::u32string_view a, std::u32string_view b);
double similarity_ratio(std::string_view a, std::string_view b);  // UTF-8 convenience

struct FuzzyMatch {
    Interval window;    // best |needle|-wide window before snapping
    Interval interval;  // window snapped to word boundaries
    double window_ratio = 0.0;
    double ratio = 0.0;  // ratio of `needle` against the snapped interval
};

/// Slides a |needle|-wide window over `span` of `haystack` and keeps the
/// leftmost best-scoring position. Throws NoCandidateSpan on an empty span.
FuzzyMatch fuzzy_align(std::u32string_view needle, std::u32string_view haystack, Interval span,
                       const GroundingConfig& cfg);

AlignmentClass classify(double similarity, const GroundingConfig& cfg);

/// Exact search inside the producing chunk, fuzzy fallback, then
/// classification. Repeated surface forms within a chunk take successive
/// occurrences.
std::vector<GroundedExtraction> ground(const std::vector<RawExtraction>& extractions, const Document& doc,
                                       const std::vector<Chunk>& chunks, const GroundingConfig& cfg);

nlohmann::json to_json(const GroundedExtraction& g);
GroundedExtraction grounded_from_json(const nlohmann::json& j, const SchemaSpec& schema);

std::string write_grounding_jsonl(const std::vector<GroundedExtraction>& grounded);
std::vector<GroundedExtraction> read_grounding_jsonl(std::string_view text, const SchemaSpec& schema);

}  // namespace opsgraph
