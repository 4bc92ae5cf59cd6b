#include "opsgraph/grounding.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "opsgraph/error.hpp"
#include "opsgraph/utf8.hpp"

namespace opsgraph {

using nlohmann::json;

std::string_view to_string(AlignmentClass a) {
    switch (a) {
        case AlignmentClass::MatchExact: return "MATCH_EXACT";
        case AlignmentClass::MatchFuzzy: return "MATCH_FUZZY";
        case AlignmentClass::MatchLesser: return "MATCH_LESSER";
        case AlignmentClass::NoMatch: return "NO_MATCH";
    }
    return "?";
}

std::optional<AlignmentClass> parse_alignment(std::string_view name) {
    for (auto a : kAllAlignments)
        if (name == to_string(a)) return a;
    return std::nullopt;
}

void GroundingConfig::validate() const {
    if (!(lesser_threshold > 0.0 && lesser_threshold < fuzzy_threshold && fuzzy_threshold <= 1.0))
        throw ConfigError("thresholds must satisfy 0 < lesser < fuzzy <= 1");
    if (window_stride < 1) throw ConfigError("window stride must be >= 1");
}

std::optional<Interval> exact_align(std::u32string_view needle, std::u32string_view haystack,
                                    std::size_t search_from) {
    if (needle.empty() || search_from > haystack.size()) return std::nullopt;
    const auto pos = haystack.find(needle, search_from);
    if (pos == std::u32string_view::npos) return std::nullopt;
    return Interval{pos, pos + needle.size()};
}

namespace {

struct Block {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t size = 0;
};

// Longest common block of a[alo,ahi) and b[blo,bhi). Ties resolve to the
// earliest start in `a`, then the earliest start in `b`.
Block longest_block(std::u32string_view a, std::size_t alo, std::size_t ahi, std::u32string_view b,
                    std::size_t blo, std::size_t bhi, std::vector<std::size_t>& prev,
                    std::vector<std::size_t>& cur) {
    Block best{alo, blo, 0};
    const std::size_t width = bhi - blo;
    prev.assign(width + 1, 0);
    cur.assign(width + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            if (a[i] == b[blo + j]) {
                const std::size_t k = prev[j] + 1;
                cur[j + 1] = k;
                if (k > best.size) best = {i + 1 - k, blo + j + 1 - k, k};
            } else {
                cur[j + 1] = 0;
            }
        }
        std::swap(prev, cur);
    }
    return best;
}

}  // namespace

std::size_t matched_characters(std::u32string_view a, std::u32string_view b) {
    std::size_t matched = 0;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> pending{{0, a.size(), 0, b.size()}};
    std::vector<std::size_t> prev, cur;
    while (!pending.empty()) {
        const auto [alo, ahi, blo, bhi] = pending.back();
        pending.pop_back();
        if (alo >= ahi || blo >= bhi) continue;
        const Block blk = longest_block(a, alo, ahi, b, blo, bhi, prev, cur);
        if (blk.size == 0) continue;
        matched += blk.size;
        pending.emplace_back(alo, blk.a, blo, blk.b);
        pending.emplace_back(blk.a + blk.size, ahi, blk.b + blk.size, bhi);
    }
    return matched;
}

double similarity_ratio(std::u32string_view a, std::u32string_view b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 1.0;
    return 2.0 * static_cast<double>(matched_characters(a, b)) / static_cast<double>(total);
}

double similarity_ratio(std::string_view a, std::string_view b) {
    return similarity_ratio(utf8::decode(a), utf8::decode(b));
}

namespace {

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0x85 ||
           c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 ||
           c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_word_char(char32_t c) {
    static constexpr std::u32string_view separators = U".,;:!?()[]{}\"";
    return !is_space(c) && separators.find(c) == std::u32string_view::npos;
}

// A position p in [lo, hi] is mid-word when both neighbours are word chars.
bool mid_word(std::u32string_view text, std::size_t p, std::size_t lo, std::size_t hi) {
    return p > lo && p < hi && is_word_char(text[p - 1]) && is_word_char(text[p]);
}

std::size_t word_start(std::u32string_view text, std::size_t p, std::size_t lo) {
    while (p > lo && is_word_char(text[p - 1])) --p;
    return p;
}

std::size_t word_end(std::u32string_view text, std::size_t p, std::size_t hi) {
    while (p < hi && is_word_char(text[p])) ++p;
    return p;
}

Interval snap(std::u32string_view text, Interval iv, Interval span) {
    Interval out = iv;
    if (mid_word(text, iv.start, span.start, span.end)) {
        const std::size_t outward = word_start(text, iv.start, span.start);
        const std::size_t inward = word_end(text, iv.start, span.end);
        out.start = (iv.start - outward) <= (inward - iv.start) ? outward : inward;
    }
    if (mid_word(text, iv.end, span.start, span.end)) {
        const std::size_t outward = word_end(text, iv.end, span.end);
        const std::size_t inward = word_start(text, iv.end, span.start);
        out.end = (outward - iv.end) <= (iv.end - inward) ? outward : inward;
    }
    while (out.start < out.end && is_space(text[out.start])) ++out.start;
    while (out.end > out.start && is_space(text[out.end - 1])) --out.end;
    return out.start < out.end ? out : iv;
}

}  // namespace

FuzzyMatch fuzzy_align(std::u32string_view needle, std::u32string_view haystack, Interval span,
                       const GroundingConfig& cfg) {
    span.end = std::min(span.end, haystack.size());
    if (span.start >= span.end) throw NoCandidateSpan();
    const std::size_t width = std::min(needle.size(), span.length());
    const std::size_t stride = std::max<std::size_t>(cfg.window_stride, 1);

    FuzzyMatch best;
    best.window = {span.start, span.start + width};
    best.window_ratio = -1.0;
    for (std::size_t s = span.start; s + width <= span.end; s += stride) {
        const double r = similarity_ratio(needle, haystack.substr(s, width));
        if (r > best.window_ratio) {
            best.window = {s, s + width};
            best.window_ratio = r;
            if (r == 1.0) break;
        }
        if (width == 0) break;
    }
    best.interval = width == 0 ? best.window : snap(haystack, best.window, span);
    best.ratio = similarity_ratio(needle, haystack.substr(best.interval.start, best.interval.length()));
    return best;
}

AlignmentClass classify(double similarity, const GroundingConfig& cfg) {
    if (similarity >= cfg.fuzzy_threshold) return AlignmentClass::MatchFuzzy;
    if (similarity >= cfg.lesser_threshold) return AlignmentClass::MatchLesser;
    return AlignmentClass::NoMatch;
}

std::vector<GroundedExtraction> ground(const std::vector<RawExtraction>& extractions, const Document& doc,
                                       const std::vector<Chunk>& chunks, const GroundingConfig& cfg) {
    cfg.validate();
    std::map<int, const Chunk*> by_ordinal;
    for (const auto& c : chunks) by_ordinal[c.ordinal] = &c;

    const std::u32string_view text = doc.text;
    // Per chunk, per surface form: where the next search starts.
    std::map<std::pair<int, std::u32string>, std::size_t> cursor;

    std::vector<GroundedExtraction> out;
    out.reserve(extractions.size());
    for (const auto& raw : extractions) {
        const auto it = by_ordinal.find(raw.chunk_ordinal);
        if (it == by_ordinal.end())
            throw Error("extraction refers to unknown chunk " + std::to_string(raw.chunk_ordinal));
        const Chunk& chunk = *it->second;
        const std::u32string_view scope = text.substr(chunk.start, chunk.end - chunk.start);
        const std::u32string needle = utf8::decode(raw.text);

        GroundedExtraction g{raw, doc.id, {}, AlignmentClass::NoMatch, 0.0};
        auto& from = cursor.try_emplace({chunk.ordinal, needle}, 0).first->second;
        auto hit = exact_align(needle, scope, from);
        if (!hit && from > 0) hit = exact_align(needle, scope, 0);  // occurrences exhausted
        if (hit) {
            from = std::max(from, hit->end);
            g.interval = {chunk.start + hit->start, chunk.start + hit->end};
            g.alignment = AlignmentClass::MatchExact;
            g.similarity = 1.0;
        } else {
            const FuzzyMatch m = fuzzy_align(needle, text, chunk.interval(), cfg);
            g.interval = m.interval;
            g.similarity = m.ratio;
            g.alignment = classify(m.ratio, cfg);
        }
        out.push_back(std::move(g));
    }
    return out;
}

json to_json(const GroundedExtraction& g) {
    json j = to_json(g.raw);
    j["doc"] = g.document_id;
    j["start"] = g.interval.start;
    j["end"] = g.interval.end;
    j["alignment"] = to_string(g.alignment);
    j["similarity"] = g.similarity;
    return j;
}

GroundedExtraction grounded_from_json(const json& j, const SchemaSpec& schema) {
    GroundedExtraction g;
    g.raw = raw_extraction_from_json(j, schema, 0);
    try {
        g.document_id = j.at("doc").get<std::string>();
        g.interval = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
        const auto a = parse_alignment(j.at("alignment").get<std::string>());
        if (!a) throw SchemaViolation("grounding record", "unknown alignment class");
        g.alignment = *a;
        g.similarity = j.at("similarity").get<double>();
    } catch (const json::exception& e) {
        throw SchemaViolation("grounding record", e.what());
    }
    if (g.interval.start > g.interval.end) throw SchemaViolation("grounding record", "start > end");
    return g;
}

std::string write_grounding_jsonl(const std::vector<GroundedExtraction>& grounded) {
    std::string out;
    for (const auto& g : grounded) {
        out += to_json(g).dump();
        out += '\n';
    }
    return out;
}

std::vector<GroundedExtraction> read_grounding_jsonl(std::string_view text, const SchemaSpec& schema) {
    std::vector<GroundedExtraction> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(grounded_from_json(json::parse(line), schema));
        } catch (const json::parse_error& e) {
            throw SchemaViolation("line " + std::to_string(lineno), e.what());
        } catch (const SchemaViolation& e) {
            throw SchemaViolation("line " + std::to_string(lineno), e.what());
        }
    }
    return out;
}

}  // namespace opsgraph
