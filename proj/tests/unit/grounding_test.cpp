#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "opsgraph/error.hpp"
#include "opsgraph/grounding.hpp"
#include "opsgraph/utf8.hpp"

using namespace opsgraph;

namespace {

std::u32string u(std::string_view s) { return utf8::decode(s); }

}  // namespace

TEST(ExactAlign, FindsSubstring) {
    EXPECT_EQ(exact_align(u("off-block"), u("the off-block time"), 0), (Interval{4, 13}));
}

TEST(ExactAlign, AbsentNeedle) { EXPECT_FALSE(exact_align(u("xyz"), u("abc"), 0)); }

TEST(ExactAlign, SearchFromSkipsEarlierHit) { EXPECT_EQ(exact_align(u("ab"), u("abab"), 1), (Interval{2, 4})); }

TEST(ExactAlign, EmptyNeedleOrCursorPastEnd) {
    EXPECT_FALSE(exact_align(u(""), u("abc"), 0));
    EXPECT_FALSE(exact_align(u("a"), u("abc"), 9));
}

TEST(SimilarityRatio, Examples) {
    EXPECT_EQ(similarity_ratio(u("abcd"), u("abcd")), 1.0);
    EXPECT_EQ(similarity_ratio(u("abcd"), u("wxyz")), 0.0);
    EXPECT_EQ(similarity_ratio(u("abcd"), u("abce")), 0.75);
    EXPECT_EQ(similarity_ratio(u(""), u("")), 1.0);
    EXPECT_EQ(similarity_ratio(u("a"), u("")), 0.0);
}

TEST(SimilarityRatio, MatchesOracleOnHandPickedCase) {
    EXPECT_EQ(oracle::ro_ratio(u("abcd"), u("abce")), 0.75);
}

// Reference values from Python's difflib.SequenceMatcher(None, a, b,
// autojunk=False): (a, b, matched characters, ratio).
TEST(SimilarityRatio, AgreesWithDifflib) {
    struct Case {
        const char* a;
        const char* b;
        std::size_t matched;
        double ratio;
    };
    const Case cases[] = {
        {"off block", "off-block", 8, 0.8888888888888888},
        {"Target Off-Block Time", "Target Off Block Time", 20, 0.9523809523809523},
        {"Boarding", "Deboarding", 7, 0.7777777777777778},
        {"ground handler", "Ground Handler", 12, 0.8571428571428571},
        {"abxcd", "abcd", 4, 0.8888888888888888},
        {"aaaa", "aa", 2, 0.6666666666666666},
        {"the off-block time", "off block", 8, 0.5925925925925926},
        {"Pushback", "Push back", 8, 0.9411764705882353},
        {"Catering Service", "Cleaning Contractor", 8, 0.45714285714285713},
    };
    for (const auto& c : cases) {
        EXPECT_EQ(matched_characters(u(c.a), u(c.b)), c.matched) << c.a << " / " << c.b;
        EXPECT_DOUBLE_EQ(similarity_ratio(std::string_view(c.a), std::string_view(c.b)), c.ratio) << c.a;
    }
}

TEST(SimilarityRatio, EqualsBruteForceOracle) {
    std::mt19937 rng(3);
    for (const std::u32string alphabet : {std::u32string(U"ab"), std::u32string(U"abc "), std::u32string(U"abcdefgh")}) {
        for (int i = 0; i < 600; ++i) {
            const auto a = oracle::random_string(rng, 24, alphabet);
            const auto b = oracle::random_string(rng, 24, alphabet);
            ASSERT_EQ(similarity_ratio(a, b), oracle::ro_ratio(a, b));
            ASSERT_GE(similarity_ratio(a, b), 0.0);
            ASSERT_LE(similarity_ratio(a, b), 1.0);
        }
    }
}

TEST(FuzzyAlign, PerfectWindow) {
    const auto hay = u("xx Pushback yy");
    const auto m = fuzzy_align(u("Pushback"), hay, {0, hay.size()}, {});
    EXPECT_EQ(m.interval, (Interval{3, 11}));
    EXPECT_EQ(m.ratio, 1.0);
}

TEST(FuzzyAlign, ArgmaxMatchesExhaustiveScoring) {
    const auto needle = u("off block");
    const auto hay = u("the off-block time");
    // Oracle: score every window position independently.
    std::size_t best = 0;
    double best_ratio = -1;
    for (std::size_t s = 0; s + needle.size() <= hay.size(); ++s) {
        const double r = oracle::ro_ratio(needle, hay.substr(s, needle.size()));
        if (r > best_ratio) best_ratio = r, best = s;
    }
    const auto m = fuzzy_align(needle, hay, {0, hay.size()}, {});
    EXPECT_EQ(m.window, (Interval{best, best + needle.size()}));
    EXPECT_EQ(m.window_ratio, best_ratio);
    EXPECT_EQ(m.interval, (Interval{4, 13}));  // "off-block"
    EXPECT_DOUBLE_EQ(m.ratio, 16.0 / 18.0);
}

TEST(FuzzyAlign, HopelessNeedleIsNoMatch) {
    std::mt19937 rng(5);
    const auto hay = oracle::random_string(rng, 400, U"0123456789 ") + U"7";
    const auto needle = u("Boarding");
    double oracle_max = 0;
    for (std::size_t s = 0; s + needle.size() <= hay.size(); ++s)
        oracle_max = std::max(oracle_max, oracle::ro_ratio(needle, hay.substr(s, needle.size())));
    const GroundingConfig cfg;
    ASSERT_LT(oracle_max, cfg.lesser_threshold);
    const auto m = fuzzy_align(needle, hay, {0, hay.size()}, cfg);
    EXPECT_EQ(classify(m.ratio, cfg), AlignmentClass::NoMatch);
}

TEST(FuzzyAlign, SnapsToWordBoundaries) {
    const auto hay = u("then the Pushback begins");
    const auto m = fuzzy_align(u("Pushbak"), hay, {0, hay.size()}, {});
    EXPECT_EQ(m.window, (Interval{8, 15}));    // " Pushba" ties "Pushbac"; leftmost wins
    EXPECT_EQ(m.interval, (Interval{9, 17}));  // "Pushback"
    EXPECT_DOUBLE_EQ(m.ratio, 14.0 / 15.0);
}

TEST(FuzzyAlign, StaysInsideSpanAndRejectsEmptySpan) {
    const auto hay = u("alpha Pushback omega");
    const auto m = fuzzy_align(u("Pushback"), hay, {6, 11}, {});
    EXPECT_TRUE((Interval{6, 11}).contains(m.interval));
    EXPECT_THROW(fuzzy_align(u("x"), hay, {4, 4}, {}), NoCandidateSpan);
}

TEST(Classify, Thresholds) {
    const GroundingConfig cfg;
    EXPECT_EQ(classify(1.0, cfg), AlignmentClass::MatchFuzzy);
    EXPECT_EQ(classify(0.75, cfg), AlignmentClass::MatchFuzzy);
    EXPECT_EQ(classify(0.7499, cfg), AlignmentClass::MatchLesser);
    EXPECT_EQ(classify(0.35, cfg), AlignmentClass::MatchLesser);
    EXPECT_EQ(classify(0.3499, cfg), AlignmentClass::NoMatch);
}

TEST(Classify, RaisingFuzzyThresholdNeverPromotesLesser) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        GroundingConfig lo;
        lo.lesser_threshold = 0.01 + 0.5 * unit(rng);
        lo.fuzzy_threshold = lo.lesser_threshold + (1.0 - lo.lesser_threshold) * (0.01 + 0.98 * unit(rng));
        GroundingConfig hi = lo;
        hi.fuzzy_threshold = lo.fuzzy_threshold + (1.0 - lo.fuzzy_threshold) * unit(rng);
        const double s = unit(rng);
        if (classify(s, lo) == AlignmentClass::MatchLesser) ASSERT_NE(classify(s, hi), AlignmentClass::MatchFuzzy);
    }
}

TEST(GroundingConfig, Validation) {
    EXPECT_NO_THROW(GroundingConfig{}.validate());
    EXPECT_THROW((GroundingConfig{0.3, 0.5, 1}.validate()), ConfigError);
    EXPECT_THROW((GroundingConfig{1.2, 0.5, 1}.validate()), ConfigError);
    EXPECT_THROW((GroundingConfig{0.7, 0.0, 1}.validate()), ConfigError);
    EXPECT_THROW((GroundingConfig{0.7, 0.3, 0}.validate()), ConfigError);
}

namespace {

RawExtraction ex(std::string text, int chunk = 0) { return {EntityClass::Procedure, std::move(text), {}, chunk}; }

}  // namespace

TEST(Ground, VerbatimOnceIsExact) {
    const Document doc = load_document("Then Boarding starts.", "\f", "d");
    const auto g = ground({ex("Boarding")}, doc, segment(doc, ChunkingMode::PageLevel), {});
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].alignment, AlignmentClass::MatchExact);
    EXPECT_EQ(g[0].interval, (Interval{5, 13}));
    EXPECT_EQ(g[0].similarity, 1.0);
    EXPECT_EQ(g[0].document_id, "d");
}

TEST(Ground, RepeatedSurfaceFormsTakeSuccessiveOccurrences) {
    const Document doc = load_document("Boarding, then Boarding again.", "\f", "d");
    const auto g = ground({ex("Boarding"), ex("Boarding"), ex("Boarding")}, doc, segment(doc, ChunkingMode::PageLevel), {});
    EXPECT_EQ(g[0].interval, (Interval{0, 8}));
    EXPECT_EQ(g[1].interval, (Interval{15, 23}));
    EXPECT_EQ(g[2].interval, (Interval{0, 8}));  // exhausted, falls back to leftmost
}

TEST(Ground, NearDuplicateIsFuzzy) {
    // One substituted character in a 13-character phrase.
    const Document doc = load_document("The crew starts the Cabin Cleaning now.", "\f", "d");
    const auto needle = u("Cabin Claaning");
    const auto g = ground({ex("Cabin Claaning")}, doc, segment(doc, ChunkingMode::PageLevel), {});
    const double expected = oracle::ro_ratio(needle, u("Cabin Cleaning"));
    ASSERT_GE(expected, 0.75);
    EXPECT_EQ(g[0].alignment, AlignmentClass::MatchFuzzy);
    EXPECT_EQ(doc.slice(g[0].interval), "Cabin Cleaning");
    EXPECT_DOUBLE_EQ(g[0].similarity, expected);
}

TEST(Ground, SearchIsScopedToTheProducingChunk) {
    const Document doc = load_document("Boarding here.\fNothing relevant.", "\f", "d");
    const auto chunks = segment(doc, ChunkingMode::PageLevel);
    const auto g = ground({ex("Boarding", 1)}, doc, chunks, {});
    EXPECT_NE(g[0].alignment, AlignmentClass::MatchExact);
    EXPECT_TRUE(chunks[1].interval().contains(g[0].interval));
    EXPECT_THROW(ground({ex("Boarding", 7)}, doc, chunks, {}), Error);
}

TEST(Ground, SoundnessAndContainmentOnRandomText) {
    std::mt19937 rng(21);
    const std::u32string alphabet = U"abcde \n";
    for (int trial = 0; trial < 200; ++trial) {
        std::u32string raw = oracle::random_string(rng, 60, alphabet) + U"z";
        std::uniform_int_distribution<std::size_t> cut(0, raw.size());
        raw.insert(cut(rng), U"\f");
        const Document doc = load_document(utf8::encode(raw), "\f", "r");
        const auto chunks = segment(doc, ChunkingMode::PageLevel);
        std::vector<RawExtraction> extractions;
        for (int k = 0; k < 6; ++k) {
            const Chunk& c = chunks[std::uniform_int_distribution<std::size_t>(0, chunks.size() - 1)(rng)];
            std::uniform_int_distribution<std::size_t> pos(c.start, c.end - 1);
            std::size_t s = pos(rng), e = pos(rng);
            if (s > e) std::swap(s, e);
            std::string text = doc.slice({s, e + 1});
            if (k % 2) text += "q";  // forces the fuzzy path
            extractions.push_back(ex(text, c.ordinal));
        }
        const auto grounded = ground(extractions, doc, chunks, {});
        for (const auto& g : grounded) {
            ASSERT_TRUE(chunks[g.raw.chunk_ordinal].interval().contains(g.interval));
            if (g.alignment == AlignmentClass::MatchExact) {
                ASSERT_EQ(doc.slice(g.interval), g.raw.text);
                ASSERT_EQ(g.similarity, 1.0);
            }
            if (g.alignment == AlignmentClass::MatchFuzzy) ASSERT_GE(g.similarity, 0.75);
            if (g.alignment == AlignmentClass::MatchLesser) ASSERT_LT(g.similarity, 0.75);
        }
    }
}

TEST(GroundingJsonl, RoundTrips) {
    const Document doc = load_document("Boarding is performed by Ground Handler.", "\f", "d");
    std::vector<RawExtraction> v = {{EntityClass::Procedure, "Boarding", {{"stakeholder", "Ground Handler"}}, 0},
                                    {EntityClass::Stakeholder, "Ground Handlr", {}, 0}};
    const auto g = ground(v, doc, segment(doc, ChunkingMode::PageLevel), {});
    EXPECT_EQ(read_grounding_jsonl(write_grounding_jsonl(g), SchemaSpec::full()), g);
    EXPECT_THROW(read_grounding_jsonl(R"({"class":"Procedure","text":"x"})", SchemaSpec::full()), SchemaViolation);
}
