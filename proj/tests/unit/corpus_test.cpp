#include <gtest/gtest.h>

#include <random>

#include "opsgraph/corpus.hpp"
#include "opsgraph/error.hpp"
#include "opsgraph/utf8.hpp"

using namespace opsgraph;

TEST(LoadDocument, RemovesSingleMarker) {
    const Document doc = load_document("A\fB", "\f");
    EXPECT_EQ(utf8::encode(doc.text), "AB");
    EXPECT_EQ(doc.page_offsets, (std::vector<std::size_t>{0, 1}));
}

TEST(LoadDocument, NoMarkersIsOnePage) {
    const Document doc = load_document("hello", "\f");
    EXPECT_EQ(utf8::encode(doc.text), "hello");
    EXPECT_EQ(doc.page_offsets, (std::vector<std::size_t>{0}));
}

TEST(LoadDocument, OffsetsCountedAfterRemoval) {
    // "p1" | "p2" | "p3": each page is two characters once markers are gone.
    const Document doc = load_document("p1\fp2\fp3", "\f");
    EXPECT_EQ(doc.page_offsets, (std::vector<std::size_t>{0, 2, 4}));
    EXPECT_EQ(doc.length(), 6u);
}

TEST(LoadDocument, EmptyInputThrows) {
    EXPECT_THROW(load_document("", "\f"), EmptyDocument);
    EXPECT_THROW(load_document("\f\f", "\f"), EmptyDocument);
}

TEST(LoadDocument, UnifiesLineEndings) {
    const Document doc = load_document("a\r\nb\rc\n", "\f");
    EXPECT_EQ(utf8::encode(doc.text), "a\nb\nc\n");
}

TEST(LoadDocument, OffsetsAreScalarValuesNotBytes) {
    // "é" is two bytes in UTF-8 but one offset.
    const Document doc = load_document("\xC3\xA9t\xC3\xA9\fhiver", "\f");
    EXPECT_EQ(doc.page_offsets, (std::vector<std::size_t>{0, 3}));
    EXPECT_EQ(doc.slice({0, 3}), "\xC3\xA9t\xC3\xA9");
}

TEST(LoadDocument, LeadingTrailingAndRepeatedMarkersCollapse) {
    const Document doc = load_document("\fab\f\fcd\f", "\f");
    EXPECT_EQ(utf8::encode(doc.text), "abcd");
    EXPECT_EQ(doc.page_offsets, (std::vector<std::size_t>{0, 2}));
}

TEST(LoadDocument, MultiCharacterMarkerCannotReappear) {
    // Removing the inner "<p>" would splice a new "<p>" together.
    const Document doc = load_document("x<<p>p>y", "<p>");
    EXPECT_EQ(utf8::encode(doc.text), "xy");
    EXPECT_EQ(utf8::encode(doc.text).find("<p>"), std::string::npos);
}

TEST(LoadDocument, RejectsBadEncodingAndEmptyMarker) {
    EXPECT_THROW(load_document("\xFF\xFE", "\f"), InvalidEncoding);
    EXPECT_THROW(load_document("abc", ""), ConfigError);
}

TEST(Segment, PageLevelFollowsBoundaries) {
    const Document doc = load_document("p1\fp2\fp3", "\f", "d");
    const auto chunks = segment(doc, ChunkingMode::PageLevel);
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0], (Chunk{"d", 0, 2, 0}));
    EXPECT_EQ(chunks[1], (Chunk{"d", 2, 4, 1}));
    EXPECT_EQ(chunks[2], (Chunk{"d", 4, 6, 2}));
}

TEST(Segment, DocumentLevelIsOneChunk) {
    const Document doc = load_document("p1\fp2\fp3", "\f", "d");
    EXPECT_EQ(segment(doc, ChunkingMode::DocumentLevel), (std::vector<Chunk>{{"d", 0, 6, 0}}));
}

TEST(Segment, SinglePageUnderPageLevel) {
    const Document doc = load_document("hello", "\f", "d");
    EXPECT_EQ(segment(doc, ChunkingMode::PageLevel), (std::vector<Chunk>{{"d", 0, 5, 0}}));
}

TEST(Segment, ChunksTileTheDocument) {
    std::mt19937 rng(7);
    const std::string alphabet = "ab \n\f\xC3\xA9";
    for (int trial = 0; trial < 300; ++trial) {
        std::string raw = "x";
        std::uniform_int_distribution<int> len(0, 40), pick(0, 5);
        for (int i = len(rng); i > 0; --i) {
            const int k = pick(rng);
            raw += k == 5 ? std::string("\xC3\xA9") : std::string(1, alphabet[k]);
        }
        const Document doc = load_document(raw, "\f");
        for (std::size_t i = 1; i < doc.page_offsets.size(); ++i) ASSERT_LT(doc.page_offsets[i - 1], doc.page_offsets[i]);
        ASSERT_LT(doc.page_offsets.back(), doc.length());
        ASSERT_EQ(doc.text.find(U'\f'), std::u32string::npos);

        for (auto mode : {ChunkingMode::PageLevel, ChunkingMode::DocumentLevel}) {
            const auto chunks = segment(doc, mode);
            std::string joined;
            std::size_t expect_start = 0;
            for (std::size_t i = 0; i < chunks.size(); ++i) {
                ASSERT_EQ(chunks[i].ordinal, static_cast<int>(i));
                ASSERT_EQ(chunks[i].start, expect_start);
                ASSERT_LT(chunks[i].start, chunks[i].end);
                expect_start = chunks[i].end;
                joined += chunk_text(doc, chunks[i]);
            }
            ASSERT_EQ(expect_start, doc.length());
            ASSERT_EQ(joined, utf8::encode(doc.text));
        }
        ASSERT_EQ(load_document(raw, "\f").text, doc.text);
    }
}

TEST(ChunkingMode, ParsesCliNames) {
    EXPECT_EQ(parse_chunking_mode("page"), ChunkingMode::PageLevel);
    EXPECT_EQ(parse_chunking_mode("document"), ChunkingMode::DocumentLevel);
    EXPECT_THROW(parse_chunking_mode("sentence"), ConfigError);
}
