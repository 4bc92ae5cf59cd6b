#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "opsgraph/error.hpp"
#include "opsgraph/kgraph.hpp"

using namespace opsgraph;

namespace {

GroundedExtraction grounded(EntityClass cls, std::string text, std::map<std::string, std::string> attrs = {},
                            Interval iv = {0, 1}, AlignmentClass a = AlignmentClass::MatchExact) {
    return {{cls, std::move(text), std::move(attrs), 0}, "doc", iv, a, a == AlignmentClass::MatchExact ? 1.0 : 0.8};
}

KnowledgeGraph chain(const std::vector<std::pair<std::string, std::string>>& next_edges) {
    std::vector<GroundedExtraction> v;
    std::size_t pos = 0;
    for (const auto& [a, b] : next_edges) {
        v.push_back(grounded(EntityClass::Procedure, a, {{"next", b}}, {pos, pos + 1}));
        ++pos;
    }
    return build_graph(v).graph;
}

}  // namespace

TEST(NormalizeId, FoldsCaseAndWhitespace) {
    EXPECT_EQ(normalize_id("  Ground   Handler "), "ground handler");
    EXPECT_EQ(normalize_id("Off\tBlock\nTime"), "off block time");
    EXPECT_EQ(normalize_id("   "), "");
    EXPECT_EQ(normalize_id("De-icing"), "de-icing");
}

TEST(BuildGraph, MinimalGraph) {
    const auto r = build_graph({grounded(EntityClass::Procedure, "Boarding", {{"stakeholder", "Ground Handler"}})});
    const auto& g = r.graph;
    ASSERT_EQ(g.entities.size(), 2u);
    EXPECT_EQ(g.entities.at("boarding").cls, EntityClass::Procedure);
    EXPECT_EQ(g.entities.at("ground handler").cls, EntityClass::Stakeholder);
    EXPECT_EQ(g.entities.at("ground handler").label, "Ground Handler");
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_TRUE(g.edges.contains({"boarding", Predicate::HasStakeholder, "ground handler"}));
    EXPECT_TRUE(r.rejected.empty());
}

TEST(BuildGraph, DuplicateExtractionMergesProvenance) {
    const auto e = grounded(EntityClass::Procedure, "Boarding", {{"stakeholder", "Ground Handler"}}, {3, 11});
    const auto once = build_graph({e}).graph;
    const auto twice = build_graph({e, e}).graph;
    EXPECT_EQ(twice.entities.size(), once.entities.size());
    EXPECT_EQ(twice.edges.size(), once.edges.size());
    EXPECT_EQ(twice.entities.at("boarding").provenance.size(), 2u);
    EXPECT_EQ(twice.edges.begin()->second.provenance.size(), 2u);
}

TEST(BuildGraph, NormalizedIdentityFirstLabelWins) {
    const auto g = build_graph({grounded(EntityClass::Procedure, "boarding", {}, {0, 8}),
                                grounded(EntityClass::Procedure, "Boarding", {}, {20, 28})})
                       .graph;
    ASSERT_EQ(g.entities.size(), 1u);
    EXPECT_EQ(g.entities.at("boarding").label, "boarding");
    EXPECT_EQ(g.entities.at("boarding").provenance.size(), 2u);
}

TEST(BuildGraph, NextTargetDefaultsToSequencedItemAndUpgrades) {
    const auto a = grounded(EntityClass::SequencedItem, "Boarding", {{"next", "Pushback"}});
    const auto b = grounded(EntityClass::Procedure, "Pushback", {}, {5, 13});
    EXPECT_EQ(build_graph({a}).graph.entities.at("pushback").cls, EntityClass::SequencedItem);
    EXPECT_EQ(build_graph({a, b}).graph.entities.at("pushback").cls, EntityClass::Procedure);
    EXPECT_EQ(build_graph({b, a}).graph.entities.at("pushback").cls, EntityClass::Procedure);
    EXPECT_EQ(build_graph({a}).graph.entities.at("pushback").provenance, (std::vector<Provenance>{{"doc", {0, 1}}}));
}

TEST(BuildGraph, RejectsInvalidRecords) {
    const auto r = build_graph({
        grounded(EntityClass::Procedure, "A", {{"stakeholder", "  "}}),
        grounded(EntityClass::Procedure, "B", {{"next", "b"}}),         // self-loop after normalization
        grounded(EntityClass::Stakeholder, "ATC", {{"next", "A"}}),     // stakeholder in a chain
        grounded(EntityClass::Procedure, "C", {{"stakeholder", "A"}}),  // A is a procedure
    });
    EXPECT_EQ(r.rejected.size(), 4u);
    EXPECT_TRUE(r.graph.edges.empty());
}

TEST(BuildGraph, SkipsNoMatch) {
    const auto g = build_graph({grounded(EntityClass::Procedure, "Ghost", {{"next", "X"}}, {0, 1}, AlignmentClass::NoMatch)}).graph;
    EXPECT_TRUE(g.entities.empty());
}

TEST(BuildGraph, InvariantUnderPermutationExceptLabels) {
    std::mt19937 rng(17);
    const std::vector<std::string> steps = {"Boarding", "boarding", "Pushback", "Taxi  Out", "taxi out", "Landing"};
    const std::vector<std::string> owners = {"ATC", "atc", "Ground Handler", "Airline"};
    auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
    auto strip_labels = [](KnowledgeGraph g) {
        for (auto& [id, e] : g.entities) e.label = id;
        return g;
    };
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<GroundedExtraction> v;
        for (int i = std::uniform_int_distribution<int>(1, 10)(rng); i > 0; --i) {
            const Interval iv{static_cast<std::size_t>(i) * 10, static_cast<std::size_t>(i) * 10 + 4};
            switch (rng() % 3) {
                case 0: v.push_back(grounded(EntityClass::Procedure, pick(steps), {{"stakeholder", pick(owners)}}, iv)); break;
                case 1: v.push_back(grounded(EntityClass::SequencedItem, pick(steps), {{"next", pick(steps)}}, iv)); break;
                default: v.push_back(grounded(EntityClass::Stakeholder, pick(owners), {}, iv)); break;
            }
        }
        const auto base = strip_labels(build_graph(v).graph);
        std::shuffle(v.begin(), v.end(), rng);
        ASSERT_EQ(strip_labels(build_graph(v).graph), base);
    }
}

TEST(ValidateGraph, CleanChain) {
    auto g = chain({{"a", "b"}, {"b", "c"}});
    for (const auto* id : {"a", "b", "c"}) {
        g.entities.emplace(std::string("s"), Entity{"s", "S", EntityClass::Stakeholder, {{"doc", {0, 1}}}});
        g.edges.emplace(EdgeKey{id, Predicate::HasStakeholder, "s"}, Edge{{id, Predicate::HasStakeholder, "s"}, {{"doc", {0, 1}}}});
    }
    const auto report = validate_graph(g);
    EXPECT_TRUE(report.cycles.empty());
    EXPECT_TRUE(report.unassigned.empty());
    EXPECT_TRUE(report.dangling.empty());
}

TEST(ValidateGraph, TwoCycle) {
    const auto report = validate_graph(chain({{"a", "b"}, {"b", "a"}}));
    ASSERT_EQ(report.cycles.size(), 1u);
    EXPECT_EQ(report.cycles[0], (std::vector<std::string>{"a", "b"}));
}

TEST(ValidateGraph, ProcedureWithoutStakeholderIsWarned) {
    const auto g = build_graph({grounded(EntityClass::Procedure, "Lonely Step")}).graph;
    EXPECT_EQ(validate_graph(g).unassigned, (std::vector<std::string>{"lonely step"}));
}

TEST(ValidateGraph, ReportsDanglingReferences) {
    KnowledgeGraph g = chain({{"a", "b"}});
    g.entities.erase("b");
    EXPECT_EQ(validate_graph(g).dangling, (std::vector<std::string>{"b"}));
}

TEST(BreakCycles, RemovesLexicographicallyLastEdge) {
    auto g = chain({{"a", "b"}, {"b", "c"}, {"c", "a"}, {"c", "d"}, {"d", "e"}, {"e", "d"}});
    const auto report = validate_graph(g);
    EXPECT_EQ(report.cycles, (std::vector<std::vector<std::string>>{{"a", "b", "c"}, {"d", "e"}}));
    const auto removed = break_cycles(g);
    EXPECT_EQ(removed, (std::vector<EdgeKey>{{"c", Predicate::HasNext, "a"}, {"e", Predicate::HasNext, "d"}}));
    EXPECT_FALSE(validate_graph(g).has_cycles());
}

TEST(Serialize, EmptyGraph) {
    const std::string bytes = serialize({});
    EXPECT_EQ(bytes, "{\n  \"edges\": [],\n  \"entities\": [],\n  \"format\": \"opsgraph.kg\",\n  \"version\": 1\n}\n");
    EXPECT_EQ(deserialize(bytes), KnowledgeGraph{});
}

TEST(Serialize, ByteDeterministic) {
    const auto g = build_graph({grounded(EntityClass::Procedure, "Boarding", {{"stakeholder", "Ground Handler"}})}).graph;
    EXPECT_EQ(serialize(g), serialize(g));
    EXPECT_EQ(deserialize(serialize(g)), g);
}

TEST(Deserialize, ReportsLocation) {
    auto where = [](std::string_view bytes) {
        try {
            deserialize(bytes);
        } catch (const SchemaViolation& e) {
            return e.location();
        }
        return std::string("no error");
    };
    EXPECT_EQ(where(R"({"entities": [{"id": "a", "label": "A"}], "edges": []})"), "$.entities[0]");
    EXPECT_EQ(where(R"({"entities": [{"id": "a", "label": "B", "class": "Procedure", "provenance": []}], "edges": []})"),
              "$.entities[0].id");
    EXPECT_EQ(where(R"({"entities": [], "edges": [{"subject": "a", "predicate": "hasNext", "object": "b", "provenance": []}]})"),
              "$.edges[0]");
    EXPECT_EQ(where(R"({"entities": [{"id": "a", "label": "a", "class": "Gate", "provenance": []}], "edges": []})"),
              "$.entities[0].class");
    EXPECT_EQ(where(R"({"entities": [{"id": "a", "label": "a", "class": "Procedure", "provenance": [{"doc": "d", "start": -1, "end": 2}]}], "edges": []})"),
              "$.entities[0].provenance[0]");
    EXPECT_NE(where("{not json"), "no error");
    EXPECT_EQ(where(R"({"entities": [{"id": "a", "label": "a", "class": "Procedure", "provenance": []},
                                     {"id": "a", "label": "A", "class": "Procedure", "provenance": []}], "edges": []})"),
              "$.entities[1].id");
}

TEST(ExportTriples, OneTriplePerLine) {
    const auto g = build_graph({grounded(EntityClass::Procedure, "Off Block", {{"next", "Pushback"}, {"stakeholder", "Ground Handler"}})}).graph;
    const std::string nt = export_triples(g);
    EXPECT_NE(nt.find("<urn:opsgraph:entity:off%20block> <urn:opsgraph:schema#hasNext> <urn:opsgraph:entity:pushback> .\n"),
              std::string::npos);
    EXPECT_NE(nt.find("<urn:opsgraph:schema#hasStakeholder> <urn:opsgraph:entity:ground%20handler> .\n"), std::string::npos);
    EXPECT_NE(nt.find("<http://www.w3.org/2000/01/rdf-schema#label> \"Off Block\" .\n"), std::string::npos);
    EXPECT_EQ(std::count(nt.begin(), nt.end(), '\n'), 3 * 2 + 2);
}
