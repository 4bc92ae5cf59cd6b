#pragma once

#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "opsgraph/corpus.hpp"
#include "opsgraph/grounding.hpp"
#include "opsgraph/schema.hpp"

namespace opsgraph {

struct Provenance {
    std::string document_id;
    Interval interval;

    auto operator<=>(const Provenance&) const = default;
};

/// Case-folds, collapses internal whitespace runs to one space and trims.
std::string normalize_id(std::string_view surface);

struct Entity {
    std::string id;
    std::string label;
    EntityClass cls = EntityClass::Procedure;
    std::vector<Provenance> provenance;  // sorted

    bool operator==(const Entity&) const = default;
};

struct EdgeKey {
    std::string subject;
    Predicate predicate = Predicate::HasNext;
    std::string object;

    auto operator<=>(const EdgeKey&) const = default;
};

struct Edge {
    EdgeKey key;
    std::vector<Provenance> provenance;  // sorted

    bool operator==(const Edge&) const = default;
};

struct KnowledgeGraph {
    std::map<std::string, Entity> entities;
    std::map<EdgeKey, Edge> edges;

    bool operator==(const KnowledgeGraph&) const = default;

    std::vector<EdgeKey> edges_with(Predicate p) const;
    /// Stakeholder ids attached to `id`, sorted.
    std::vector<std::string> stakeholders_of(const std::string& id) const;
};

struct BuildResult {
    KnowledgeGraph graph;
    std::vector<std::string> rejected;  // human-readable reasons, input order
};

/// NO_MATCH extractions are skipped. Entity classes are resolved from all
/// mentions at once, so the result does not depend on input order apart
/// from labels (first-seen surface form wins).
BuildResult build_graph(const std::vector<GroundedExtraction>& grounded);

struct ValidationReport {
    std::vector<std::vector<std::string>> cycles;  // hasNext cycles, each starting at its smallest id
    std::vector<std::string> unassigned;           // sequencable entities without a stakeholder
    std::vector<std::string> dangling;             // edges naming unknown entities
    std::vector<EdgeKey> broken_edges;             // removed by break_cycles

    bool has_cycles() const { return !cycles.empty(); }
    std::string to_text() const;
};

ValidationReport validate_graph(const KnowledgeGraph& g);

/// Repeatedly removes the lexicographically last edge of a remaining
/// hasNext cycle. Returns the removed edges in removal order.
std::vector<EdgeKey> break_cycles(KnowledgeGraph& g);

/// Canonical JSON: entities sorted by id, edges by (subject, predicate,
/// object), provenance sorted. Byte-deterministic.
std::string serialize(const KnowledgeGraph& g);

/// Throws SchemaViolation naming the offending location.
KnowledgeGraph deserialize(std::string_view bytes);

/// One N-Triples line per statement: class, label and relation triples.
std::string export_triples(const KnowledgeGraph& g);

}  // namespace opsgraph
