#include "opsgraph/kgraph.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "opsgraph/error.hpp"
#include "opsgraph/utf8.hpp"

namespace opsgraph {

using nlohmann::json;

std::string normalize_id(std::string_view surface) {
    std::u32string out;
    bool pending_space = false;
    for (char32_t c : utf8::decode(surface)) {
        const bool space = c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
                           c == 0xA0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A);
        if (space) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(U' ');
        pending_space = false;
        out.push_back(c >= U'A' && c <= U'Z' ? c + (U'a' - U'A') : c);
    }
    return utf8::encode(out);
}

std::vector<EdgeKey> KnowledgeGraph::edges_with(Predicate p) const {
    std::vector<EdgeKey> out;
    for (const auto& [key, edge] : edges)
        if (key.predicate == p) out.push_back(key);
    return out;
}

std::vector<std::string> KnowledgeGraph::stakeholders_of(const std::string& id) const {
    std::vector<std::string> out;
    for (auto it = edges.lower_bound(EdgeKey{id, Predicate::HasStakeholder, ""});
         it != edges.end() && it->first.subject == id && it->first.predicate == Predicate::HasStakeholder; ++it)
        out.push_back(it->first.object);
    return out;
}

// ---------------------------------------------------------------------------
// Construction

namespace {

// Lower rank wins when mentions disagree about an entity's class.
enum class Vote { ExplicitProcedure, ExplicitSequenced, ExplicitStakeholder, ImpliedStakeholder, ImpliedSequenced };

Vote explicit_vote(EntityClass c) {
    switch (c) {
        case EntityClass::Procedure: return Vote::ExplicitProcedure;
        case EntityClass::SequencedItem: return Vote::ExplicitSequenced;
        case EntityClass::Stakeholder: return Vote::ExplicitStakeholder;
    }
    return Vote::ImpliedSequenced;
}

EntityClass class_of(Vote v) {
    switch (v) {
        case Vote::ExplicitProcedure: return EntityClass::Procedure;
        case Vote::ExplicitSequenced:
        case Vote::ImpliedSequenced: return EntityClass::SequencedItem;
        case Vote::ExplicitStakeholder:
        case Vote::ImpliedStakeholder: return EntityClass::Stakeholder;
    }
    return EntityClass::SequencedItem;
}

struct Pending {
    std::string label;
    Vote vote = Vote::ImpliedSequenced;
    std::vector<Provenance> explicit_prov;
    std::vector<Provenance> implied_prov;
};

std::string describe(const GroundedExtraction& g) {
    return std::string(to_string(g.raw.extraction_class)) + " '" + g.raw.text + "' @" + g.document_id + ":" +
           std::to_string(g.interval.start) + "-" + std::to_string(g.interval.end);
}

}  // namespace

BuildResult build_graph(const std::vector<GroundedExtraction>& grounded) {
    BuildResult result;
    std::map<std::string, Pending> pending;

    auto mention = [&](const std::string& surface, Vote vote, const Provenance& prov, bool is_explicit) {
        const std::string id = normalize_id(surface);
        auto [it, inserted] = pending.try_emplace(id);
        if (inserted) {
            it->second.label = surface;
            it->second.vote = vote;
        } else {
            it->second.vote = std::min(it->second.vote, vote);
        }
        (is_explicit ? it->second.explicit_prov : it->second.implied_prov).push_back(prov);
    };

    std::vector<const GroundedExtraction*> usable;
    for (const auto& g : grounded) {
        if (g.alignment == AlignmentClass::NoMatch) continue;
        if (normalize_id(g.raw.text).empty()) {
            result.rejected.push_back(describe(g) + ": blank surface form");
            continue;
        }
        const Provenance prov{g.document_id, g.interval};
        mention(g.raw.text, explicit_vote(g.raw.extraction_class), prov, true);
        for (const auto& [key, value] : g.raw.attributes) {
            if (normalize_id(value).empty()) {
                result.rejected.push_back(describe(g) + ": attribute '" + key + "' is empty");
                continue;
            }
            if (key == kStakeholderKey) mention(value, Vote::ImpliedStakeholder, prov, false);
            else if (key == kNextKey) mention(value, Vote::ImpliedSequenced, prov, false);
        }
        usable.push_back(&g);
    }

    for (auto& [id, p] : pending) {
        Entity e{id, p.label, class_of(p.vote), p.explicit_prov.empty() ? p.implied_prov : p.explicit_prov};
        std::sort(e.provenance.begin(), e.provenance.end());
        result.graph.entities.emplace(id, std::move(e));
    }

    auto& entities = result.graph.entities;
    for (const GroundedExtraction* g : usable) {
        const std::string subject = normalize_id(g->raw.text);
        const EntityClass subject_cls = entities.at(subject).cls;
        const Provenance prov{g->document_id, g->interval};
        for (const auto& [key, value] : g->raw.attributes) {
            const std::string object = normalize_id(value);
            if (object.empty()) continue;  // already rejected above
            const EntityClass object_cls = entities.at(object).cls;
            std::optional<Predicate> pred;
            std::string why;
            if (key == kStakeholderKey) {
                if (!is_sequencable(subject_cls)) why = "hasStakeholder subject is a Stakeholder";
                else if (object_cls != EntityClass::Stakeholder) why = "hasStakeholder object '" + object + "' is not a Stakeholder";
                else pred = Predicate::HasStakeholder;
            } else if (key == kNextKey) {
                if (!is_sequencable(subject_cls) || !is_sequencable(object_cls)) why = "hasNext endpoint is a Stakeholder";
                else if (subject == object) why = "hasNext self-loop";
                else pred = Predicate::HasNext;
            }
            if (!pred) {
                result.rejected.push_back(describe(*g) + ": " + why);
                continue;
            }
            EdgeKey ek{subject, *pred, object};
            auto& edge = result.graph.edges.try_emplace(ek, Edge{ek, {}}).first->second;
            edge.provenance.push_back(prov);
        }
    }
    for (auto& [key, edge] : result.graph.edges) std::sort(edge.provenance.begin(), edge.provenance.end());
    return result;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

Adjacency next_adjacency(const KnowledgeGraph& g) {
    Adjacency adj;
    for (const auto& [key, edge] : g.edges)
        if (key.predicate == Predicate::HasNext) adj[key.subject].push_back(key.object);
    return adj;  // successor lists come out sorted because edges are
}

// Tarjan's SCC, iterative over sorted vertex ids.
std::vector<std::vector<std::string>> strongly_connected(const std::vector<std::string>& vertices, const Adjacency& adj) {
    std::map<std::string, int> index, low;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> out;
    int counter = 0;
    static const std::vector<std::string> none;

    for (const auto& root : vertices) {
        if (index.contains(root)) continue;
        std::vector<std::pair<std::string, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack.insert(root);
        while (!call.empty()) {
            auto& [v, next_child] = call.back();
            const auto found = adj.find(v);
            const auto& succ = found == adj.end() ? none : found->second;
            if (next_child < succ.size()) {
                const std::string w = succ[next_child++];
                if (!index.contains(w)) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack.insert(w);
                    call.emplace_back(w, 0);
                } else if (on_stack.contains(w)) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<std::string> comp;
                std::string w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack.erase(w);
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
            const std::string finished = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
        }
    }
    return out;
}

// Shortest cycle through the smallest vertex of a strongly connected set.
std::vector<std::string> cycle_in(const std::vector<std::string>& comp, const Adjacency& adj) {
    const std::set<std::string> members(comp.begin(), comp.end());
    const std::string& start = comp.front();
    std::map<std::string, std::string> parent;
    std::vector<std::string> frontier{start};
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& v : frontier) {
            const auto found = adj.find(v);
            if (found == adj.end()) continue;
            for (const auto& w : found->second) {
                if (!members.contains(w)) continue;
                if (w == start) {
                    std::vector<std::string> cycle{v};
                    while (cycle.back() != start) cycle.push_back(parent.at(cycle.back()));
                    std::reverse(cycle.begin(), cycle.end());
                    return cycle;
                }
                if (parent.try_emplace(w, v).second) next.push_back(w);
            }
        }
        frontier = std::move(next);
    }
    return comp;
}

std::vector<std::vector<std::string>> find_cycles(const KnowledgeGraph& g) {
    const Adjacency adj = next_adjacency(g);
    std::vector<std::string> vertices;
    for (const auto& [id, e] : g.entities) vertices.push_back(id);
    std::vector<std::vector<std::string>> cycles;
    for (const auto& comp : strongly_connected(vertices, adj)) {
        const bool self_loop = comp.size() == 1 && g.edges.contains({comp[0], Predicate::HasNext, comp[0]});
        if (comp.size() > 1 || self_loop) cycles.push_back(cycle_in(comp, adj));
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

}  // namespace

ValidationReport validate_graph(const KnowledgeGraph& g) {
    ValidationReport report;
    for (const auto& [key, edge] : g.edges) {
        for (const auto* end : {&key.subject, &key.object})
            if (!g.entities.contains(*end)) report.dangling.push_back(*end);
    }
    std::sort(report.dangling.begin(), report.dangling.end());
    report.dangling.erase(std::unique(report.dangling.begin(), report.dangling.end()), report.dangling.end());

    for (const auto& [id, e] : g.entities)
        if (is_sequencable(e.cls) && g.stakeholders_of(id).empty()) report.unassigned.push_back(id);
    report.cycles = find_cycles(g);
    return report;
}

std::vector<EdgeKey> break_cycles(KnowledgeGraph& g) {
    std::vector<EdgeKey> removed;
    for (auto cycles = find_cycles(g); !cycles.empty(); cycles = find_cycles(g)) {
        const auto& cycle = cycles.front();
        std::optional<EdgeKey> last;
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            EdgeKey k{cycle[i], Predicate::HasNext, cycle[(i + 1) % cycle.size()]};
            if (!last || *last < k) last = k;
        }
        g.edges.erase(*last);
        removed.push_back(*last);
    }
    return removed;
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    out << "cycles: " << cycles.size() << '\n';
    for (const auto& c : cycles) {
        out << "  cycle:";
        for (const auto& v : c) out << ' ' << v << " ->";
        out << ' ' << c.front() << '\n';
    }
    out << "broken edges: " << broken_edges.size() << '\n';
    for (const auto& k : broken_edges) out << "  removed: " << k.subject << " hasNext " << k.object << '\n';
    out << "unassigned: " << unassigned.size() << '\n';
    for (const auto& u : unassigned) out << "  warning: no stakeholder for " << u << '\n';
    out << "dangling: " << dangling.size() << '\n';
    for (const auto& d : dangling) out << "  error: dangling reference " << d << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::string_view kFormat = "opsgraph.kg";
constexpr int kVersion = 1;

json provenance_json(const std::vector<Provenance>& prov) {
    json arr = json::array();
    for (const auto& p : prov) arr.push_back({{"doc", p.document_id}, {"start", p.interval.start}, {"end", p.interval.end}});
    return arr;
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw SchemaViolation(where, std::string("missing field '") + key + "'");
    return obj.at(key);
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string()) throw SchemaViolation(where + "." + key, "expected a string");
    return v.get<std::string>();
}

std::vector<Provenance> provenance_from(const json& obj, const std::string& where) {
    const json& arr = field(obj, "provenance", where);
    if (!arr.is_array()) throw SchemaViolation(where + ".provenance", "expected an array");
    std::vector<Provenance> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = where + ".provenance[" + std::to_string(i) + "]";
        const json& s = field(arr[i], "start", at);
        const json& e = field(arr[i], "end", at);
        if (!s.is_number_unsigned() || !e.is_number_unsigned()) throw SchemaViolation(at, "offsets must be non-negative integers");
        Provenance p{string_field(arr[i], "doc", at), {s.get<std::size_t>(), e.get<std::size_t>()}};
        if (p.interval.start > p.interval.end) throw SchemaViolation(at, "start > end");
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::string serialize(const KnowledgeGraph& g) {
    json entities = json::array();
    for (const auto& [id, e] : g.entities)
        entities.push_back({{"id", e.id}, {"label", e.label}, {"class", to_string(e.cls)}, {"provenance", provenance_json(e.provenance)}});
    json edges = json::array();
    for (const auto& [key, e] : g.edges)
        edges.push_back({{"subject", key.subject}, {"predicate", to_string(key.predicate)}, {"object", key.object},
                         {"provenance", provenance_json(e.provenance)}});
    const json doc = {{"format", kFormat}, {"version", kVersion}, {"entities", entities}, {"edges", edges}};
    return doc.dump(2) + "\n";
}

KnowledgeGraph deserialize(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw SchemaViolation("byte " + std::to_string(e.byte), e.what());
    }
    if (!doc.is_object()) throw SchemaViolation("$", "expected an object");
    if (doc.contains("format") && doc["format"] != kFormat) throw SchemaViolation("$.format", "unknown format");
    if (doc.contains("version") && doc["version"] != kVersion) throw SchemaViolation("$.version", "unsupported version");

    KnowledgeGraph g;
    const json& entities = field(doc, "entities", "$");
    if (!entities.is_array()) throw SchemaViolation("$.entities", "expected an array");
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const std::string where = "$.entities[" + std::to_string(i) + "]";
        Entity e;
        e.id = string_field(entities[i], "id", where);
        e.label = string_field(entities[i], "label", where);
        const auto cls = parse_entity_class(string_field(entities[i], "class", where));
        if (!cls) throw SchemaViolation(where + ".class", "unknown class");
        e.cls = *cls;
        if (e.id.empty() || normalize_id(e.label) != e.id)
            throw SchemaViolation(where + ".id", "id must equal the normalized label");
        e.provenance = provenance_from(entities[i], where);
        if (!g.entities.emplace(e.id, e).second) throw SchemaViolation(where + ".id", "duplicate entity '" + e.id + "'");
    }

    const json& edges = field(doc, "edges", "$");
    if (!edges.is_array()) throw SchemaViolation("$.edges", "expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string where = "$.edges[" + std::to_string(i) + "]";
        EdgeKey key;
        key.subject = string_field(edges[i], "subject", where);
        key.object = string_field(edges[i], "object", where);
        const auto pred = parse_predicate(string_field(edges[i], "predicate", where));
        if (!pred) throw SchemaViolation(where + ".predicate", "unknown predicate");
        key.predicate = *pred;
        for (const auto* end : {&key.subject, &key.object})
            if (!g.entities.contains(*end)) throw SchemaViolation(where, "dangling reference '" + *end + "'");
        const EntityClass s = g.entities.at(key.subject).cls;
        const EntityClass o = g.entities.at(key.object).cls;
        if (key.predicate == Predicate::HasStakeholder && (!is_sequencable(s) || o != EntityClass::Stakeholder))
            throw SchemaViolation(where, "hasStakeholder must link a sequencable entity to a Stakeholder");
        if (key.predicate == Predicate::HasNext && (!is_sequencable(s) || !is_sequencable(o)))
            throw SchemaViolation(where, "hasNext endpoints must be sequencable");
        if (key.predicate == Predicate::HasNext && key.subject == key.object)
            throw SchemaViolation(where, "hasNext self-loop");
        Edge edge{key, provenance_from(edges[i], where)};
        if (!g.edges.emplace(key, std::move(edge)).second) throw SchemaViolation(where, "duplicate edge");
    }
    return g;
}

namespace {

std::string iri_escape(std::string_view s) {
    std::ostringstream out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') out << c;
        else out << '%' << std::uppercase << std::hex << std::setw(2) << std::setfill('0') << int(c) << std::dec;
    }
    return out.str();
}

std::string literal_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr std::string_view kEntityBase = "urn:opsgraph:entity:";
constexpr std::string_view kSchemaBase = "urn:opsgraph:schema#";

}  // namespace

std::string export_triples(const KnowledgeGraph& g) {
    std::ostringstream out;
    auto node = [](const std::string& id) { return "<" + std::string(kEntityBase) + iri_escape(id) + ">"; };
    for (const auto& [id, e] : g.entities) {
        out << node(id) << " <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <" << kSchemaBase << to_string(e.cls) << "> .\n";
        out << node(id) << " <http://www.w3.org/2000/01/rdf-schema#label> \"" << literal_escape(e.label) << "\" .\n";
    }
    for (const auto& [key, e] : g.edges)
        out << node(key.subject) << " <" << kSchemaBase << to_string(key.predicate) << "> " << node(key.object) << " .\n";
    return out.str();
}

}  // namespace opsgraph
