#include "opsgraph/swimlane.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "opsgraph/error.hpp"

namespace opsgraph {

DepthMap compute_depths(const std::vector<std::string>& vertices,
                        const std::vector<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, std::size_t> index;
    for (const auto& v : vertices) index.try_emplace(v, index.size());
    const std::size_t n = index.size();

    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::size_t> in_degree(n, 0);
    for (const auto& [from, to] : edges) {
        const auto f = index.find(from);
        const auto t = index.find(to);
        if (f == index.end() || t == index.end()) throw Error("edge endpoint not in vertex set: " + from + " -> " + to);
        succ[f->second].push_back(t->second);
        ++in_degree[t->second];
    }

    std::vector<int> depth(n, 0);
    std::deque<std::size_t> queue;
    for (std::size_t v = 0; v < n; ++v) {
        if (in_degree[v] == 0) {
            depth[v] = 1;
            queue.push_back(v);
        }
    }
    std::size_t processed = 0;
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        ++processed;
        for (std::size_t u : succ[v]) {
            depth[u] = std::max(depth[u], depth[v] + 1);
            if (--in_degree[u] == 0) queue.push_back(u);
        }
    }

    std::vector<std::string> names(n);
    for (const auto& [name, i] : index) names[i] = name;
    if (processed != n) {
        std::vector<std::string> stuck;
        for (std::size_t v = 0; v < n; ++v)
            if (in_degree[v] != 0) stuck.push_back(names[v]);
        std::sort(stuck.begin(), stuck.end());
        throw CyclicGraph(std::move(stuck));
    }

    DepthMap out;
    for (std::size_t v = 0; v < n; ++v) out.emplace(names[v], depth[v]);
    return out;
}

std::vector<Lane> assign_lanes(const std::vector<std::string>& stakeholders, bool include_unassigned) {
    std::vector<Lane> lanes;
    std::set<std::string> seen;
    for (const auto& s : stakeholders) {
        if (s.empty() || !seen.insert(s).second) continue;
        lanes.push_back({s, s, static_cast<int>(lanes.size())});
    }
    if (include_unassigned) lanes.push_back({"", kUnassignedTitle, static_cast<int>(lanes.size())});
    return lanes;
}

int SwimlaneLayout::slots_in_lane(int lane) const {
    int slots = 1;
    for (const auto& [id, n] : nodes)
        if (n.lane == lane) slots = std::max(slots, n.slot + 1);
    return slots;
}

LayoutGraph layout_graph(const KnowledgeGraph& g) {
    LayoutGraph lg;
    for (const auto& [id, e] : g.entities)
        if (is_sequencable(e.cls)) lg.vertices.push_back(id);
    for (const auto& key : g.edges_with(Predicate::HasNext)) lg.edges.emplace_back(key.subject, key.object);
    for (const auto& v : lg.vertices) {
        const auto owners = g.stakeholders_of(v);
        if (!owners.empty()) lg.stakeholder_of.emplace(v, owners.front());
    }
    return lg;
}

namespace {

// Stakeholders ordered by where they first appear in the source; curated
// stakeholders without provenance follow, by id.
std::vector<std::string> stakeholders_in_source_order(const KnowledgeGraph& g) {
    std::vector<std::pair<std::optional<Provenance>, std::string>> keyed;
    for (const auto& [id, e] : g.entities) {
        if (e.cls != EntityClass::Stakeholder) continue;
        std::optional<Provenance> first;
        if (!e.provenance.empty()) first = e.provenance.front();
        keyed.emplace_back(first, id);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first.has_value() != b.first.has_value()) return a.first.has_value();
        if (a.first && *a.first != *b.first) return *a.first < *b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    for (auto& [p, id] : keyed) out.push_back(std::move(id));
    return out;
}

}  // namespace

SwimlaneLayout layout(const KnowledgeGraph& g) {
    const LayoutGraph lg = layout_graph(g);
    SwimlaneLayout out;
    const DepthMap depth = lg.vertices.empty() ? DepthMap{} : compute_depths(lg.vertices, lg.edges);

    const bool any_unassigned = std::any_of(lg.vertices.begin(), lg.vertices.end(),
                                            [&](const std::string& v) { return !lg.stakeholder_of.contains(v); });
    out.lanes = assign_lanes(stakeholders_in_source_order(g), any_unassigned);
    std::map<std::string, int> lane_of;
    for (auto& lane : out.lanes) {
        if (!lane.unassigned()) lane.title = g.entities.at(lane.stakeholder_id).label;
        lane_of[lane.stakeholder_id] = lane.index;
    }

    // Vertices are visited in id order, so slots within a cell follow ids.
    std::map<std::pair<int, int>, int> occupancy;
    for (const auto& v : lg.vertices) {
        NodePlacement p;
        const auto owner = lg.stakeholder_of.find(v);
        p.lane = lane_of.at(owner == lg.stakeholder_of.end() ? std::string() : owner->second);
        p.row = depth.at(v);
        p.slot = occupancy[{p.lane, p.row}]++;
        p.label = g.entities.at(v).label;
        for (const auto& s : g.stakeholders_of(v))
            if (owner != lg.stakeholder_of.end() && s != owner->second) p.other_stakeholders.push_back(g.entities.at(s).label);
        out.row_count = std::max(out.row_count, p.row);
        out.nodes.emplace(v, std::move(p));
        out.provenance_links.emplace(v, g.entities.at(v).provenance);
    }
    out.arrows = lg.edges;
    return out;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string provenance_attr(const std::vector<Provenance>& prov) {
    std::string out;
    for (const auto& p : prov) {
        if (!out.empty()) out += ' ';
        out += p.document_id + ":" + std::to_string(p.interval.start) + "-" + std::to_string(p.interval.end);
    }
    return out;
}

}  // namespace

std::string render_svg(const SwimlaneLayout& layout, const RenderStyle& style) {
    const int lane_count = static_cast<int>(layout.lanes.size());
    std::vector<int> lane_x(lane_count + 1, 0);
    for (int l = 0; l < lane_count; ++l) {
        const int slots = layout.slots_in_lane(l);
        lane_x[l + 1] = lane_x[l] + 2 * style.lane_padding + slots * style.box_width + (slots - 1) * style.slot_gap;
    }
    const int body_top = style.header_height + style.lane_title_height;
    const int width = std::max(lane_x[lane_count], 2 * style.box_width);
    const int body_height =
        layout.row_count > 0 ? 2 * style.lane_padding + (layout.row_count - 1) * style.row_pitch + style.box_height : 0;
    const int height = (lane_count > 0 ? body_top : style.header_height) + body_height;

    auto node_origin = [&](const NodePlacement& p) {
        return std::pair{lane_x[p.lane] + style.lane_padding + p.slot * (style.box_width + style.slot_gap),
                         body_top + style.lane_padding + (p.row - 1) * style.row_pitch};
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\""
        << style.font_size << "\">\n";
    svg << "  <defs>\n"
        << "    <marker id=\"arrowhead\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" "
           "markerHeight=\"8\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333\"/></marker>\n"
        << "  </defs>\n";
    svg << "  <text class=\"header\" x=\"" << width / 2 << "\" y=\"" << style.header_height * 2 / 3
        << "\" text-anchor=\"middle\" font-size=\"" << style.font_size + 4 << "\">" << xml_escape(style.title)
        << "</text>\n";

    for (const auto& lane : layout.lanes) {
        const int x = lane_x[lane.index];
        const int w = lane_x[lane.index + 1] - x;
        svg << "  <g class=\"lane\" data-stakeholder=\"" << xml_escape(lane.stakeholder_id) << "\">\n";
        svg << "    <rect x=\"" << x << "\" y=\"" << style.header_height << "\" width=\"" << w << "\" height=\""
            << style.lane_title_height + body_height << "\" fill=\"" << (lane.index % 2 ? "#f4f6f8" : "#ffffff")
            << "\" stroke=\"#999\"/>\n";
        svg << "    <text x=\"" << x + w / 2 << "\" y=\"" << style.header_height + style.lane_title_height * 2 / 3
            << "\" text-anchor=\"middle\" font-weight=\"bold\">" << xml_escape(lane.title) << "</text>\n";
        svg << "  </g>\n";
    }

    for (const auto& [id, p] : layout.nodes) {
        const auto [x, y] = node_origin(p);
        const auto prov_it = layout.provenance_links.find(id);
        const std::string prov = prov_it == layout.provenance_links.end() ? "" : provenance_attr(prov_it->second);
        svg << "  <g class=\"node\" data-id=\"" << xml_escape(id) << "\" data-provenance=\"" << xml_escape(prov)
            << "\">\n";
        svg << "    <title>" << xml_escape(p.label) << (prov.empty() ? "" : " [" + xml_escape(prov) + "]")
            << "</title>\n";
        svg << "    <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << style.box_width << "\" height=\""
            << style.box_height << "\" rx=\"6\" fill=\"#dbe9f6\" stroke=\"#336\"/>\n";
        const int cx = x + style.box_width / 2;
        if (p.other_stakeholders.empty()) {
            svg << "    <text x=\"" << cx << "\" y=\"" << y + style.box_height / 2 + style.font_size / 3
                << "\" text-anchor=\"middle\">" << xml_escape(p.label) << "</text>\n";
        } else {
            std::string also = "also: ";
            for (std::size_t i = 0; i < p.other_stakeholders.size(); ++i)
                also += (i ? ", " : "") + p.other_stakeholders[i];
            svg << "    <text x=\"" << cx << "\" y=\"" << y + style.box_height / 2 - 2 << "\" text-anchor=\"middle\">"
                << xml_escape(p.label) << "</text>\n";
            svg << "    <text x=\"" << cx << "\" y=\"" << y + style.box_height / 2 + style.font_size
                << "\" text-anchor=\"middle\" font-size=\"" << style.font_size - 2 << "\">" << xml_escape(also)
                << "</text>\n";
        }
        svg << "  </g>\n";
    }

    for (const auto& [from, to] : layout.arrows) {
        const auto [fx, fy] = node_origin(layout.nodes.at(from));
        const auto [tx, ty] = node_origin(layout.nodes.at(to));
        const int sx = fx + style.box_width / 2;
        const int sy = fy + style.box_height;
        const int ex = tx + style.box_width / 2;
        svg << "  <polyline class=\"arrow\" data-from=\"" << xml_escape(from) << "\" data-to=\"" << xml_escape(to)
            << "\" points=\"" << sx << ',' << sy;
        if (sx != ex) {
            const int bend = sy + style.crossing_offset;
            svg << ' ' << sx << ',' << bend << ' ' << ex << ',' << bend;
        }
        svg << ' ' << ex << ',' << ty << "\" fill=\"none\" stroke=\"#333\" marker-end=\"url(#arrowhead)\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace opsgraph
