#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opsgraph/kgraph.hpp"

namespace opsgraph {

/// Input to the layering step: sequencable vertices and their hasNext edges.
struct LayoutGraph {
    std::vector<std::string> vertices;
    std::vector<std::pair<std::string, std::string>> edges;
    std::map<std::string, std::string> stakeholder_of;  // absent: unassigned
};

/// 1-based longest-path depth per vertex.
using DepthMap = std::map<std::string, int>;

/// Kahn-style traversal: sources start at depth 1 and every dequeued vertex
/// relaxes its successors to max(depth, depth[v] + 1). Throws CyclicGraph
/// listing the vertices left unprocessed.
DepthMap compute_depths(const std::vector<std::string>& vertices,
                        const std::vector<std::pair<std::string, std::string>>& edges);

struct Lane {
    std::string stakeholder_id;  // empty for the Unassigned lane
    std::string title;
    int index = 0;

    bool unassigned() const { return stakeholder_id.empty(); }
    bool operator==(const Lane&) const = default;
};

inline constexpr const char* kUnassignedTitle = "Unassigned";

/// Lanes in first-appearance order with duplicates dropped; the Unassigned
/// lane, when requested, comes last.
std::vector<Lane> assign_lanes(const std::vector<std::string>& stakeholders, bool include_unassigned);

struct NodePlacement {
    int lane = 0;
    int row = 0;   // equals the vertex depth
    int slot = 0;  // column within a crowded (lane, row) cell, ordered by id
    std::string label;
    std::vector<std::string> other_stakeholders;  // labels, for multi-owner nodes

    bool operator==(const NodePlacement&) const = default;
};

struct SwimlaneLayout {
    std::vector<Lane> lanes;
    std::map<std::string, NodePlacement> nodes;
    std::vector<std::pair<std::string, std::string>> arrows;
    std::map<std::string, std::vector<Provenance>> provenance_links;
    int row_count = 0;

    int slots_in_lane(int lane) const;
};

/// Builds the layout graph for `g`: a vertex with several stakeholders goes
/// to the lexicographically smallest one, and stakeholders are ordered by
/// their earliest source position.
LayoutGraph layout_graph(const KnowledgeGraph& g);

/// Throws CyclicGraph when the hasNext subgraph has a cycle.
SwimlaneLayout layout(const KnowledgeGraph& g);

struct RenderStyle {
    int box_width = 160;
    int box_height = 48;
    int row_pitch = 90;
    int lane_padding = 24;
    int slot_gap = 16;
    int header_height = 40;
    int lane_title_height = 32;
    int crossing_offset = 20;
    int font_size = 12;
    std::string title = "Process swimlane";
};

/// Byte-deterministic SVG. Each node carries
/// data-provenance="<doc>:<start>-<end> ..." and a matching <title> tooltip.
std::string render_svg(const SwimlaneLayout& layout, const RenderStyle& style = {});

}  // namespace opsgraph
