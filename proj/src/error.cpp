#include "opsgraph/error.hpp"

namespace opsgraph {

namespace {

std::string cycle_message(const std::vector<std::string>& vertices) {
    std::string msg = "hasNext cycle; unprocessed vertices:";
    for (const auto& v : vertices) msg += " " + v;
    return msg;
}

}  // namespace

CyclicGraph::CyclicGraph(std::vector<std::string> vertices)
    : Error(cycle_message(vertices)), vertices_(std::move(vertices)) {}

}  // namespace opsgraph
