#include "opsgraph/schema.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace opsgraph {
namespace {

bool iequals(std::string_view a, std::string_view b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
    });
}

}  // namespace

std::string_view to_string(EntityClass c) {
    switch (c) {
        case EntityClass::Procedure: return "Procedure";
        case EntityClass::SequencedItem: return "Sequenced_Item";
        case EntityClass::Stakeholder: return "Stakeholder";
    }
    return "?";
}

std::string_view to_string(Predicate p) {
    switch (p) {
        case Predicate::HasNext: return "hasNext";
        case Predicate::HasStakeholder: return "hasStakeholder";
    }
    return "?";
}

std::optional<EntityClass> parse_entity_class(std::string_view label) {
    for (auto c : kAllClasses)
        if (iequals(label, to_string(c))) return c;
    return std::nullopt;
}

std::optional<Predicate> parse_predicate(std::string_view label) {
    for (auto p : kAllPredicates)
        if (iequals(label, to_string(p))) return p;
    return std::nullopt;
}

}  // namespace opsgraph
