#pragma once

#include <optional>
#include <string_view>

namespace opsgraph {

enum class EntityClass { Procedure, SequencedItem, Stakeholder };
enum class Predicate { HasNext, HasStakeholder };

inline constexpr EntityClass kAllClasses[] = {EntityClass::Procedure, EntityClass::SequencedItem,
                                               EntityClass::Stakeholder};
inline constexpr Predicate kAllPredicates[] = {Predicate::HasNext, Predicate::HasStakeholder};

/// Attribute keys a record may carry; each one encodes a predicate.
inline constexpr std::string_view kStakeholderKey = "stakeholder";
inline constexpr std::string_view kNextKey = "next";

std::string_view to_string(EntityClass c);
std::string_view to_string(Predicate p);

/// Accepts the canonical labels ("Procedure", "Sequenced_Item", "Stakeholder"),
/// case-insensitively.
std::optional<EntityClass> parse_entity_class(std::string_view label);
std::optional<Predicate> parse_predicate(std::string_view label);

/// Procedures and sequenced items can take part in hasNext chains.
constexpr bool is_sequencable(EntityClass c) { return c != EntityClass::Stakeholder; }

}  // namespace opsgraph
