#pragma once

#include <string>
#include <string_view>

namespace opsgraph::utf8 {

/// Decodes UTF-8 into Unicode scalar values. Throws InvalidEncoding.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view text);

}  // namespace opsgraph::utf8
