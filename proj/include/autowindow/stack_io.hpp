#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "autowindow/stack.hpp"

namespace autowindow {

inline constexpr int kStackFormatVersion = 1;

// Key/value document with every parameter in shortest round-trip decimal
// form, so parse_stack(serialize_stack(s)) == s bit for bit.
std::string serialize_stack(const AutoWindowStack& stack);

// Throws BadStackFile on any structural or numeric problem.
AutoWindowStack parse_stack(std::string_view text);

void save_stack(const AutoWindowStack& stack, const std::filesystem::path& path);
AutoWindowStack load_stack(const std::filesystem::path& path);

}  // namespace autowindow
