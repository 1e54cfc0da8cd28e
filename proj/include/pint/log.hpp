#pragma once

#include <string_view>

namespace pint {

// Warnings go to stderr unless silenced; the counter lets tests observe them.
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);
[[nodiscard]] long warning_count();

}  // namespace pint
