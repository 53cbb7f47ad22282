#pragma once

// Line/token helpers shared by the text formats.

#include <string>
#include <string_view>
#include <vector>

namespace ury::text {

/// Splits on '\n', strips '#' comments and surrounding whitespace. Blank
/// lines are kept (as empty strings) so line numbers stay meaningful.
std::vector<std::string> logical_lines(const std::string& text);

std::vector<std::string> tokens(std::string_view line);

bool starts_with(std::string_view s, std::string_view prefix);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace ury::text
