#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cotkd::assets {

/// Files under data/ compiled into the library, keyed by relative path
/// (e.g. "pools/names.txt").
const std::map<std::string, std::string_view, std::less<>>& embedded();

/// Contents of an embedded asset. Throws Error(Io) if absent.
std::string_view get(std::string_view key);

/// Reads `path` if nonempty, otherwise returns the embedded asset `key`.
std::string load_text(const std::string& path, std::string_view key);

/// Non-empty, non-comment ('#') lines, trimmed.
std::vector<std::string> lines(std::string_view text);

}  // namespace cotkd::assets
