#include "cotkd/assets.hpp"

#include "cotkd/core.hpp"
#include "cotkd/error.hpp"

#include <fstream>
#include <sstream>

namespace cotkd::assets {

std::string_view get(std::string_view key) {
    const auto& table = embedded();
    auto it = table.find(key);
    if (it == table.end()) throw Error(Errc::Io, "no embedded asset '" + std::string(key) + "'");
    return it->second;
}

std::string load_text(const std::string& path, std::string_view key) {
    if (path.empty()) return std::string(get(key));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = trim(text.substr(pos, nl - pos));
        if (!line.empty() && line.front() != '#') out.emplace_back(line);
        pos = nl + 1;
    }
    return out;
}

}  // namespace cotkd::assets
