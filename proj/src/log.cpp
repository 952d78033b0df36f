#include "cotkd/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace cotkd::log {

namespace {
std::atomic<Level> g_level{Level::Info};
std::mutex g_mu;
}  // namespace

void set_level(Level l) { g_level.store(l); }
Level level() { return g_level.load(); }

void write(Level l, std::string_view msg) {
    if (l < g_level.load()) return;
    static constexpr const char* names[] = {"debug", "info", "warn", "error"};
    std::lock_guard<std::mutex> lock(g_mu);
    std::cerr << "[" << names[static_cast<int>(l)] << "] " << msg << '\n';
}

}  // namespace cotkd::log
