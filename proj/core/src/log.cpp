#include "embmf/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

namespace embmf::log {

namespace {

Level parse_env() {
    const char* raw = std::getenv("EMBMF_LOG");
    if (!raw) return Level::info;
    std::string v(raw);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::info;
}

Level& state() {
    static Level lv = parse_env();
    return lv;
}

std::mutex& mu() {
    static std::mutex m;
    return m;
}

}  // namespace

Level level() { return state(); }

void set_level(Level lv) { state() = lv; }

namespace detail {

void emit(const char* tag, const std::string& msg) {
    std::lock_guard<std::mutex> lock(mu());
    std::cerr << "[embmf " << tag << "] " << msg << "\n";
}

}  // namespace detail

}  // namespace embmf::log
