#pragma once

#include <iostream>
#include <sstream>

namespace embmf::log {

enum class Level { error = 0, info = 1, debug = 2 };

// Process-wide level, initialized once from EMBMF_LOG ({error,info,debug}).
Level level();
void set_level(Level lv);

namespace detail {
void emit(const char* tag, const std::string& msg);
}

template <typename... Args>
void error(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    detail::emit("error", os.str());
}

template <typename... Args>
void info(Args&&... args) {
    if (level() < Level::info) return;
    std::ostringstream os;
    (os << ... << args);
    detail::emit("info", os.str());
}

template <typename... Args>
void debug(Args&&... args) {
    if (level() < Level::debug) return;
    std::ostringstream os;
    (os << ... << args);
    detail::emit("debug", os.str());
}

}  // namespace embmf::log
