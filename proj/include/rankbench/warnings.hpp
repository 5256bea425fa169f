#pragma once

#include <string>
#include <vector>

namespace rankbench {

// Collects non-fatal diagnostics (degenerate inputs, dropped columns, ...).
// Callers that do not care pass nullptr.
struct Warnings {
    std::vector<std::string> messages;

    void add(std::string msg) { messages.push_back(std::move(msg)); }
    bool empty() const { return messages.empty(); }
};

inline void warn(Warnings* w, std::string msg) {
    if (w != nullptr) w->add(std::move(msg));
}

}  // namespace rankbench
