#pragma once

#include <cstddef>
#include <string_view>

namespace reactree {

// Deterministic stand-in for a model tokenizer: ceil(characters / 4).
// Used for prompt budgeting and usage statistics.
inline int estimate_tokens(std::string_view text) {
    return static_cast<int>((text.size() + 3) / 4);
}

}  // namespace reactree
