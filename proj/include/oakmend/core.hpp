#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oakmend {

// Bad input: malformed documents, dangling references, range violations.
// The CLI maps this to exit code 2.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Chat or embedding backend failure. CLI exit code 3.
struct backend_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Recoverable transport problem; the chat client retries these.
struct transport_error : backend_error {
    using backend_error::backend_error;
};

// A scripted mock had no entry for the prompt. Fatal by design: tests
// must account for every LLM call.
struct mock_miss_error : backend_error {
    using backend_error::backend_error;
};

using TypeId = std::string;
using PredicateId = std::string;
using EntityId = std::string;
using TripleId = std::string;
using ChunkId = std::string;

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Trim and collapse internal whitespace runs to single spaces.
inline std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

// Case-insensitive, whitespace-normalized form used for entity identity.
inline std::string normalize_label(std::string_view s) {
    std::string out = collapse_ws(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Digest of a prompt after whitespace normalization; keys scripted mocks.
inline std::string prompt_digest(std::string_view prompt) {
    return hex64(fnv1a64(collapse_ws(prompt)));
}

template <typename Container>
std::string join(const Container& items, std::string_view sep) {
    std::string out;
    bool first = true;
    for (const auto& item : items) {
        if (!first) out += sep;
        first = false;
        out += item;
    }
    return out;
}

// "{a, b, c}" rendering for type sets in violation explanations.
inline std::string brace_set(const std::set<std::string>& items) {
    return "{" + join(items, ", ") + "}";
}

inline bool contains_word(std::string_view haystack, std::string_view needle) {
    return lowercase(haystack).find(lowercase(needle)) != std::string::npos;
}

}  // namespace oakmend
