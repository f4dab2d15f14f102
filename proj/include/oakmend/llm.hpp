#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "oakmend/core.hpp"

namespace oakmend {

enum class Stage { extract, canon_type, canon_pred, dedup, mend_triple, mend_qualifier };
inline constexpr size_t kStageCount = 6;

inline const char* to_string(Stage s) {
    switch (s) {
        case Stage::extract: return "extract";
        case Stage::canon_type: return "canon_type";
        case Stage::canon_pred: return "canon_pred";
        case Stage::dedup: return "dedup";
        case Stage::mend_triple: return "mend_triple";
        case Stage::mend_qualifier: return "mend_qualifier";
    }
    return "?";
}

inline Stage stage_from_string(const std::string& s) {
    for (size_t i = 0; i < kStageCount; ++i)
        if (s == to_string(static_cast<Stage>(i))) return static_cast<Stage>(i);
    throw data_error("unknown stage '" + s + "'");
}

struct ChatExchange {
    Stage stage;
    std::string prompt;
    std::string response;
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
};

inline uint64_t whitespace_tokens(std::string_view text) {
    uint64_t n = 0;
    bool in_tok = false;
    for (char c : text) {
        bool sp = is_space(c);
        if (!sp && !in_tok) ++n;
        in_tok = !sp;
    }
    return n;
}

// Per-stage prompt/completion accumulators. Atomic, so concurrent chat
// calls may record without external locking.
class TokenLedger {
public:
    struct Snapshot {
        uint64_t prompt_tokens = 0;
        uint64_t completion_tokens = 0;
        uint64_t calls = 0;
    };

    TokenLedger() = default;
    TokenLedger(const TokenLedger& other) { copy_from(other); }
    TokenLedger& operator=(const TokenLedger& other) {
        if (this != &other) copy_from(other);
        return *this;
    }

    void record(Stage s, uint64_t prompt, uint64_t completion) {
        auto& c = counters_[static_cast<size_t>(s)];
        c.prompt.fetch_add(prompt, std::memory_order_relaxed);
        c.completion.fetch_add(completion, std::memory_order_relaxed);
        c.calls.fetch_add(1, std::memory_order_relaxed);
    }

    Snapshot stage(Stage s) const {
        const auto& c = counters_[static_cast<size_t>(s)];
        return {c.prompt.load(), c.completion.load(), c.calls.load()};
    }

    Snapshot total() const {
        Snapshot t;
        for (size_t i = 0; i < kStageCount; ++i) {
            Snapshot s = stage(static_cast<Stage>(i));
            t.prompt_tokens += s.prompt_tokens;
            t.completion_tokens += s.completion_tokens;
            t.calls += s.calls;
        }
        return t;
    }

    nlohmann::json to_json() const {
        nlohmann::json stages = nlohmann::json::object();
        for (size_t i = 0; i < kStageCount; ++i) {
            Snapshot s = stage(static_cast<Stage>(i));
            stages[to_string(static_cast<Stage>(i))] = {{"prompt_tokens", s.prompt_tokens},
                                                        {"completion_tokens", s.completion_tokens},
                                                        {"calls", s.calls}};
        }
        Snapshot t = total();
        return {{"stages", stages},
                {"total", {{"prompt_tokens", t.prompt_tokens},
                           {"completion_tokens", t.completion_tokens},
                           {"calls", t.calls}}}};
    }

    static TokenLedger from_json(const nlohmann::json& j) {
        TokenLedger lg;
        for (size_t i = 0; i < kStageCount; ++i) {
            const char* name = to_string(static_cast<Stage>(i));
            if (!j.contains("stages") || !j.at("stages").contains(name)) continue;
            const auto& s = j.at("stages").at(name);
            auto& c = lg.counters_[i];
            c.prompt = s.value("prompt_tokens", 0ull);
            c.completion = s.value("completion_tokens", 0ull);
            c.calls = s.value("calls", 0ull);
        }
        return lg;
    }

private:
    struct Counters {
        std::atomic<uint64_t> prompt{0};
        std::atomic<uint64_t> completion{0};
        std::atomic<uint64_t> calls{0};
    };
    std::array<Counters, kStageCount> counters_;

    void copy_from(const TokenLedger& other) {
        for (size_t i = 0; i < kStageCount; ++i) {
            counters_[i].prompt = other.counters_[i].prompt.load();
            counters_[i].completion = other.counters_[i].completion.load();
            counters_[i].calls = other.counters_[i].calls.load();
        }
    }
};

// Prompt tokens are cheaper than completion tokens; the ledger cost
// weights them accordingly (default ratio 1/4).
inline double weighted_cost(uint64_t prompt_tokens, uint64_t completion_tokens,
                            double prompt_weight = 0.25) {
    if (prompt_weight <= 0) throw data_error("prompt_weight must be > 0");
    return static_cast<double>(prompt_tokens) * prompt_weight +
           static_cast<double>(completion_tokens);
}

inline double weighted_cost(const TokenLedger& ledger, double prompt_weight = 0.25) {
    TokenLedger::Snapshot t = ledger.total();
    return weighted_cost(t.prompt_tokens, t.completion_tokens, prompt_weight);
}

// ---- embeddings ----

using Embedding = std::vector<double>;

inline double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw data_error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()) + ")");
    double dot = 0;
    for (size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    return dot;
}

inline void l2_normalize(Embedding& v) {
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0)
        for (double& x : v) x /= norm;
}

class EmbedBackend {
public:
    virtual ~EmbedBackend() = default;
    // Must be deterministic per backend and return a unit vector.
    virtual Embedding embed_raw(const std::string& text) = 0;
};

// Character-trigram hashing into a 256-dimension unit vector. Bit-stable
// across runs and platforms, order-sensitive, and similar strings score
// high; used as the test-time embedding backend.
class TrigramEmbedder : public EmbedBackend {
public:
    static constexpr size_t kDim = 256;

    Embedding embed_raw(const std::string& text) override {
        Embedding v(kDim, 0.0);
        std::string s = lowercase(text);
        if (s.size() < 3) {
            v[fnv1a64(s) % kDim] += 1.0;
        } else {
            for (size_t i = 0; i + 3 <= s.size(); ++i)
                v[fnv1a64(std::string_view(s).substr(i, 3)) % kDim] += 1.0;
        }
        l2_normalize(v);
        return v;
    }
};

// Caching front-end. Exact-string hits skip the backend entirely;
// concurrent readers share the cache, inserts are serialized.
class EmbedClient {
public:
    explicit EmbedClient(EmbedBackend& backend, bool caching = true)
        : backend_(backend), caching_(caching) {}

    Embedding embed(const std::string& text) {
        if (text.empty()) throw data_error("cannot embed empty text");
        if (caching_) {
            std::shared_lock lock(mutex_);
            auto it = cache_.find(text);
            if (it != cache_.end()) return it->second;
        }
        Embedding v = backend_.embed_raw(text);
        l2_normalize(v);
        backend_calls_.fetch_add(1, std::memory_order_relaxed);
        if (caching_) {
            std::unique_lock lock(mutex_);
            cache_.emplace(text, v);
        }
        return v;
    }

    double similarity(const std::string& a, const std::string& b) {
        Embedding ea = embed(a);
        Embedding eb = embed(b);
        return cosine(ea, eb);
    }

    uint64_t backend_calls() const { return backend_calls_.load(); }

private:
    EmbedBackend& backend_;
    bool caching_;
    std::unordered_map<std::string, Embedding> cache_;
    std::shared_mutex mutex_;
    std::atomic<uint64_t> backend_calls_{0};
};

// ---- chat ----

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    // Returns the response text and reports token usage. Throws
    // transport_error for retryable failures.
    virtual std::string chat_raw(Stage stage, const std::string& prompt, uint64_t& prompt_tokens,
                                 uint64_t& completion_tokens) = 0;
};

// Retry + ledger wrapper around a backend; the single entry point the
// pipeline stages use for chat.
class ChatClient {
public:
    ChatClient(ChatBackend& backend, TokenLedger& ledger, int retry_limit = 2)
        : backend_(backend), ledger_(ledger), retry_limit_(retry_limit) {}

    std::string chat(Stage stage, const std::string& prompt) {
        for (int attempt = 0;; ++attempt) {
            try {
                uint64_t ptok = 0, ctok = 0;
                std::string response = backend_.chat_raw(stage, prompt, ptok, ctok);
                ledger_.record(stage, ptok, ctok);
                return response;
            } catch (const mock_miss_error&) {
                throw;
            } catch (const transport_error& e) {
                if (attempt >= retry_limit_)
                    throw backend_error("transport failure after " +
                                        std::to_string(attempt + 1) + " attempts: " + e.what());
            }
        }
    }

    TokenLedger& ledger() { return ledger_; }

private:
    ChatBackend& backend_;
    TokenLedger& ledger_;
    int retry_limit_;
};

// Scripted chat backend keyed by (stage, normalized-prompt digest).
// A miss is fatal unless a fallback responder is installed; responses the
// fallback produces can be recorded to a directory for later replay.
class ScriptedChat : public ChatBackend {
public:
    struct Entry {
        std::string response;
        std::optional<uint64_t> prompt_tokens;
        std::optional<uint64_t> completion_tokens;
    };

    using Fallback = std::function<Entry(Stage, const std::string&)>;

    ScriptedChat() = default;

    void add(Stage stage, const std::string& prompt, const std::string& response,
             std::optional<uint64_t> ptok = std::nullopt,
             std::optional<uint64_t> ctok = std::nullopt) {
        std::unique_lock lock(mutex_);
        entries_[key(stage, prompt)] = Entry{response, ptok, ctok};
    }

    void set_fallback(Fallback f) { fallback_ = std::move(f); }
    void set_record_dir(const std::string& dir) {
        record_dir_ = dir;
        std::filesystem::create_directories(dir);
    }

    // Loads every *.json entry file from a fixture directory.
    void load_dir(const std::string& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) throw data_error("mock directory '" + dir + "' not found");
        std::vector<fs::path> files;
        for (const auto& p : fs::directory_iterator(dir))
            if (p.path().extension() == ".json") files.push_back(p.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw data_error("mock entry '" + f.string() + "': " + e.what());
            }
            Entry e;
            e.response = j.at("response").get<std::string>();
            if (j.contains("prompt_tokens")) e.prompt_tokens = j.at("prompt_tokens").get<uint64_t>();
            if (j.contains("completion_tokens"))
                e.completion_tokens = j.at("completion_tokens").get<uint64_t>();
            std::string stage = j.at("stage").get<std::string>();
            std::string digest = j.at("prompt_digest").get<std::string>();
            std::unique_lock lock(mutex_);
            entries_[stage + ":" + digest] = std::move(e);
        }
    }

    std::string chat_raw(Stage stage, const std::string& prompt, uint64_t& prompt_tokens,
                         uint64_t& completion_tokens) override {
        std::string k = key(stage, prompt);
        {
            std::shared_lock lock(mutex_);
            auto it = entries_.find(k);
            if (it != entries_.end()) {
                prompt_tokens = it->second.prompt_tokens.value_or(whitespace_tokens(prompt));
                completion_tokens =
                    it->second.completion_tokens.value_or(whitespace_tokens(it->second.response));
                return it->second.response;
            }
        }
        if (!fallback_)
            throw mock_miss_error("no scripted response for stage " +
                                  std::string(to_string(stage)) + ", prompt digest " +
                                  prompt_digest(prompt));
        Entry e = fallback_(stage, prompt);
        prompt_tokens = e.prompt_tokens.value_or(whitespace_tokens(prompt));
        completion_tokens = e.completion_tokens.value_or(whitespace_tokens(e.response));
        {
            std::unique_lock lock(mutex_);
            entries_[k] = e;
        }
        if (!record_dir_.empty()) write_entry(stage, prompt, e);
        return e.response;
    }

    size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

private:
    static std::string key(Stage stage, const std::string& prompt) {
        return std::string(to_string(stage)) + ":" + prompt_digest(prompt);
    }

    void write_entry(Stage stage, const std::string& prompt, const Entry& e) {
        nlohmann::json j = {{"stage", to_string(stage)},
                            {"prompt_digest", prompt_digest(prompt)},
                            {"prompt", prompt},
                            {"response", e.response}};
        if (e.prompt_tokens) j["prompt_tokens"] = *e.prompt_tokens;
        if (e.completion_tokens) j["completion_tokens"] = *e.completion_tokens;
        std::string name = std::string(to_string(stage)) + "__" + prompt_digest(prompt) + ".json";
        std::ofstream out(std::filesystem::path(record_dir_) / name, std::ios::binary);
        out << j.dump(2) << "\n";
    }

    std::map<std::string, Entry> entries_;
    mutable std::shared_mutex mutex_;
    Fallback fallback_;
    std::string record_dir_;
};

}  // namespace oakmend
