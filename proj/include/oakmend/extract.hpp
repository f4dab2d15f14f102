#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "oakmend/core.hpp"
#include "oakmend/kg.hpp"
#include "oakmend/llm.hpp"
#include "oakmend/prompts.hpp"

namespace oakmend {

struct Document {
    std::string doc_id;
    std::string text;
};

struct OpenQualifier {
    std::string predicate_label;
    std::string object_label;
    std::string object_type_label;

    bool operator==(const OpenQualifier&) const = default;
};

struct OpenTriple {
    std::string subject_label;
    std::string predicate_label;
    std::string object_label;
    std::string subject_type_label;
    std::string object_type_label;
    std::vector<OpenQualifier> qualifiers;
    ChunkId provenance;

    bool operator==(const OpenTriple&) const = default;
};

// One chunk per paragraph (blank-line split); empty paragraphs dropped.
inline std::vector<Chunk> chunk_corpus(const std::vector<Document>& documents) {
    std::vector<Chunk> chunks;
    for (const Document& doc : documents) {
        std::istringstream in(doc.text);
        std::string line, para;
        int index = 0;
        auto flush = [&] {
            std::string trimmed = collapse_ws(para);
            if (!trimmed.empty()) {
                Chunk c;
                c.doc_id = doc.doc_id;
                c.chunk_index = index++;
                // Keep the original paragraph text, trimmed at the edges.
                size_t b = para.find_first_not_of(" \t\r\n");
                size_t e = para.find_last_not_of(" \t\r\n");
                c.text = b == std::string::npos ? "" : para.substr(b, e - b + 1);
                chunks.push_back(std::move(c));
            }
            para.clear();
        };
        while (std::getline(in, line)) {
            if (collapse_ws(line).empty()) {
                flush();
            } else {
                if (!para.empty()) para += "\n";
                para += line;
            }
        }
        flush();
    }
    return chunks;
}

// Date/number sniffing for entity labels; type labels carrying an
// obviously literal word also trigger.
inline std::optional<LiteralKind> sniff_literal(const std::string& label,
                                                const std::string& type_label) {
    std::string tl = lowercase(type_label);
    auto has = [&](const char* w) { return tl.find(w) != std::string::npos; };
    if (has("date") || has("year") || has("time") || has("month")) return LiteralKind::date;
    if (has("number") || has("quantity") || has("numeric")) return LiteralKind::quantity;
    if (has("string") || has("text")) return LiteralKind::string_literal;

    static const std::regex iso_date(R"(^\d{4}-\d{2}-\d{2}$)");
    static const std::regex written_date(
        R"(^(\d{1,2}\s+)?(january|february|march|april|may|june|july|august|september|october|november|december)(\s+\d{1,2},?)?\s+\d{3,4}$)",
        std::regex::icase);
    static const std::regex numeric(R"(^[+-]?\d+([.,]\d+)*$)");
    std::string l = collapse_ws(label);
    if (std::regex_match(l, iso_date) || std::regex_match(l, written_date))
        return LiteralKind::date;
    if (std::regex_match(l, numeric)) return LiteralKind::quantity;
    return std::nullopt;
}

struct ExtractResult {
    std::vector<OpenTriple> triples;
    std::vector<std::string> warnings;
    bool parse_failed = false;  // both attempts failed; chunk contributes nothing
};

namespace detail {

// LLM output often arrives fenced; strip a ```...``` wrapper if present.
inline std::string strip_code_fence(const std::string& s) {
    size_t b = s.find("```");
    if (b == std::string::npos) return s;
    size_t line_end = s.find('\n', b);
    if (line_end == std::string::npos) return s;
    size_t e = s.find("```", line_end);
    if (e == std::string::npos) return s;
    return s.substr(line_end + 1, e - line_end - 1);
}

inline bool nonempty_string(const nlohmann::json& j) {
    return j.is_string() && !collapse_ws(j.get<std::string>()).empty();
}

inline std::optional<OpenTriple> parse_entry(const nlohmann::json& j, const ChunkId& chunk,
                                             std::string& why) {
    if (!j.is_object()) {
        why = "entry is not an object";
        return std::nullopt;
    }
    if (!j.contains("triple") || !j.at("triple").is_array() || j.at("triple").size() != 3) {
        why = "'triple' must be a list of three strings";
        return std::nullopt;
    }
    for (const auto& part : j.at("triple")) {
        if (!nonempty_string(part)) {
            why = "'triple' must be a list of three nonempty strings";
            return std::nullopt;
        }
    }
    if (!j.contains("subject_type") || !nonempty_string(j.at("subject_type")) ||
        !j.contains("object_type") || !nonempty_string(j.at("object_type"))) {
        why = "missing subject_type or object_type";
        return std::nullopt;
    }
    OpenTriple t;
    t.subject_label = collapse_ws(j.at("triple").at(0).get<std::string>());
    t.predicate_label = collapse_ws(j.at("triple").at(1).get<std::string>());
    t.object_label = collapse_ws(j.at("triple").at(2).get<std::string>());
    t.subject_type_label = collapse_ws(j.at("subject_type").get<std::string>());
    t.object_type_label = collapse_ws(j.at("object_type").get<std::string>());
    t.provenance = chunk;
    if (j.contains("qualifiers")) {
        if (!j.at("qualifiers").is_array()) {
            why = "'qualifiers' must be a list";
            return std::nullopt;
        }
        for (const auto& q : j.at("qualifiers")) {
            if (!q.is_object() || !q.contains("pair") || !q.at("pair").is_array() ||
                q.at("pair").size() != 2 || !nonempty_string(q.at("pair").at(0)) ||
                !nonempty_string(q.at("pair").at(1)) || !q.contains("object_type") ||
                !nonempty_string(q.at("object_type"))) {
                why = "malformed qualifier";
                return std::nullopt;
            }
            OpenQualifier oq;
            oq.predicate_label = collapse_ws(q.at("pair").at(0).get<std::string>());
            oq.object_label = collapse_ws(q.at("pair").at(1).get<std::string>());
            oq.object_type_label = collapse_ws(q.at("object_type").get<std::string>());
            t.qualifiers.push_back(std::move(oq));
        }
    }
    return t;
}

}  // namespace detail

// One extraction call per chunk: malformed entries are dropped
// individually; a top-level JSON parse failure gets one full-prompt
// retry, after which the chunk contributes nothing.
inline ExtractResult extract_open_kg(ChatClient& chat, const Chunk& chunk) {
    ExtractResult result;
    std::string prompt = prompts::build_extract_prompt(chunk.text);
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response = chat.chat(Stage::extract, prompt);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(detail::strip_code_fence(response));
            if (!j.is_array()) throw data_error("top-level JSON is not a list");
        } catch (const std::exception& e) {
            if (attempt == 0) continue;
            result.parse_failed = true;
            result.warnings.push_back("chunk " + chunk.id() +
                                      ": response unparseable twice: " + e.what());
            return result;
        }
        for (size_t i = 0; i < j.size(); ++i) {
            std::string why;
            auto t = detail::parse_entry(j.at(i), chunk.id(), why);
            if (t)
                result.triples.push_back(std::move(*t));
            else
                result.warnings.push_back("chunk " + chunk.id() + ": dropped entry " +
                                          std::to_string(i) + " (" + why + ")");
        }
        return result;
    }
    return result;
}

// Open-domain KG with the label indexes canonicalization needs: which
// entities carried each open type, which (subject, object) pairs each
// open predicate, and the first chunk each label came from.
struct OpenGraph {
    std::vector<Chunk> chunks;
    std::vector<OpenTriple> triples;
    std::vector<ChunkId> failed_chunks;
    std::vector<std::string> warnings;

    std::map<std::string, std::vector<std::string>> entities_by_type;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> pairs_by_predicate;
    std::map<std::string, ChunkId> first_chunk_of_type;
    std::map<std::string, ChunkId> first_chunk_of_predicate;

    const Chunk* chunk_by_id(const ChunkId& id) const {
        for (const Chunk& c : chunks)
            if (c.id() == id) return &c;
        return nullptr;
    }

    void rebuild_indexes() {
        entities_by_type.clear();
        pairs_by_predicate.clear();
        first_chunk_of_type.clear();
        first_chunk_of_predicate.clear();
        auto note_type = [&](const std::string& type_label, const std::string& entity_label,
                             const ChunkId& chunk) {
            auto& list = entities_by_type[type_label];
            if (std::find(list.begin(), list.end(), entity_label) == list.end())
                list.push_back(entity_label);
            first_chunk_of_type.emplace(type_label, chunk);
        };
        for (const OpenTriple& t : triples) {
            note_type(t.subject_type_label, t.subject_label, t.provenance);
            note_type(t.object_type_label, t.object_label, t.provenance);
            pairs_by_predicate[t.predicate_label].push_back({t.subject_label, t.object_label});
            first_chunk_of_predicate.emplace(t.predicate_label, t.provenance);
            for (const OpenQualifier& q : t.qualifiers)
                note_type(q.object_type_label, q.object_label, t.provenance);
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json jchunks = nlohmann::json::array();
        for (const Chunk& c : chunks)
            jchunks.push_back(
                {{"doc_id", c.doc_id}, {"chunk_index", c.chunk_index}, {"text", c.text}});
        nlohmann::json jtriples = nlohmann::json::array();
        for (const OpenTriple& t : triples) {
            nlohmann::json quals = nlohmann::json::array();
            for (const OpenQualifier& q : t.qualifiers)
                quals.push_back({{"predicate", q.predicate_label},
                                 {"object", q.object_label},
                                 {"object_type", q.object_type_label}});
            jtriples.push_back({{"subject", t.subject_label},
                                {"predicate", t.predicate_label},
                                {"object", t.object_label},
                                {"subject_type", t.subject_type_label},
                                {"object_type", t.object_type_label},
                                {"qualifiers", quals},
                                {"provenance", t.provenance}});
        }
        return {{"chunks", jchunks},
                {"triples", jtriples},
                {"failed_chunks", failed_chunks},
                {"warnings", warnings}};
    }

    static OpenGraph from_json(const nlohmann::json& j) {
        OpenGraph g;
        try {
            for (const auto& c : j.at("chunks")) {
                Chunk chunk;
                chunk.doc_id = c.at("doc_id").get<std::string>();
                chunk.chunk_index = c.at("chunk_index").get<int>();
                chunk.text = c.at("text").get<std::string>();
                g.chunks.push_back(std::move(chunk));
            }
            for (const auto& t : j.at("triples")) {
                OpenTriple ot;
                ot.subject_label = t.at("subject").get<std::string>();
                ot.predicate_label = t.at("predicate").get<std::string>();
                ot.object_label = t.at("object").get<std::string>();
                ot.subject_type_label = t.at("subject_type").get<std::string>();
                ot.object_type_label = t.at("object_type").get<std::string>();
                for (const auto& q : t.at("qualifiers"))
                    ot.qualifiers.push_back({q.at("predicate").get<std::string>(),
                                             q.at("object").get<std::string>(),
                                             q.at("object_type").get<std::string>()});
                ot.provenance = t.at("provenance").get<std::string>();
                g.triples.push_back(std::move(ot));
            }
            for (const auto& f : j.at("failed_chunks")) g.failed_chunks.push_back(f.get<std::string>());
            if (j.contains("warnings"))
                for (const auto& w : j.at("warnings")) g.warnings.push_back(w.get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw data_error(std::string("malformed open-graph artifact: ") + e.what());
        }
        g.rebuild_indexes();
        return g;
    }
};

// Runs extraction over every chunk, `parallelism` chunks in flight at
// once; results land in chunk order regardless of scheduling.
inline OpenGraph extract_corpus(ChatClient& chat, const std::vector<Chunk>& chunks,
                                int parallelism = 1) {
    OpenGraph g;
    g.chunks = chunks;
    std::vector<ExtractResult> results(chunks.size());

    if (parallelism <= 1 || chunks.size() <= 1) {
        for (size_t i = 0; i < chunks.size(); ++i) results[i] = extract_open_kg(chat, chunks[i]);
    } else {
        std::atomic<size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= chunks.size()) return;
                try {
                    results[i] = extract_open_kg(chat, chunks[i]);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        size_t n = std::min<size_t>(static_cast<size_t>(parallelism), chunks.size());
        std::vector<std::thread> pool;
        for (size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    for (size_t i = 0; i < chunks.size(); ++i) {
        ExtractResult& r = results[i];
        for (OpenTriple& t : r.triples) g.triples.push_back(std::move(t));
        for (std::string& w : r.warnings) g.warnings.push_back(std::move(w));
        if (r.parse_failed) g.failed_chunks.push_back(chunks[i].id());
    }
    g.rebuild_indexes();
    return g;
}

// Corpus input: JSON Lines of {"doc_id","text"}, or a directory of
// plain-text files (one document each).
inline std::vector<Document> load_corpus(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<Document> docs;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& p : fs::directory_iterator(path))
            if (p.is_regular_file()) files.push_back(p.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            docs.push_back({f.filename().string(), buf.str()});
        }
        return docs;
    }
    std::ifstream in(path);
    if (!in) throw data_error("cannot open corpus '" + path + "'");
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (collapse_ws(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            docs.push_back({j.at("doc_id").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw data_error("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

}  // namespace oakmend
