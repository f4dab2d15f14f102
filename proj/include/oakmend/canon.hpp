#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oakmend/core.hpp"
#include "oakmend/extract.hpp"
#include "oakmend/kg.hpp"
#include "oakmend/llm.hpp"
#include "oakmend/ontology.hpp"
#include "oakmend/prompts.hpp"

namespace oakmend {

struct CatalogEntry {
    std::string id;
    std::string label;
    std::vector<std::string> aliases;
};

inline std::vector<CatalogEntry> type_catalog(const Ontology& ont) {
    std::vector<CatalogEntry> out;
    for (const auto& [id, t] : ont.types()) out.push_back({id, t.label, t.aliases});
    return out;
}

inline std::vector<CatalogEntry> predicate_catalog(const Ontology& ont) {
    std::vector<CatalogEntry> out;
    for (const auto& [id, p] : ont.predicates())
        if (!p.is_qualifier) out.push_back({id, p.label, p.aliases});
    return out;
}

inline std::vector<CatalogEntry> qualifier_predicate_catalog(const Ontology& ont) {
    std::vector<CatalogEntry> out;
    for (const auto& [id, p] : ont.predicates())
        if (p.is_qualifier) out.push_back({id, p.label, p.aliases});
    return out;
}

struct ScoredCandidate {
    std::string id;
    double score = 0;
};

// Candidates within beta of the best similarity score. `scored` holds the
// retained band only, best first (ties by id).
struct CandidateSet {
    std::string query_label;
    std::vector<ScoredCandidate> scored;
    double max_score = 0;
    double beta = 0;
};

// phi per catalog item = max cosine over its label and aliases vs the
// query; the band keeps items with phi >= m - beta.
inline CandidateSet candidate_band(EmbedClient& embed, const std::string& query_label,
                                   const std::vector<CatalogEntry>& catalog, double beta) {
    if (catalog.empty()) throw data_error("candidate_band: empty catalog");
    if (beta < 0) throw data_error("candidate_band: beta must be >= 0");
    Embedding q = embed.embed(query_label);

    std::vector<ScoredCandidate> all;
    all.reserve(catalog.size());
    for (const CatalogEntry& item : catalog) {
        double phi = cosine(q, embed.embed(item.label));
        for (const std::string& alias : item.aliases)
            phi = std::max(phi, cosine(q, embed.embed(alias)));
        all.push_back({item.id, phi});
    }
    std::sort(all.begin(), all.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });

    CandidateSet set;
    set.query_label = query_label;
    set.beta = beta;
    set.max_score = all.front().score;
    for (const ScoredCandidate& c : all)
        if (c.score >= set.max_score - beta) set.scored.push_back(c);
    return set;
}

// Context shown to the disambiguation prompts: a representative chunk
// text plus the entities (or entity pairs) the open label covered,
// truncated first-k in extraction order.
struct CanonContext {
    std::string source_text;
    std::vector<std::string> entities;
    std::vector<std::pair<std::string, std::string>> pairs;
    size_t cap = 20;

    std::vector<std::string> capped_entities() const {
        std::vector<std::string> out = entities;
        if (out.size() > cap) out.resize(cap);
        return out;
    }
    std::vector<std::pair<std::string, std::string>> capped_pairs() const {
        auto out = pairs;
        if (out.size() > cap) out.resize(cap);
        return out;
    }
};

// Per-run memo: same open label, same canonical id. Write-once per key.
class CanonCache {
public:
    std::optional<std::string> get_type(const std::string& label) const { return get(types_, label); }
    std::optional<std::string> get_predicate(const std::string& label) const {
        return get(predicates_, label);
    }
    std::optional<std::string> get_qualifier(const std::string& label) const {
        return get(qualifiers_, label);
    }

    void put_type(const std::string& label, const std::string& id) { put(types_, label, id); }
    void put_predicate(const std::string& label, const std::string& id) {
        put(predicates_, label, id);
    }
    void put_qualifier(const std::string& label, const std::string& id) {
        put(qualifiers_, label, id);
    }

    nlohmann::json to_json() const {
        return {{"types", types_}, {"predicates", predicates_}, {"qualifiers", qualifiers_}};
    }

private:
    static std::optional<std::string> get(const std::map<std::string, std::string>& m,
                                          const std::string& k) {
        auto it = m.find(k);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }
    static void put(std::map<std::string, std::string>& m, const std::string& k,
                    const std::string& v) {
        auto [it, inserted] = m.emplace(k, v);
        if (!inserted && it->second != v)
            throw data_error("canonicalization cache conflict for '" + k + "'");
    }

    std::map<std::string, std::string> types_;
    std::map<std::string, std::string> predicates_;
    std::map<std::string, std::string> qualifiers_;
};

struct CanonOptions {
    double beta = 0.05;
    double similarity_floor = 0.3;  // open predicates scoring below are quarantined
    size_t context_cap = 20;
    double dedup_threshold = 0.9;
};

// Sentinel returned for quarantined open predicates.
inline constexpr const char* kUnmapped = "";

namespace detail {

// Matches an LLM answer against band members: exact id, then exact
// label, then alias (normalized); band order breaks ties.
inline std::optional<std::string> match_candidate(const Ontology& ont,
                                                  const std::vector<ScoredCandidate>& band,
                                                  bool is_type, const std::string& answer) {
    std::string norm = normalize_label(answer);
    if (norm.empty()) return std::nullopt;
    for (const ScoredCandidate& c : band)
        if (normalize_label(c.id) == norm) return c.id;
    for (const ScoredCandidate& c : band) {
        const std::string& label = is_type ? ont.type(c.id).label : ont.predicate(c.id).label;
        if (normalize_label(label) == norm) return c.id;
    }
    for (const ScoredCandidate& c : band) {
        const auto& aliases = is_type ? ont.type(c.id).aliases : ont.predicate(c.id).aliases;
        for (const std::string& a : aliases)
            if (normalize_label(a) == norm) return c.id;
    }
    return std::nullopt;
}

}  // namespace detail

// Embedding-band canonicalization of open labels onto the ontology.
// Singleton bands resolve with zero chat calls; wider bands cost exactly
// one call (plus one retry when the model answers outside the band,
// falling back to the argmax).
class Canonicalizer {
public:
    Canonicalizer(const Ontology& ont, ChatClient& chat, EmbedClient& embed,
                  CanonOptions options = {})
        : ont_(ont),
          chat_(chat),
          embed_(embed),
          options_(options),
          types_(type_catalog(ont)),
          predicates_(predicate_catalog(ont)),
          qualifiers_(qualifier_predicate_catalog(ont)) {}

    TypeId canonicalize_type(const std::string& open_label, const CanonContext& ctx) {
        if (auto hit = cache_.get_type(open_label)) return *hit;
        CandidateSet band = candidate_band(embed_, open_label, types_, options_.beta);
        TypeId id = band.scored.size() == 1
                        ? band.scored.front().id
                        : disambiguate(band, true,
                                       prompts::build_type_canon_prompt(
                                           ont_, ctx.source_text, ctx.capped_entities(),
                                           open_label, band_ids(band)),
                                       Stage::canon_type);
        cache_.put_type(open_label, id);
        return id;
    }

    // Returns nullopt when the best score is below the similarity floor;
    // such triples are quarantined rather than mis-canonicalized.
    std::optional<PredicateId> canonicalize_predicate(const std::string& open_label,
                                                      const CanonContext& ctx) {
        if (auto hit = cache_.get_predicate(open_label)) {
            if (*hit == kUnmapped) return std::nullopt;
            return *hit;
        }
        CandidateSet band = candidate_band(embed_, open_label, predicates_, options_.beta);
        if (band.max_score < options_.similarity_floor) {
            cache_.put_predicate(open_label, kUnmapped);
            return std::nullopt;
        }
        PredicateId id = band.scored.size() == 1
                             ? band.scored.front().id
                             : disambiguate(band, false,
                                            prompts::build_predicate_canon_prompt(
                                                ont_, ctx.source_text, ctx.capped_pairs(),
                                                open_label, band_ids(band)),
                                            Stage::canon_pred);
        cache_.put_predicate(open_label, id);
        return id;
    }

    // Qualifier predicates are few enough that a pure argmax suffices;
    // never costs a chat call. Ties resolve to the smallest id.
    PredicateId canonicalize_qualifier_predicate(const std::string& open_label) {
        if (auto hit = cache_.get_qualifier(open_label)) return *hit;
        CandidateSet band = candidate_band(embed_, open_label, qualifiers_, 0.0);
        PredicateId id = band.scored.front().id;
        cache_.put_qualifier(open_label, id);
        return id;
    }

    const CanonCache& cache() const { return cache_; }

private:
    std::vector<std::string> band_ids(const CandidateSet& band) const {
        std::vector<std::string> ids;
        for (const ScoredCandidate& c : band.scored) ids.push_back(c.id);
        return ids;
    }

    std::string disambiguate(const CandidateSet& band, bool is_type, const std::string& prompt,
                             Stage stage) {
        std::string answer = chat_.chat(stage, prompt);
        if (auto id = detail::match_candidate(ont_, band.scored, is_type, answer)) return *id;
        answer = chat_.chat(stage, prompt);
        if (auto id = detail::match_candidate(ont_, band.scored, is_type, answer)) return *id;
        return band.scored.front().id;  // argmax fallback
    }

    const Ontology& ont_;
    ChatClient& chat_;
    EmbedClient& embed_;
    CanonOptions options_;
    std::vector<CatalogEntry> types_;
    std::vector<CatalogEntry> predicates_;
    std::vector<CatalogEntry> qualifiers_;
    CanonCache cache_;
};

struct CanonReport {
    uint64_t quarantined_triples = 0;
    nlohmann::json cache;

    nlohmann::json to_json() const {
        return {{"quarantined_triples", quarantined_triples}, {"cache", cache}};
    }
};

struct CanonResult {
    KnowledgeGraph kg;
    CanonReport report;
};

// Builds the canonical KG from the open graph: entities keyed by
// normalized label, types resolved through the shared caches, qualifier
// predicates by argmax. Entities that only ever appear as objects and
// sniff as literals are marked so dedup skips them.
inline CanonResult canonicalize_graph(const Ontology& ont, const OpenGraph& open,
                                      ChatClient& chat, EmbedClient& embed,
                                      const CanonOptions& options = {}) {
    Canonicalizer canon(ont, chat, embed, options);
    CanonResult result;
    result.kg.ontology_hash = ont.hash();

    std::set<std::string> subject_labels;
    for (const OpenTriple& t : open.triples)
        subject_labels.insert(normalize_label(t.subject_label));

    auto context_for_type = [&](const std::string& type_label) {
        CanonContext ctx;
        ctx.cap = options.context_cap;
        auto it = open.entities_by_type.find(type_label);
        if (it != open.entities_by_type.end()) ctx.entities = it->second;
        auto fc = open.first_chunk_of_type.find(type_label);
        if (fc != open.first_chunk_of_type.end())
            if (const Chunk* c = open.chunk_by_id(fc->second)) ctx.source_text = c->text;
        return ctx;
    };
    auto context_for_predicate = [&](const std::string& pred_label) {
        CanonContext ctx;
        ctx.cap = options.context_cap;
        auto it = open.pairs_by_predicate.find(pred_label);
        if (it != open.pairs_by_predicate.end()) ctx.pairs = it->second;
        auto fc = open.first_chunk_of_predicate.find(pred_label);
        if (fc != open.first_chunk_of_predicate.end())
            if (const Chunk* c = open.chunk_by_id(fc->second)) ctx.source_text = c->text;
        return ctx;
    };

    std::map<std::string, EntityId> by_label;
    auto upsert_entity = [&](const std::string& label, const std::string& open_type,
                             const ChunkId& chunk) -> EntityId {
        TypeId type = canon.canonicalize_type(open_type, context_for_type(open_type));
        std::string key = normalize_label(label);
        auto it = by_label.find(key);
        if (it == by_label.end()) {
            Entity e;
            e.label = label;
            e.types.insert(type);
            e.provenance.insert(chunk);
            if (!subject_labels.count(key)) e.literal_kind = sniff_literal(label, open_type);
            EntityId id = result.kg.add_entity(std::move(e));
            by_label.emplace(key, id);
            return id;
        }
        Entity& e = result.kg.entity_fields(it->second);
        e.types.insert(type);
        e.provenance.insert(chunk);
        if (label != e.label &&
            std::find(e.aliases.begin(), e.aliases.end(), label) == e.aliases.end())
            e.aliases.push_back(label);
        if (!e.literal_kind && !subject_labels.count(key))
            e.literal_kind = sniff_literal(label, open_type);
        return it->second;
    };

    for (const OpenTriple& ot : open.triples) {
        std::optional<PredicateId> pred =
            canon.canonicalize_predicate(ot.predicate_label, context_for_predicate(ot.predicate_label));
        if (!pred) {
            ++result.report.quarantined_triples;
            continue;
        }
        Triple t;
        t.subject = upsert_entity(ot.subject_label, ot.subject_type_label, ot.provenance);
        t.object = upsert_entity(ot.object_label, ot.object_type_label, ot.provenance);
        t.predicate = *pred;
        t.provenance = ot.provenance;
        for (const OpenQualifier& oq : ot.qualifiers) {
            Qualifier q;
            q.predicate = canon.canonicalize_qualifier_predicate(oq.predicate_label);
            q.object = upsert_entity(oq.object_label, oq.object_type_label, ot.provenance);
            t.qualifiers.push_back(std::move(q));
        }
        result.kg.add_triple(std::move(t));
    }

    result.report.cache = canon.cache().to_json();
    return result;
}

struct DedupReport {
    uint64_t clusters = 0;
    uint64_t merged_entities = 0;
    uint64_t chat_calls = 0;

    nlohmann::json to_json() const {
        return {{"clusters", clusters},
                {"merged_entities", merged_entities},
                {"chat_calls", chat_calls}};
    }
};

// Types-aware entity deduplication: literal-kind entities never enter a
// cluster; non-literals cluster greedily (single link) above the cosine
// threshold, then one chat call per pivot confirms duplicates and picks
// the surviving alias.
inline DedupReport dedup_entities(KnowledgeGraph& kg, ChatClient& chat, EmbedClient& embed,
                                  double threshold = 0.9) {
    DedupReport report;
    std::vector<EntityId> ids;
    for (const auto& [id, e] : kg.entities())
        if (!e.literal_kind) ids.push_back(id);

    std::vector<Embedding> vecs;
    vecs.reserve(ids.size());
    for (const EntityId& id : ids) vecs.push_back(embed.embed(kg.entity(id).label));

    // Union-find over the similarity graph.
    std::vector<size_t> parent(ids.size());
    for (size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = i + 1; j < ids.size(); ++j)
            if (cosine(vecs[i], vecs[j]) >= threshold) parent[find(i)] = find(j);

    std::map<size_t, std::vector<EntityId>> clusters;
    for (size_t i = 0; i < ids.size(); ++i) clusters[find(i)].push_back(ids[i]);

    for (auto& [_, members] : clusters) {
        if (members.size() < 2) continue;
        ++report.clusters;
        std::sort(members.begin(), members.end());
        std::vector<EntityId> remaining = members;
        while (remaining.size() > 1) {
            EntityId pivot = remaining.front();
            remaining.erase(remaining.begin());
            std::vector<std::string> candidate_labels;
            for (const EntityId& id : remaining) candidate_labels.push_back(kg.entity(id).label);

            std::string prompt = prompts::build_dedup_prompt(kg.entity(pivot).label,
                                                             candidate_labels);
            std::string response = chat.chat(Stage::dedup, prompt);
            ++report.chat_calls;

            nlohmann::json j;
            try {
                j = nlohmann::json::parse(detail::strip_code_fence(response));
            } catch (const nlohmann::json::exception&) {
                continue;  // unusable answer: pivot keeps its record
            }
            if (!j.is_object() || !j.contains("duplicates")) continue;
            std::set<std::string> dup_labels;
            for (const auto& d : j.at("duplicates"))
                if (d.is_string()) dup_labels.insert(normalize_label(d.get<std::string>()));
            std::string alias = j.value("alias", std::string());

            std::vector<EntityId> absorbed;
            for (const EntityId& id : remaining)
                if (dup_labels.count(normalize_label(kg.entity(id).label)))
                    absorbed.push_back(id);
            for (const EntityId& id : absorbed) {
                kg.merge_entity_into(id, pivot, alias);
                ++report.merged_entities;
                remaining.erase(std::remove(remaining.begin(), remaining.end(), id),
                                remaining.end());
            }
        }
    }
    return report;
}

}  // namespace oakmend
