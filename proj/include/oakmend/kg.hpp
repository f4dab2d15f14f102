#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oakmend/core.hpp"
#include "oakmend/ontology.hpp"

namespace oakmend {

enum class LiteralKind { date, quantity, string_literal };

inline const char* to_string(LiteralKind k) {
    switch (k) {
        case LiteralKind::date: return "date";
        case LiteralKind::quantity: return "quantity";
        case LiteralKind::string_literal: return "string";
    }
    return "?";
}

inline LiteralKind literal_kind_from_string(const std::string& s) {
    if (s == "date") return LiteralKind::date;
    if (s == "quantity") return LiteralKind::quantity;
    if (s == "string") return LiteralKind::string_literal;
    throw data_error("unknown literal kind '" + s + "'");
}

struct Entity {
    EntityId id;
    std::string label;
    std::vector<std::string> aliases;
    std::set<TypeId> types;
    std::optional<LiteralKind> literal_kind;
    std::set<ChunkId> provenance;

    bool operator==(const Entity&) const = default;
};

struct Qualifier {
    PredicateId predicate;
    EntityId object;

    bool operator==(const Qualifier&) const = default;
    auto operator<=>(const Qualifier&) const = default;
};

struct TripleFlags {
    bool auto_swapped = false;
    bool unrepairable = false;

    bool operator==(const TripleFlags&) const = default;
};

struct Triple {
    TripleId id;
    EntityId subject;
    PredicateId predicate;
    EntityId object;
    std::vector<Qualifier> qualifiers;
    ChunkId provenance;
    TripleFlags flags;

    bool operator==(const Triple&) const = default;
};

struct Chunk {
    std::string doc_id;
    int chunk_index = 0;
    std::string text;

    ChunkId id() const { return doc_id + ":" + std::to_string(chunk_index); }
};

// Typed entities + provenance-bearing triples. Entity records are shared,
// so adding a type to an entity is observed by every triple referencing
// it. Secondary indexes are maintained by every mutator and can be
// cross-checked with rebuilt ones.
class KnowledgeGraph {
public:
    std::string ontology_hash;

    const std::map<EntityId, Entity>& entities() const { return entities_; }
    const std::map<TripleId, Triple>& triples() const { return triples_; }

    bool has_entity(const EntityId& id) const { return entities_.count(id) > 0; }
    bool has_triple(const TripleId& id) const { return triples_.count(id) > 0; }

    const Entity& entity(const EntityId& id) const {
        auto it = entities_.find(id);
        if (it == entities_.end()) throw data_error("unknown entity id '" + id + "'");
        return it->second;
    }

    const Triple& triple(const TripleId& id) const {
        auto it = triples_.find(id);
        if (it == triples_.end()) throw data_error("unknown triple id '" + id + "'");
        return it->second;
    }

    // Mutable access for unioning types/aliases/provenance. Callers must
    // not change the label here; label edits go through merge_entity_into.
    Entity& entity_fields(const EntityId& id) {
        auto it = entities_.find(id);
        if (it == entities_.end()) throw data_error("unknown entity id '" + id + "'");
        return it->second;
    }

    // Entity ids holding the given label (normalized match).
    std::set<EntityId> entities_with_label(const std::string& label) const {
        auto it = label_index_.find(normalize_label(label));
        if (it == label_index_.end()) return {};
        return it->second;
    }

    std::set<TripleId> triples_between(const EntityId& s, const EntityId& o) const {
        auto it = pair_index_.find({s, o});
        if (it == pair_index_.end()) return {};
        return it->second;
    }

    // Triples referencing the entity as subject, object, or qualifier object.
    std::set<TripleId> incident_triples(const EntityId& e) const {
        auto it = incidence_.find(e);
        if (it == incidence_.end()) return {};
        return it->second;
    }

    size_t qualifier_count() const {
        size_t n = 0;
        for (const auto& [_, t] : triples_) n += t.qualifiers.size();
        return n;
    }

    // Adds the entity, assigning a fresh id when none is set.
    EntityId add_entity(Entity e) {
        if (e.label.empty()) throw data_error("entity label must be nonempty");
        if (e.id.empty()) e.id = next_entity_id();
        if (entities_.count(e.id)) throw data_error("duplicate entity id '" + e.id + "'");
        bump_entity_counter(e.id);
        label_index_[normalize_label(e.label)].insert(e.id);
        EntityId id = e.id;
        entities_.emplace(id, std::move(e));
        return id;
    }

    // Adds a triple; returns the id it lives under, which is an existing
    // triple's id when the (s, p, o, qualifier multiset) already occurs.
    TripleId add_triple(Triple t) {
        check_triple_refs(t);
        std::string key = dup_key(t);
        auto dup = dup_index_.find(key);
        if (dup != dup_index_.end()) return dup->second;
        if (t.id.empty()) t.id = next_triple_id();
        if (triples_.count(t.id)) throw data_error("duplicate triple id '" + t.id + "'");
        bump_triple_counter(t.id);
        index_triple(t);
        TripleId id = t.id;
        triples_.emplace(id, std::move(t));
        return id;
    }

    void add_entity_type(const EntityId& e, const TypeId& t) {
        auto it = entities_.find(e);
        if (it == entities_.end()) throw data_error("unknown entity id '" + e + "'");
        it->second.types.insert(t);
    }

    // Swaps subject and object. Returns the surviving triple id: the
    // swapped form may collide with an existing triple, in which case the
    // swapped one is dropped in favor of the existing record.
    TripleId swap_triple(const TripleId& id, bool mark_auto = false) {
        Triple t = triple(id);
        if (entity(t.object).literal_kind)
            throw data_error("swap would place literal entity '" + t.object + "' in subject position");
        unindex_triple(t);
        triples_.erase(id);
        std::swap(t.subject, t.object);
        if (mark_auto) t.flags.auto_swapped = true;
        return reinsert(std::move(t));
    }

    TripleId replace_predicate(const TripleId& id, const PredicateId& p) {
        Triple t = triple(id);
        unindex_triple(t);
        triples_.erase(id);
        t.predicate = p;
        return reinsert(std::move(t));
    }

    TripleId replace_qualifier_predicate(const TripleId& id, size_t qidx, const PredicateId& p) {
        Triple t = triple(id);
        if (qidx >= t.qualifiers.size()) throw data_error("qualifier index out of range");
        unindex_triple(t);
        triples_.erase(id);
        t.qualifiers[qidx].predicate = p;
        return reinsert(std::move(t));
    }

    void set_flag_unrepairable(const TripleId& id) { triples_.at(id).flags.unrepairable = true; }

    // Folds `dup` into `pivot`: triples are re-pointed, field sets
    // unioned, and `alias` (when nonempty) becomes the merged label.
    void merge_entity_into(const EntityId& dup, const EntityId& pivot, const std::string& alias) {
        if (dup == pivot) return;
        Entity& p = entities_.at(pivot);
        Entity d = entity(dup);

        std::set<TripleId> touched = incident_triples(dup);
        for (const TripleId& tid : touched) {
            Triple t = triples_.at(tid);
            unindex_triple(t);
            triples_.erase(tid);
            if (t.subject == dup) t.subject = pivot;
            if (t.object == dup) t.object = pivot;
            for (Qualifier& q : t.qualifiers)
                if (q.object == dup) q.object = pivot;
            reinsert(std::move(t));
        }

        label_index_[normalize_label(d.label)].erase(dup);
        if (label_index_[normalize_label(d.label)].empty())
            label_index_.erase(normalize_label(d.label));
        entities_.erase(dup);

        p.types.insert(d.types.begin(), d.types.end());
        p.provenance.insert(d.provenance.begin(), d.provenance.end());
        add_alias(p, d.label);
        for (const std::string& a : d.aliases) add_alias(p, a);
        if (!alias.empty() && alias != p.label) {
            add_alias(p, p.label);
            label_index_[normalize_label(p.label)].erase(pivot);
            if (label_index_[normalize_label(p.label)].empty())
                label_index_.erase(normalize_label(p.label));
            p.label = alias;
            label_index_[normalize_label(alias)].insert(pivot);
            // The new label may linger in the alias list; drop exact matches.
            p.aliases.erase(std::remove(p.aliases.begin(), p.aliases.end(), alias),
                            p.aliases.end());
        }
    }

    void rebuild_indexes() {
        label_index_.clear();
        pair_index_.clear();
        incidence_.clear();
        dup_index_.clear();
        for (const auto& [id, e] : entities_) label_index_[normalize_label(e.label)].insert(id);
        for (const auto& [id, t] : triples_) index_triple(t);
    }

    bool indexes_consistent() const {
        KnowledgeGraph copy = *this;
        copy.rebuild_indexes();
        return copy.label_index_ == label_index_ && copy.pair_index_ == pair_index_ &&
               copy.incidence_ == incidence_ && copy.dup_index_ == dup_index_;
    }

    bool operator==(const KnowledgeGraph& other) const {
        return ontology_hash == other.ontology_hash && entities_ == other.entities_ &&
               triples_ == other.triples_;
    }

private:
    std::map<EntityId, Entity> entities_;
    std::map<TripleId, Triple> triples_;
    std::map<std::string, std::set<EntityId>> label_index_;
    std::map<std::pair<EntityId, EntityId>, std::set<TripleId>> pair_index_;
    std::map<EntityId, std::set<TripleId>> incidence_;
    std::map<std::string, TripleId> dup_index_;
    uint64_t entity_counter_ = 0;
    uint64_t triple_counter_ = 0;

    static void add_alias(Entity& e, const std::string& alias) {
        if (alias == e.label) return;
        if (std::find(e.aliases.begin(), e.aliases.end(), alias) == e.aliases.end())
            e.aliases.push_back(alias);
    }

    EntityId next_entity_id() {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "e%06llu",
                      static_cast<unsigned long long>(++entity_counter_));
        return buf;
    }

    TripleId next_triple_id() {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "t%06llu",
                      static_cast<unsigned long long>(++triple_counter_));
        return buf;
    }

    // Keep the counters ahead of externally supplied ids of the same shape.
    void bump_entity_counter(const EntityId& id) {
        if (id.size() > 1 && id[0] == 'e') {
            uint64_t v = std::strtoull(id.c_str() + 1, nullptr, 10);
            entity_counter_ = std::max(entity_counter_, v);
        }
    }
    void bump_triple_counter(const TripleId& id) {
        if (id.size() > 1 && id[0] == 't') {
            uint64_t v = std::strtoull(id.c_str() + 1, nullptr, 10);
            triple_counter_ = std::max(triple_counter_, v);
        }
    }

    void check_triple_refs(const Triple& t) const {
        if (t.subject.empty()) throw data_error("triple subject must not be missing");
        const Entity& s = entity(t.subject);
        if (s.literal_kind)
            throw data_error("literal entity '" + t.subject + "' cannot be a triple subject");
        entity(t.object);
        for (const Qualifier& q : t.qualifiers) entity(q.object);
    }

    static std::string dup_key(const Triple& t) {
        std::vector<Qualifier> quals = t.qualifiers;
        std::sort(quals.begin(), quals.end());
        std::string key = t.subject + '\x1f' + t.predicate + '\x1f' + t.object;
        for (const Qualifier& q : quals) key += '\x1f' + q.predicate + '\x1e' + q.object;
        return key;
    }

    void index_triple(const Triple& t) {
        pair_index_[{t.subject, t.object}].insert(t.id);
        incidence_[t.subject].insert(t.id);
        incidence_[t.object].insert(t.id);
        for (const Qualifier& q : t.qualifiers) incidence_[q.object].insert(t.id);
        dup_index_[dup_key(t)] = t.id;
    }

    void unindex_triple(const Triple& t) {
        auto drop = [](auto& m, const auto& key, const TripleId& id) {
            auto it = m.find(key);
            if (it == m.end()) return;
            it->second.erase(id);
            if (it->second.empty()) m.erase(it);
        };
        drop(pair_index_, std::make_pair(t.subject, t.object), t.id);
        drop(incidence_, t.subject, t.id);
        drop(incidence_, t.object, t.id);
        for (const Qualifier& q : t.qualifiers) drop(incidence_, q.object, t.id);
        dup_index_.erase(dup_key(t));
    }

    // Re-adds a previously removed triple, coalescing into an existing
    // duplicate when one exists.
    TripleId reinsert(Triple t) {
        auto dup = dup_index_.find(dup_key(t));
        if (dup != dup_index_.end()) return dup->second;
        index_triple(t);
        TripleId id = t.id;
        triples_.emplace(id, std::move(t));
        return id;
    }
};

// Spec-facing wrapper validating the type id against the ontology.
inline void add_entity_type(KnowledgeGraph& kg, const Ontology& ont, const EntityId& e,
                            const TypeId& t) {
    ont.type(t);
    kg.add_entity_type(e, t);
}

// Unifies entities by normalized label; types, aliases and provenance are
// unioned and duplicate triples coalesce. Inputs must share an ontology.
inline KnowledgeGraph merge_graphs(const std::vector<const KnowledgeGraph*>& graphs) {
    KnowledgeGraph out;
    for (const KnowledgeGraph* g : graphs) {
        if (g->ontology_hash.empty()) continue;
        if (out.ontology_hash.empty())
            out.ontology_hash = g->ontology_hash;
        else if (out.ontology_hash != g->ontology_hash)
            throw data_error("cannot merge graphs canonicalized against different ontologies");
    }

    // Labels that occur in subject position anywhere; those entities stay
    // non-literal in the merged graph so the subject invariant holds.
    std::set<std::string> subject_labels;
    for (const KnowledgeGraph* g : graphs)
        for (const auto& [_, t] : g->triples())
            subject_labels.insert(normalize_label(g->entity(t.subject).label));

    std::map<std::string, EntityId> by_label;
    for (const KnowledgeGraph* g : graphs) {
        std::map<EntityId, EntityId> remap;
        for (const auto& [id, e] : g->entities()) {
            std::string key = normalize_label(e.label);
            auto it = by_label.find(key);
            if (it == by_label.end()) {
                Entity fresh = e;
                fresh.id.clear();
                if (subject_labels.count(key)) fresh.literal_kind.reset();
                EntityId nid = out.add_entity(std::move(fresh));
                by_label.emplace(key, nid);
                remap[id] = nid;
            } else {
                remap[id] = it->second;
                Entity& merged = out.entity_fields(it->second);
                merged.types.insert(e.types.begin(), e.types.end());
                merged.provenance.insert(e.provenance.begin(), e.provenance.end());
                auto add_alias = [&](const std::string& a) {
                    if (a != merged.label &&
                        std::find(merged.aliases.begin(), merged.aliases.end(), a) ==
                            merged.aliases.end())
                        merged.aliases.push_back(a);
                };
                if (e.label != merged.label) add_alias(e.label);
                for (const std::string& a : e.aliases) add_alias(a);
                if (!merged.literal_kind && e.literal_kind && !subject_labels.count(key))
                    merged.literal_kind = e.literal_kind;
            }
        }
        for (const auto& [id, t] : g->triples()) {
            Triple nt = t;
            nt.id.clear();
            nt.subject = remap.at(t.subject);
            nt.object = remap.at(t.object);
            for (Qualifier& q : nt.qualifiers) q.object = remap.at(q.object);
            out.add_triple(std::move(nt));
        }
    }
    return out;
}

// ---- persistence: JSON Lines ----

inline nlohmann::json entity_to_json(const Entity& e) {
    nlohmann::json j;
    j["kind"] = "entity";
    j["id"] = e.id;
    j["label"] = e.label;
    j["aliases"] = e.aliases;
    j["types"] = e.types;
    if (e.literal_kind) j["literal_kind"] = to_string(*e.literal_kind);
    j["provenance"] = e.provenance;
    return j;
}

inline nlohmann::json triple_to_json(const Triple& t) {
    nlohmann::json j;
    j["kind"] = "triple";
    j["id"] = t.id;
    j["subject"] = t.subject;
    j["predicate"] = t.predicate;
    j["object"] = t.object;
    nlohmann::json quals = nlohmann::json::array();
    for (const Qualifier& q : t.qualifiers)
        quals.push_back({{"predicate", q.predicate}, {"object", q.object}});
    j["qualifiers"] = quals;
    j["provenance"] = t.provenance;
    j["flags"] = {{"auto_swapped", t.flags.auto_swapped},
                  {"unrepairable", t.flags.unrepairable}};
    return j;
}

inline void save_kg(const KnowledgeGraph& kg, std::ostream& out) {
    nlohmann::json header = {{"kind", "kg"}, {"version", 1}, {"ontology_hash", kg.ontology_hash}};
    out << header.dump() << "\n";
    for (const auto& [_, e] : kg.entities()) out << entity_to_json(e).dump() << "\n";
    for (const auto& [_, t] : kg.triples()) out << triple_to_json(t).dump() << "\n";
}

inline KnowledgeGraph load_kg(std::istream& in) {
    KnowledgeGraph kg;
    std::string line;
    size_t line_no = 0;
    bool have_header = false;
    std::vector<Triple> pending;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            std::string kind = j.at("kind").get<std::string>();
            if (!have_header) {
                if (kind != "kg") throw data_error("expected kg header");
                if (j.at("version").get<int>() != 1) throw data_error("unsupported version");
                kg.ontology_hash = j.at("ontology_hash").get<std::string>();
                have_header = true;
            } else if (kind == "entity") {
                Entity e;
                e.id = j.at("id").get<std::string>();
                e.label = j.at("label").get<std::string>();
                e.aliases = j.at("aliases").get<std::vector<std::string>>();
                for (const auto& t : j.at("types")) e.types.insert(t.get<std::string>());
                if (j.contains("literal_kind"))
                    e.literal_kind = literal_kind_from_string(j.at("literal_kind").get<std::string>());
                for (const auto& p : j.at("provenance")) e.provenance.insert(p.get<std::string>());
                kg.add_entity(std::move(e));
            } else if (kind == "triple") {
                Triple t;
                t.id = j.at("id").get<std::string>();
                t.subject = j.at("subject").get<std::string>();
                t.predicate = j.at("predicate").get<std::string>();
                t.object = j.at("object").get<std::string>();
                for (const auto& q : j.at("qualifiers"))
                    t.qualifiers.push_back({q.at("predicate").get<std::string>(),
                                            q.at("object").get<std::string>()});
                t.provenance = j.at("provenance").get<std::string>();
                t.flags.auto_swapped = j.at("flags").at("auto_swapped").get<bool>();
                t.flags.unrepairable = j.at("flags").at("unrepairable").get<bool>();
                pending.push_back(std::move(t));
            } else {
                throw data_error("unknown record kind '" + kind + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw data_error("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const data_error& e) {
            throw data_error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw data_error("line 1: missing kg header");
    for (Triple& t : pending) kg.add_triple(std::move(t));
    return kg;
}

inline void save_kg_file(const KnowledgeGraph& kg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    save_kg(kg, out);
}

inline KnowledgeGraph load_kg_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "'");
    return load_kg(in);
}

}  // namespace oakmend
