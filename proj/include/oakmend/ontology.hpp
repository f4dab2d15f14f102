#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oakmend/core.hpp"

namespace oakmend {

struct TypeNode {
    TypeId id;
    std::string label;
    std::vector<std::string> aliases;
    std::set<TypeId> parents;  // is-subclass-of edges
};

struct PredicateSpec {
    PredicateId id;
    std::string label;
    std::vector<std::string> aliases;
    std::optional<std::set<TypeId>> domain;              // absent = unconstrained
    std::optional<std::set<TypeId>> range;               // absent = unconstrained
    std::optional<std::set<PredicateId>> allowed_qualifiers;  // absent = unconstrained
    bool is_qualifier = false;
};

// Type hierarchy plus predicate constraint records. Immutable after load;
// the reflexive-transitive ancestor closure is precomputed, so all
// constraint queries are set lookups.
class Ontology {
public:
    Ontology() = default;

    static Ontology from_json(const nlohmann::json& doc);
    static Ontology load_file(const std::string& path);

    const std::map<TypeId, TypeNode>& types() const { return types_; }
    const std::map<PredicateId, PredicateSpec>& predicates() const { return predicates_; }

    bool has_type(const TypeId& t) const { return types_.count(t) > 0; }
    bool has_predicate(const PredicateId& p) const { return predicates_.count(p) > 0; }

    const TypeNode& type(const TypeId& t) const {
        auto it = types_.find(t);
        if (it == types_.end()) throw data_error("unknown type id '" + t + "'");
        return it->second;
    }

    const PredicateSpec& predicate(const PredicateId& p) const {
        auto it = predicates_.find(p);
        if (it == predicates_.end()) throw data_error("unknown predicate id '" + p + "'");
        return it->second;
    }

    // Reflexive-transitive ancestor set of t.
    const std::set<TypeId>& ancestors(const TypeId& t) const {
        type(t);
        return closure_.at(t);
    }

    // Reflexive-transitive descendant set of t (inverse closure).
    const std::set<TypeId>& descendants(const TypeId& t) const {
        type(t);
        return down_closure_.at(t);
    }

    // t ≼ u under the reflexive-transitive subclass ordering.
    bool is_subtype(const TypeId& t, const TypeId& u) const {
        type(u);
        return ancestors(t).count(u) > 0;
    }

    // True when the constraint is absent, else when some member of
    // `types` is a subtype of some constraint member.
    bool types_satisfy(const std::set<TypeId>& types,
                       const std::optional<std::set<TypeId>>& constraint) const {
        if (!constraint) return true;
        for (const TypeId& t : types) {
            const std::set<TypeId>& up = ancestors(t);
            for (const TypeId& u : *constraint) {
                if (up.count(u)) return true;
            }
        }
        return false;
    }

    bool qualifier_allowed(const PredicateId& r, const PredicateId& r_q) const {
        const PredicateSpec& spec = predicate(r);
        const PredicateSpec& qual = predicate(r_q);
        if (!qual.is_qualifier)
            throw data_error("predicate '" + r_q + "' is not a qualifier predicate");
        if (!spec.allowed_qualifiers) return true;
        return spec.allowed_qualifiers->count(r_q) > 0;
    }

    // Stable content hash of the source document; stamps graphs and
    // pipeline artifacts so mixed-ontology inputs are rejected.
    const std::string& hash() const { return hash_; }

private:
    std::map<TypeId, TypeNode> types_;
    std::map<PredicateId, PredicateSpec> predicates_;
    std::map<TypeId, std::set<TypeId>> closure_;
    std::map<TypeId, std::set<TypeId>> down_closure_;
    std::string hash_;

    void compute_closure();
};

namespace detail {

inline std::string locate(const char* section, size_t index, const std::string& id) {
    std::ostringstream os;
    os << section << "[" << index << "]";
    if (!id.empty()) os << " ('" << id << "')";
    return os.str();
}

inline std::vector<std::string> string_array(const nlohmann::json& j, const std::string& where,
                                             const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    const nlohmann::json& arr = j.at(key);
    if (!arr.is_array()) throw data_error(where + ": '" + key + "' must be an array of strings");
    for (const auto& v : arr) {
        if (!v.is_string()) throw data_error(where + ": '" + key + "' must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

inline std::string required_string(const nlohmann::json& j, const std::string& where,
                                   const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw data_error(where + ": missing string field '" + key + "'");
    return j.at(key).get<std::string>();
}

}  // namespace detail

inline Ontology Ontology::from_json(const nlohmann::json& doc) {
    Ontology ont;
    if (!doc.is_object()) throw data_error("ontology document must be a JSON object");

    if (doc.contains("types")) {
        const nlohmann::json& arr = doc.at("types");
        if (!arr.is_array()) throw data_error("'types' must be an array");
        for (size_t i = 0; i < arr.size(); ++i) {
            const nlohmann::json& j = arr[i];
            std::string where = detail::locate("types", i, j.value("id", std::string()));
            TypeNode node;
            node.id = detail::required_string(j, where, "id");
            node.label = detail::required_string(j, where, "label");
            node.aliases = detail::string_array(j, where, "aliases");
            for (const auto& p : detail::string_array(j, where, "parents"))
                node.parents.insert(p);
            if (ont.types_.count(node.id))
                throw data_error(where + ": duplicate type id");
            ont.types_.emplace(node.id, std::move(node));
        }
    }

    if (doc.contains("predicates")) {
        const nlohmann::json& arr = doc.at("predicates");
        if (!arr.is_array()) throw data_error("'predicates' must be an array");
        for (size_t i = 0; i < arr.size(); ++i) {
            const nlohmann::json& j = arr[i];
            std::string where = detail::locate("predicates", i, j.value("id", std::string()));
            PredicateSpec spec;
            spec.id = detail::required_string(j, where, "id");
            spec.label = detail::required_string(j, where, "label");
            spec.aliases = detail::string_array(j, where, "aliases");
            spec.is_qualifier = j.value("is_qualifier", false);
            // An explicitly empty constraint set is unsatisfiable and
            // rejected; "no constraint" is spelled by omitting the key.
            auto constraint_set = [&](const char* key) -> std::optional<std::set<TypeId>> {
                if (!j.contains(key)) return std::nullopt;
                auto items = detail::string_array(j, where, key);
                if (items.empty())
                    throw data_error(where + ": '" + std::string(key) +
                                     "' is present but empty; omit the key for no constraint");
                return std::set<TypeId>(items.begin(), items.end());
            };
            spec.domain = constraint_set("domain");
            spec.range = constraint_set("range");
            spec.allowed_qualifiers = constraint_set("allowed_qualifiers");
            if (ont.predicates_.count(spec.id))
                throw data_error(where + ": duplicate predicate id");
            ont.predicates_.emplace(spec.id, std::move(spec));
        }
    }

    // Reference checks after both maps exist.
    {
        size_t i = 0;
        for (const auto& [id, node] : ont.types_) {
            std::string where = detail::locate("types", i++, id);
            for (const TypeId& p : node.parents) {
                if (!ont.types_.count(p))
                    throw data_error(where + ": unknown parent type '" + p + "'");
            }
        }
    }
    {
        size_t i = 0;
        for (const auto& [id, spec] : ont.predicates_) {
            std::string where = detail::locate("predicates", i++, id);
            for (const auto* cons : {&spec.domain, &spec.range}) {
                if (!*cons) continue;
                for (const TypeId& t : **cons) {
                    if (!ont.types_.count(t))
                        throw data_error(where + ": unknown type '" + t + "' in constraint");
                }
            }
            if (spec.allowed_qualifiers) {
                for (const PredicateId& q : *spec.allowed_qualifiers) {
                    auto it = ont.predicates_.find(q);
                    if (it == ont.predicates_.end())
                        throw data_error(where + ": unknown qualifier predicate '" + q + "'");
                    if (!it->second.is_qualifier)
                        throw data_error(where + ": allowed qualifier '" + q +
                                         "' is not flagged is_qualifier");
                }
            }
        }
    }

    ont.compute_closure();
    ont.hash_ = hex64(fnv1a64(doc.dump()));
    return ont;
}

inline Ontology Ontology::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open ontology file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("ontology file '" + path + "': " + e.what());
    }
    return from_json(doc);
}

inline void Ontology::compute_closure() {
    // Memoized DFS; gray marks detect hierarchy cycles.
    enum class Mark { white, gray, black };
    std::map<TypeId, Mark> mark;
    for (const auto& [id, _] : types_) mark[id] = Mark::white;

    auto visit = [&](auto&& self, const TypeId& t) -> void {
        Mark& m = mark[t];
        if (m == Mark::gray)
            throw data_error("type hierarchy cycle involving '" + t + "'");
        if (m == Mark::black) return;
        m = Mark::gray;
        std::set<TypeId> up;
        up.insert(t);
        for (const TypeId& p : types_.at(t).parents) {
            self(self, p);
            const std::set<TypeId>& pa = closure_.at(p);
            up.insert(pa.begin(), pa.end());
        }
        closure_[t] = std::move(up);
        m = Mark::black;
    };
    for (const auto& [id, _] : types_) visit(visit, id);

    for (const auto& [id, _] : types_) down_closure_[id] = {};
    for (const auto& [id, up] : closure_) {
        for (const TypeId& a : up) down_closure_[a].insert(id);
    }
}

// Free-function spellings of the constraint queries; match the operation
// names used across the pipeline modules.
inline Ontology load_ontology(const nlohmann::json& doc) { return Ontology::from_json(doc); }

inline bool is_subtype(const Ontology& ont, const TypeId& t, const TypeId& u) {
    return ont.is_subtype(t, u);
}

inline bool types_satisfy(const Ontology& ont, const std::set<TypeId>& types,
                          const std::optional<std::set<TypeId>>& constraint) {
    return ont.types_satisfy(types, constraint);
}

inline bool qualifier_allowed(const Ontology& ont, const PredicateId& r, const PredicateId& r_q) {
    return ont.qualifier_allowed(r, r_q);
}

}  // namespace oakmend
