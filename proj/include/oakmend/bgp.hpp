#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "oakmend/core.hpp"
#include "oakmend/kg.hpp"
#include "oakmend/ontology.hpp"
#include "oakmend/validate.hpp"

namespace oakmend {

struct Term {
    bool is_var = true;
    std::string name;

    bool operator==(const Term&) const = default;
    auto operator<=>(const Term&) const = default;
};

struct TriplePattern {
    Term subject;
    PredicateId predicate;
    Term object;

    bool operator==(const TriplePattern&) const = default;
};

// Conjunction of triple patterns over ground predicates; the WHERE-clause
// skeleton of a SPARQL query.
struct BasicGraphPattern {
    std::vector<TriplePattern> patterns;
    std::optional<std::string> template_tag;

    bool operator==(const BasicGraphPattern& o) const { return patterns == o.patterns; }
};

inline const std::vector<std::string>& bgp_templates() {
    static const std::vector<std::string> kTemplates = {
        "2p", "2i", "1p2i", "2i1p", "3p", "3i", "r-2i", "r-1p2i", "r-2i1p", "r-3i"};
    return kTemplates;
}

// Template shapes as (subject var, object var) index pairs, 1-based.
inline const std::vector<std::pair<int, int>>& template_shape(const std::string& name) {
    static const std::map<std::string, std::vector<std::pair<int, int>>> kShapes = {
        {"2p", {{1, 2}, {2, 3}}},
        {"2i", {{1, 3}, {2, 3}}},
        {"1p2i", {{1, 2}, {2, 4}, {3, 4}}},
        {"2i1p", {{1, 3}, {2, 3}, {3, 4}}},
        {"3p", {{1, 2}, {2, 3}, {3, 4}}},
        {"3i", {{1, 4}, {2, 4}, {3, 4}}},
        {"r-2i", {{1, 2}, {1, 3}}},
        {"r-1p2i", {{1, 2}, {1, 3}, {2, 4}}},
        {"r-2i1p", {{1, 2}, {2, 3}, {2, 4}}},
        {"r-3i", {{1, 2}, {1, 3}, {1, 4}}},
    };
    auto it = kShapes.find(name);
    if (it == kShapes.end()) throw data_error("unknown BGP template '" + name + "'");
    return it->second;
}

// ---- parsing & serialization ----

inline std::string term_to_text(const Term& t) { return t.is_var ? "?" + t.name : t.name; }

inline std::string bgp_to_text(const BasicGraphPattern& bgp) {
    std::string out;
    for (const TriplePattern& p : bgp.patterns) {
        if (!out.empty()) out += " ";
        out += term_to_text(p.subject) + " " + p.predicate + " " + term_to_text(p.object) + " .";
    }
    return out;
}

namespace detail {

inline std::vector<std::string> bgp_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string raw;
    while (in >> raw) {
        // A trailing period terminates the statement; split it off so
        // "?x2." parses. Standalone "." stays a token of its own.
        while (raw.size() > 1 && raw.back() == '.') {
            raw.pop_back();
            tokens.push_back(raw);
            raw = ".";
        }
        tokens.push_back(raw);
    }
    return tokens;
}

inline PredicateId resolve_bgp_predicate(const Ontology& ont, std::string token, size_t pos) {
    if (!token.empty() && token.back() == ':') token.pop_back();
    if (ont.has_predicate(token)) return token;
    std::string norm = normalize_label(token);
    std::optional<PredicateId> found;
    for (const auto& [id, spec] : ont.predicates()) {
        if (normalize_label(spec.label) == norm) {
            if (found) throw data_error("token " + std::to_string(pos) + ": predicate label '" +
                                        token + "' is ambiguous");
            found = id;
        }
    }
    if (!found)
        throw data_error("token " + std::to_string(pos) + ": unknown predicate '" + token + "'");
    return *found;
}

}  // namespace detail

// Grammar: period-separated `term predicate term`, where a term is ?name
// or a bare identifier (constant). Constants are permitted here and
// generalized away by normalize_bgp.
inline BasicGraphPattern parse_bgp(const Ontology& ont, const std::string& text) {
    std::vector<std::string> tokens = detail::bgp_tokens(text);
    BasicGraphPattern bgp;
    size_t i = 0;
    auto term_at = [&](size_t pos) {
        const std::string& tok = tokens[pos];
        if (tok == ".")
            throw data_error("syntax error at token " + std::to_string(pos + 1) +
                             ": unexpected '.'");
        Term t;
        if (tok[0] == '?') {
            if (tok.size() == 1)
                throw data_error("syntax error at token " + std::to_string(pos + 1) +
                                 ": empty variable name");
            t.is_var = true;
            t.name = tok.substr(1);
        } else {
            t.is_var = false;
            t.name = tok;
        }
        return t;
    };
    while (i < tokens.size()) {
        if (tokens[i] == ".") {  // stray separator
            ++i;
            continue;
        }
        TriplePattern p;
        p.subject = term_at(i);
        if (i + 1 >= tokens.size())
            throw data_error("syntax error at token " + std::to_string(tokens.size() + 1) +
                             ": incomplete triple pattern");
        if (tokens[i + 1][0] == '?' || tokens[i + 1] == ".")
            throw data_error("syntax error at token " + std::to_string(i + 2) +
                             ": expected a ground predicate");
        p.predicate = detail::resolve_bgp_predicate(ont, tokens[i + 1], i + 2);
        if (i + 2 >= tokens.size())
            throw data_error("syntax error at token " + std::to_string(tokens.size() + 1) +
                             ": incomplete triple pattern");
        p.object = term_at(i + 2);
        bgp.patterns.push_back(std::move(p));
        i += 3;
        if (i < tokens.size()) {
            if (tokens[i] != ".")
                throw data_error("syntax error at token " + std::to_string(i + 1) +
                                 ": expected '.'");
            ++i;
        }
    }
    if (bgp.patterns.empty()) throw data_error("syntax error at token 1: empty pattern");
    return bgp;
}

// Replaces each distinct constant with a fresh variable, then rejects the
// pattern (returns nullopt) if any predicate repeats, it has fewer than
// two patterns, or the variable graph is disconnected.
inline std::optional<BasicGraphPattern> normalize_bgp(const BasicGraphPattern& bgp) {
    BasicGraphPattern out = bgp;

    std::set<std::string> var_names;
    for (const TriplePattern& p : out.patterns) {
        if (p.subject.is_var) var_names.insert(p.subject.name);
        if (p.object.is_var) var_names.insert(p.object.name);
    }
    std::map<std::string, std::string> const_to_var;
    int fresh = 0;
    auto generalize = [&](Term& t) {
        if (t.is_var) return;
        auto it = const_to_var.find(t.name);
        if (it == const_to_var.end()) {
            std::string name;
            do {
                name = "c" + std::to_string(fresh++);
            } while (var_names.count(name));
            var_names.insert(name);
            it = const_to_var.emplace(t.name, name).first;
        }
        t = Term{true, it->second};
    };
    for (TriplePattern& p : out.patterns) {
        generalize(p.subject);
        generalize(p.object);
    }

    if (out.patterns.size() < 2) return std::nullopt;
    std::set<PredicateId> preds;
    for (const TriplePattern& p : out.patterns)
        if (!preds.insert(p.predicate).second) return std::nullopt;

    // Weak connectivity over patterns sharing a variable.
    size_t n = out.patterns.size();
    std::vector<bool> seen(n, false);
    std::vector<size_t> stack = {0};
    seen[0] = true;
    auto shares_var = [&](const TriplePattern& a, const TriplePattern& b) {
        for (const Term* ta : {&a.subject, &a.object})
            for (const Term* tb : {&b.subject, &b.object})
                if (ta->name == tb->name) return true;
        return false;
    };
    while (!stack.empty()) {
        size_t cur = stack.back();
        stack.pop_back();
        for (size_t j = 0; j < n; ++j)
            if (!seen[j] && shares_var(out.patterns[cur], out.patterns[j])) {
                seen[j] = true;
                stack.push_back(j);
            }
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) return std::nullopt;
    return out;
}

// Variable-bijection isomorphism with predicates matched exactly.
inline bool bgps_isomorphic(const BasicGraphPattern& a, const BasicGraphPattern& b) {
    if (a.patterns.size() != b.patterns.size()) return false;

    std::map<std::string, std::string> fwd, bwd;
    std::vector<bool> used(b.patterns.size(), false);
    auto try_map = [&](const Term& ta, const Term& tb, std::vector<std::pair<std::string, std::string>>& added) {
        if (ta.is_var != tb.is_var) return false;
        if (!ta.is_var) return ta.name == tb.name;  // constants must match exactly
        auto f = fwd.find(ta.name);
        auto g = bwd.find(tb.name);
        if (f != fwd.end() || g != bwd.end())
            return f != fwd.end() && g != bwd.end() && f->second == tb.name &&
                   g->second == ta.name;
        fwd[ta.name] = tb.name;
        bwd[tb.name] = ta.name;
        added.push_back({ta.name, tb.name});
        return true;
    };

    auto match = [&](auto&& self, size_t i) -> bool {
        if (i == a.patterns.size()) return true;
        const TriplePattern& pa = a.patterns[i];
        for (size_t j = 0; j < b.patterns.size(); ++j) {
            if (used[j] || b.patterns[j].predicate != pa.predicate) continue;
            std::vector<std::pair<std::string, std::string>> added;
            if (try_map(pa.subject, b.patterns[j].subject, added) &&
                try_map(pa.object, b.patterns[j].object, added)) {
                used[j] = true;
                if (self(self, i + 1)) return true;
                used[j] = false;
            }
            for (const auto& [x, y] : added) {
                fwd.erase(x);
                bwd.erase(y);
            }
        }
        return false;
    };
    return match(match, 0);
}

// Removes isomorphic duplicates, keeping the first representative.
// Buckets by sorted predicate multiset before the pairwise check.
inline std::vector<BasicGraphPattern> dedup_bgps(const std::vector<BasicGraphPattern>& bgps) {
    std::map<std::string, std::vector<size_t>> buckets;
    std::vector<BasicGraphPattern> out;
    for (const BasicGraphPattern& bgp : bgps) {
        std::vector<std::string> preds;
        for (const TriplePattern& p : bgp.patterns) preds.push_back(p.predicate);
        std::sort(preds.begin(), preds.end());
        std::string key = join(preds, "\x1f");
        bool dup = false;
        for (size_t idx : buckets[key]) {
            if (bgps_isomorphic(out[idx], bgp)) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            buckets[key].push_back(out.size());
            out.push_back(bgp);
        }
    }
    return out;
}

// ---- ontology KG & artificial generation ----

// Types as nodes, domain-range constraints as edges; an unconstrained
// side is represented by a synthetic "any" node compatible with every
// type. Predicates lacking both constraints contribute no edges.
struct OntologyKG {
    std::set<std::string> nodes;
    std::vector<std::tuple<std::string, PredicateId, std::string>> edges;
    // Per predicate: domain-side and range-side type sets (nullopt = any).
    std::map<PredicateId, std::pair<std::optional<std::set<TypeId>>, std::optional<std::set<TypeId>>>>
        sides;
    std::string any_node;
};

inline OntologyKG build_ontology_kg(const Ontology& ont,
                                    const std::vector<PredicateId>& predicate_subset) {
    OntologyKG okg;
    okg.any_node = "any";
    while (ont.has_type(okg.any_node)) okg.any_node += "_";  // keep the synthetic node fresh

    for (const PredicateId& pid : predicate_subset) {
        const PredicateSpec& spec = ont.predicate(pid);
        if (!spec.domain && !spec.range) continue;
        okg.sides[pid] = {spec.domain, spec.range};
        std::set<std::string> subjects =
            spec.domain ? std::set<std::string>(spec.domain->begin(), spec.domain->end())
                        : std::set<std::string>{okg.any_node};
        std::set<std::string> objects =
            spec.range ? std::set<std::string>(spec.range->begin(), spec.range->end())
                       : std::set<std::string>{okg.any_node};
        for (const std::string& s : subjects) {
            for (const std::string& o : objects) {
                okg.nodes.insert(s);
                okg.nodes.insert(o);
                okg.edges.push_back({s, pid, o});
            }
        }
    }
    return okg;
}

namespace detail {

// Down-set of a constraint side: every type that could instantiate it.
inline std::optional<std::set<TypeId>> side_downset(const Ontology& ont,
                                                    const std::optional<std::set<TypeId>>& side) {
    if (!side) return std::nullopt;  // any
    std::set<TypeId> out;
    for (const TypeId& t : *side) {
        const std::set<TypeId>& d = ont.descendants(t);
        out.insert(d.begin(), d.end());
    }
    return out;
}

inline bool downsets_meet(const std::vector<const std::set<TypeId>*>& sets) {
    if (sets.empty()) return true;
    const std::set<TypeId>* smallest = sets.front();
    for (const auto* s : sets)
        if (s->size() < smallest->size()) smallest = s;
    for (const TypeId& t : *smallest) {
        bool in_all = true;
        for (const auto* s : sets) {
            if (s == smallest) continue;
            if (!s->count(t)) {
                in_all = false;
                break;
            }
        }
        if (in_all) return true;
    }
    return false;
}

}  // namespace detail

// Exhaustively enumerates assignments of distinct ground predicates to a
// template, keeping those realizable on the ontology KG: every shared
// node needs a nonempty subtype-closed intersection of the constraint
// sides meeting there ("any" is compatible with everything). Above `cap`,
// a uniform seeded sample is returned.
inline std::vector<BasicGraphPattern> generate_bgps(const Ontology& ont, const OntologyKG& okg,
                                                    const std::string& template_name, size_t cap,
                                                    uint64_t seed) {
    if (cap < 1) throw data_error("generate_bgps: cap must be >= 1");
    const auto& shape = template_shape(template_name);
    int max_var = 0;
    for (const auto& [s, o] : shape) max_var = std::max({max_var, s, o});

    std::vector<PredicateId> preds;
    preds.reserve(okg.sides.size());
    for (const auto& [pid, _] : okg.sides) preds.push_back(pid);

    // Downsets once per predicate side.
    std::map<PredicateId, std::pair<std::optional<std::set<TypeId>>, std::optional<std::set<TypeId>>>>
        downs;
    for (const auto& [pid, sides] : okg.sides)
        downs[pid] = {detail::side_downset(ont, sides.first),
                      detail::side_downset(ont, sides.second)};

    std::vector<BasicGraphPattern> found;
    std::vector<size_t> choice(shape.size());
    auto realizable = [&]() {
        for (int v = 1; v <= max_var; ++v) {
            std::vector<const std::set<TypeId>*> constraints;
            for (size_t i = 0; i < shape.size(); ++i) {
                const auto& [sv, ov] = shape[i];
                const auto& [dom_down, rng_down] = downs.at(preds[choice[i]]);
                if (sv == v && dom_down) constraints.push_back(&*dom_down);
                if (ov == v && rng_down) constraints.push_back(&*rng_down);
            }
            if (!detail::downsets_meet(constraints)) return false;
        }
        return true;
    };

    auto emit = [&]() {
        BasicGraphPattern bgp;
        bgp.template_tag = template_name;
        for (size_t i = 0; i < shape.size(); ++i) {
            TriplePattern p;
            p.subject = Term{true, "x" + std::to_string(shape[i].first)};
            p.predicate = preds[choice[i]];
            p.object = Term{true, "x" + std::to_string(shape[i].second)};
            bgp.patterns.push_back(std::move(p));
        }
        found.push_back(std::move(bgp));
    };

    auto enumerate = [&](auto&& self, size_t slot) -> void {
        if (slot == shape.size()) {
            if (realizable()) emit();
            return;
        }
        for (size_t i = 0; i < preds.size(); ++i) {
            bool taken = false;
            for (size_t j = 0; j < slot; ++j)
                if (choice[j] == i) taken = true;
            if (taken) continue;  // benchmark filter: no repeated predicate
            choice[slot] = i;
            self(self, slot + 1);
        }
    };
    enumerate(enumerate, 0);

    std::vector<BasicGraphPattern> deduped = dedup_bgps(found);
    if (deduped.size() <= cap) return deduped;

    // Deterministic partial Fisher-Yates; avoids stdlib distribution
    // differences across platforms.
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < cap; ++i) {
        size_t j = i + static_cast<size_t>(rng() % (deduped.size() - i));
        std::swap(deduped[i], deduped[j]);
    }
    deduped.resize(cap);
    return deduped;
}

// ---- matching ----

// Pre-filtered match universe: triples violating the ontology are
// excluded; duplicate (s, o) pairs per predicate collapse, since match
// counting is over distinct entity assignments.
struct MatchIndex {
    std::map<PredicateId, std::vector<std::pair<EntityId, EntityId>>> pairs;
    std::map<PredicateId, std::map<EntityId, std::vector<EntityId>>> by_subject;
    std::map<PredicateId, std::map<EntityId, std::vector<EntityId>>> by_object;
    std::map<PredicateId, std::set<std::pair<EntityId, EntityId>>> pair_set;

    static MatchIndex build(const Ontology& ont, const KnowledgeGraph& kg) {
        MatchIndex idx;
        for (const auto& [_, t] : kg.triples()) {
            if (!validate_triple(ont, kg, t).empty()) continue;
            if (idx.pair_set[t.predicate].insert({t.subject, t.object}).second) {
                idx.pairs[t.predicate].push_back({t.subject, t.object});
                idx.by_subject[t.predicate][t.subject].push_back(t.object);
                idx.by_object[t.predicate][t.object].push_back(t.subject);
            }
        }
        return idx;
    }
};

// Distinct total variable assignments satisfying every pattern; variables
// may co-bind (homomorphism semantics). Backtracking join, patterns
// ordered by ascending candidate count.
inline uint64_t match_count(const MatchIndex& index, const BasicGraphPattern& bgp) {
    std::vector<const TriplePattern*> order;
    for (const TriplePattern& p : bgp.patterns) order.push_back(&p);
    auto candidates_of = [&](const TriplePattern* p) -> size_t {
        auto it = index.pairs.find(p->predicate);
        return it == index.pairs.end() ? 0 : it->second.size();
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](const TriplePattern* a, const TriplePattern* b) {
                         return candidates_of(a) < candidates_of(b);
                     });

    std::map<std::string, EntityId> bound;
    auto resolved = [&](const Term& t) -> std::optional<EntityId> {
        if (!t.is_var) return t.name;
        auto it = bound.find(t.name);
        if (it == bound.end()) return std::nullopt;
        return it->second;
    };

    auto count = [&](auto&& self, size_t i) -> uint64_t {
        if (i == order.size()) return 1;
        const TriplePattern& p = *order[i];
        auto pit = index.pairs.find(p.predicate);
        if (pit == index.pairs.end()) return 0;

        std::optional<EntityId> s = resolved(p.subject);
        std::optional<EntityId> o = resolved(p.object);
        uint64_t total = 0;

        auto with_binding = [&](const Term& term, const EntityId& value, auto&& fn) -> uint64_t {
            if (!term.is_var) return term.name == value ? fn() : 0;
            auto it = bound.find(term.name);
            if (it != bound.end()) return it->second == value ? fn() : 0;
            bound[term.name] = value;
            uint64_t r = fn();
            bound.erase(term.name);
            return r;
        };

        if (s && o) {
            auto set_it = index.pair_set.find(p.predicate);
            if (set_it != index.pair_set.end() && set_it->second.count({*s, *o}))
                total += self(self, i + 1);
        } else if (s) {
            auto bs = index.by_subject.find(p.predicate);
            if (bs != index.by_subject.end()) {
                auto row = bs->second.find(*s);
                if (row != bs->second.end())
                    for (const EntityId& obj : row->second)
                        total += with_binding(p.object, obj, [&] { return self(self, i + 1); });
            }
        } else if (o) {
            auto bo = index.by_object.find(p.predicate);
            if (bo != index.by_object.end()) {
                auto row = bo->second.find(*o);
                if (row != bo->second.end())
                    for (const EntityId& subj : row->second)
                        total += with_binding(p.subject, subj, [&] { return self(self, i + 1); });
            }
        } else {
            for (const auto& [subj, obj] : pit->second) {
                total += with_binding(p.subject, subj, [&] {
                    return with_binding(p.object, obj, [&] { return self(self, i + 1); });
                });
            }
        }
        return total;
    };
    return count(count, 0);
}

inline uint64_t match_count(const Ontology& ont, const KnowledgeGraph& kg,
                            const BasicGraphPattern& bgp) {
    return match_count(MatchIndex::build(ont, kg), bgp);
}

// ---- metrics ----

// Largest n such that at least n patterns have frequency >= n.
inline uint64_t h_index(std::vector<uint64_t> frequencies) {
    std::sort(frequencies.begin(), frequencies.end(), std::greater<>());
    uint64_t h = 0;
    for (size_t i = 0; i < frequencies.size(); ++i)
        if (frequencies[i] >= i + 1) h = i + 1;
    return h;
}

inline uint64_t i_k_index(const std::vector<uint64_t>& frequencies, uint64_t k) {
    uint64_t n = 0;
    for (uint64_t f : frequencies)
        if (f >= k) ++n;
    return n;
}

struct EdgeStats {
    std::optional<double> avg_multiplicity;
    std::optional<double> pct_pairs_multi;
};

// Over ordered (subject, object) pairs connected by at least one valid
// triple: mean number of distinct predicates, and the share of pairs
// with two or more.
inline EdgeStats edge_stats(const Ontology& ont, const KnowledgeGraph& kg) {
    std::map<std::pair<EntityId, EntityId>, std::set<PredicateId>> pair_preds;
    for (const auto& [_, t] : kg.triples()) {
        if (!validate_triple(ont, kg, t).empty()) continue;
        pair_preds[{t.subject, t.object}].insert(t.predicate);
    }
    EdgeStats stats;
    if (pair_preds.empty()) return stats;
    uint64_t total = 0, multi = 0;
    for (const auto& [_, preds] : pair_preds) {
        total += preds.size();
        if (preds.size() >= 2) ++multi;
    }
    stats.avg_multiplicity = static_cast<double>(total) / static_cast<double>(pair_preds.size());
    stats.pct_pairs_multi =
        100.0 * static_cast<double>(multi) / static_cast<double>(pair_preds.size());
    return stats;
}

// ---- files & reports ----

// One pattern body per line; '#' starts a comment.
inline std::vector<BasicGraphPattern> parse_bgp_file(const Ontology& ont,
                                                     const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open BGP file '" + path + "'");
    std::vector<BasicGraphPattern> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (collapse_ws(line).empty()) continue;
        try {
            out.push_back(parse_bgp(ont, line));
        } catch (const data_error& e) {
            throw data_error("BGP file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

inline void write_bgp_file(const std::vector<BasicGraphPattern>& bgps, std::ostream& out) {
    for (const BasicGraphPattern& bgp : bgps) {
        if (bgp.template_tag) out << "# template: " << *bgp.template_tag << "\n";
        out << bgp_to_text(bgp) << "\n";
    }
}

struct BgpMetrics {
    uint64_t h = 0;
    uint64_t i10 = 0;
    uint64_t i100 = 0;
    EdgeStats edges;
    std::vector<std::pair<BasicGraphPattern, uint64_t>> per_bgp;

    nlohmann::json to_json() const {
        nlohmann::json per = nlohmann::json::array();
        for (const auto& [bgp, count] : per_bgp)
            per.push_back({{"bgp", bgp_to_text(bgp)}, {"count", count}});
        return {{"h_index", h},
                {"i10_index", i10},
                {"i100_index", i100},
                {"avg_multiplicity", edges.avg_multiplicity
                                         ? nlohmann::json(*edges.avg_multiplicity)
                                         : nlohmann::json(nullptr)},
                {"pct_pairs_multi", edges.pct_pairs_multi
                                        ? nlohmann::json(*edges.pct_pairs_multi)
                                        : nlohmann::json(nullptr)},
                {"per_bgp", per}};
    }
};

inline BgpMetrics evaluate_bgps(const Ontology& ont, const KnowledgeGraph& kg,
                                const std::vector<BasicGraphPattern>& bgps) {
    MatchIndex index = MatchIndex::build(ont, kg);
    BgpMetrics metrics;
    std::vector<uint64_t> freqs;
    for (const BasicGraphPattern& bgp : bgps) {
        uint64_t c = match_count(index, bgp);
        freqs.push_back(c);
        metrics.per_bgp.push_back({bgp, c});
    }
    metrics.h = h_index(freqs);
    metrics.i10 = i_k_index(freqs, 10);
    metrics.i100 = i_k_index(freqs, 100);
    metrics.edges = edge_stats(ont, kg);
    return metrics;
}

}  // namespace oakmend
