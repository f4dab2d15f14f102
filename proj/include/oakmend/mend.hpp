#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oakmend/canon.hpp"
#include "oakmend/core.hpp"
#include "oakmend/kg.hpp"
#include "oakmend/llm.hpp"
#include "oakmend/ontology.hpp"
#include "oakmend/prompts.hpp"
#include "oakmend/validate.hpp"

namespace oakmend {

struct TripleAction {
    enum class Kind { swap_so, replace_predicate, add_subject_type, add_object_type };
    Kind kind;
    std::string value;  // resolved type/predicate id; empty for swap

    bool operator==(const TripleAction&) const = default;
};

struct QualifierAction {
    enum class Kind { replace_predicate, add_object_type };
    Kind kind;
    std::string value;

    bool operator==(const QualifierAction&) const = default;
};

enum class PlanOutcome { fixed, still_invalid, declined };

inline const char* to_string(PlanOutcome o) {
    switch (o) {
        case PlanOutcome::fixed: return "fixed";
        case PlanOutcome::still_invalid: return "still_invalid";
        case PlanOutcome::declined: return "declined";
    }
    return "?";
}

struct TriplePlan {
    TripleId triple;
    std::vector<TripleAction> actions;  // empty => declined
    std::vector<PredicateId> offered_predicates;
    PlanOutcome outcome = PlanOutcome::declined;
};

struct QualifierPlan {
    TripleId triple;
    size_t qualifier_index = 0;
    std::optional<QualifierAction> action;  // absent => declined
    std::vector<PredicateId> offered_predicates;
    PlanOutcome outcome = PlanOutcome::declined;
};

// Deterministic subject-object transposition: applied exactly when the
// triple violates dom/rng but the swapped orientation satisfies both.
// Zero chat calls; id-ascending order; swaps that would collide with an
// existing triple coalesce into it.
inline uint64_t auto_swap_pass(const Ontology& ont, KnowledgeGraph& kg) {
    uint64_t swaps = 0;
    std::vector<TripleId> ids;
    for (const auto& [id, _] : kg.triples()) ids.push_back(id);
    for (const TripleId& id : ids) {
        if (!kg.has_triple(id)) continue;  // coalesced by an earlier swap
        const Triple& t = kg.triple(id);
        if (validate_triple(ont, kg, t).empty()) continue;
        const PredicateSpec& spec = ont.predicate(t.predicate);
        const Entity& new_subject = kg.entity(t.object);
        if (new_subject.literal_kind) continue;
        if (ont.types_satisfy(new_subject.types, spec.domain) &&
            ont.types_satisfy(kg.entity(t.subject).types, spec.range)) {
            kg.swap_triple(id, /*mark_auto=*/true);
            ++swaps;
        }
    }
    return swaps;
}

// Replacement predicates r' such that (s, r', o) satisfies dom(r') and
// rng(r') under current types, ranked by label similarity to r.
inline std::vector<PredicateId> candidate_predicates(const Ontology& ont, EmbedClient& embed,
                                                     const KnowledgeGraph& kg, const Triple& t,
                                                     size_t k = 10) {
    if (k < 1) throw data_error("candidate_predicates: k must be >= 1");
    const Entity& s = kg.entity(t.subject);
    const Entity& o = kg.entity(t.object);
    const std::string& current_label = ont.predicate(t.predicate).label;

    std::vector<std::pair<double, PredicateId>> scored;
    for (const auto& [id, spec] : ont.predicates()) {
        if (spec.is_qualifier) continue;
        if (!ont.types_satisfy(s.types, spec.domain)) continue;
        if (!ont.types_satisfy(o.types, spec.range)) continue;
        scored.push_back({embed.similarity(current_label, spec.label), id});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<PredicateId> out;
    for (const auto& [_, id] : scored) {
        out.push_back(id);
        if (out.size() == k) break;
    }
    return out;
}

namespace detail {

// Exact id/label matches take precedence over alias matches.
inline std::optional<TypeId> resolve_type(const Ontology& ont, const std::string& value) {
    std::string norm = normalize_label(value);
    for (const auto& [id, t] : ont.types())
        if (normalize_label(id) == norm || normalize_label(t.label) == norm) return id;
    for (const auto& [id, t] : ont.types())
        for (const std::string& a : t.aliases)
            if (normalize_label(a) == norm) return id;
    return std::nullopt;
}

inline std::optional<PredicateId> resolve_among(const Ontology& ont,
                                                const std::vector<PredicateId>& candidates,
                                                const std::string& value) {
    std::string norm = normalize_label(value);
    for (const PredicateId& id : candidates) {
        if (normalize_label(id) == norm) return id;
        if (normalize_label(ont.predicate(id).label) == norm) return id;
    }
    for (const PredicateId& id : candidates)
        for (const std::string& a : ont.predicate(id).aliases)
            if (normalize_label(a) == norm) return id;
    return std::nullopt;
}

// Parses a "[[action, value], ...]" response; any unknown action or
// out-of-candidate value invalidates the whole plan.
inline std::optional<std::vector<TripleAction>> parse_triple_actions(
    const Ontology& ont, const std::vector<PredicateId>& candidates, const std::string& response) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(strip_code_fence(response));
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!j.is_array()) return std::nullopt;
    const std::vector<TripleAction> invalid_plan;  // engaged-but-empty: declined, no retry
    std::vector<TripleAction> actions;
    for (const auto& item : j) {
        if (!item.is_array() || item.size() < 1 || !item.at(0).is_string()) return invalid_plan;
        std::string action = item.at(0).get<std::string>();
        std::string value =
            item.size() > 1 && item.at(1).is_string() ? item.at(1).get<std::string>() : "";
        if (action == "swap") {
            actions.push_back({TripleAction::Kind::swap_so, ""});
        } else if (action == "replace_predicate") {
            auto id = resolve_among(ont, candidates, value);
            if (!id) return invalid_plan;
            actions.push_back({TripleAction::Kind::replace_predicate, *id});
        } else if (action == "add_subject_type" || action == "add_object_type") {
            auto id = resolve_type(ont, value);
            if (!id) return invalid_plan;
            actions.push_back({action == "add_subject_type"
                                   ? TripleAction::Kind::add_subject_type
                                   : TripleAction::Kind::add_object_type,
                               *id});
        } else {
            return invalid_plan;  // unknown action: whole plan invalid
        }
    }
    return actions;
}

}  // namespace detail

// One chat call offering the corrective-action vocabulary; a response
// that fails to parse gets one retry, after which the plan is declined.
inline TriplePlan plan_triple_correction(const Ontology& ont, ChatClient& chat,
                                         EmbedClient& embed, const KnowledgeGraph& kg,
                                         const Triple& t, const std::vector<Violation>& violations,
                                         const std::string& chunk_text, size_t candidate_k = 10) {
    TriplePlan plan;
    plan.triple = t.id;
    plan.offered_predicates = candidate_predicates(ont, embed, kg, t, candidate_k);

    const PredicateSpec& spec = ont.predicate(t.predicate);
    std::vector<std::string> explanations;
    for (const Violation& v : violations) explanations.push_back(v.explanation);
    std::string prompt = prompts::build_triple_correction_prompt(
        ont, chunk_text, kg.entity(t.subject).label, spec.label, kg.entity(t.object).label,
        spec.domain, spec.range, plan.offered_predicates, explanations);

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response = chat.chat(Stage::mend_triple, prompt);
        auto actions = detail::parse_triple_actions(ont, plan.offered_predicates, response);
        if (!actions) continue;  // unparseable: one retry
        plan.actions = std::move(*actions);
        break;
    }
    plan.outcome = PlanOutcome::declined;  // finalized by apply_plan
    return plan;
}

struct ApplyResult {
    PlanOutcome outcome = PlanOutcome::declined;
    TripleId final_id;
    bool committed = false;
};

namespace detail {

inline size_t target_violation_count(const Ontology& ont, const KnowledgeGraph& kg,
                                     const TripleId& id) {
    const Triple& t = kg.triple(id);
    size_t n = validate_triple(ont, kg, t).size();
    for (size_t qi = 0; qi < t.qualifiers.size(); ++qi)
        n += validate_qualifier(ont, kg, t, qi).size();
    return n;
}

}  // namespace detail

// Applies the plan's actions in order against a staged copy. Commits only
// when the target's own violation count does not worsen; an action
// invariant breach rejects the plan wholesale with no partial effects.
inline ApplyResult apply_plan(const Ontology& ont, KnowledgeGraph& kg, const TriplePlan& plan) {
    ApplyResult result;
    result.final_id = plan.triple;
    if (plan.actions.empty()) return result;  // declined

    size_t before = detail::target_violation_count(ont, kg, plan.triple);

    KnowledgeGraph staged = kg;
    TripleId cur = plan.triple;
    try {
        for (const TripleAction& a : plan.actions) {
            const Triple& t = staged.triple(cur);
            switch (a.kind) {
                case TripleAction::Kind::swap_so:
                    cur = staged.swap_triple(cur);
                    break;
                case TripleAction::Kind::replace_predicate:
                    if (std::find(plan.offered_predicates.begin(), plan.offered_predicates.end(),
                                  a.value) == plan.offered_predicates.end())
                        throw data_error("replacement predicate '" + a.value +
                                         "' was not offered");
                    cur = staged.replace_predicate(cur, a.value);
                    break;
                case TripleAction::Kind::add_subject_type: {
                    const auto& dom = ont.predicate(t.predicate).domain;
                    if (!dom || !dom->count(a.value))
                        throw data_error("added subject type '" + a.value +
                                         "' is not in the current predicate's domain");
                    add_entity_type(staged, ont, t.subject, a.value);
                    break;
                }
                case TripleAction::Kind::add_object_type: {
                    const auto& rng = ont.predicate(t.predicate).range;
                    if (!rng || !rng->count(a.value))
                        throw data_error("added object type '" + a.value +
                                         "' is not in the current predicate's range");
                    add_entity_type(staged, ont, t.object, a.value);
                    break;
                }
            }
        }
    } catch (const data_error&) {
        result.outcome = PlanOutcome::declined;  // invariant breach: rejected wholesale
        return result;
    }

    size_t core_after = validate_triple(ont, staged, staged.triple(cur)).size();
    size_t after = detail::target_violation_count(ont, staged, cur);
    if (after > before) {
        // Model plan would worsen the target; keep the graph untouched.
        result.outcome = PlanOutcome::still_invalid;
        return result;
    }
    kg = std::move(staged);
    result.final_id = cur;
    result.committed = true;
    result.outcome = core_after == 0 ? PlanOutcome::fixed : PlanOutcome::still_invalid;
    return result;
}

// ---- qualifier corrections ----

// Replacement candidates: members of qual(r) (every qualifier predicate
// when unconstrained) whose range admits the qualifier object's types,
// ranked by similarity to the current qualifier predicate label.
inline std::vector<PredicateId> candidate_qualifier_predicates(const Ontology& ont,
                                                               EmbedClient& embed,
                                                               const KnowledgeGraph& kg,
                                                               const Triple& t, size_t qidx,
                                                               size_t k = 10) {
    const Qualifier& q = t.qualifiers.at(qidx);
    const PredicateSpec& r = ont.predicate(t.predicate);
    const Entity& obj = kg.entity(q.object);
    const std::string& current_label = ont.predicate(q.predicate).label;

    std::vector<PredicateId> allowed;
    if (r.allowed_qualifiers) {
        allowed.assign(r.allowed_qualifiers->begin(), r.allowed_qualifiers->end());
    } else {
        for (const auto& [id, spec] : ont.predicates())
            if (spec.is_qualifier) allowed.push_back(id);
    }

    std::vector<std::pair<double, PredicateId>> scored;
    for (const PredicateId& id : allowed) {
        if (id == q.predicate) continue;
        const PredicateSpec& spec = ont.predicate(id);
        if (!ont.types_satisfy(obj.types, spec.range)) continue;
        scored.push_back({embed.similarity(current_label, spec.label), id});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<PredicateId> out;
    for (const auto& [_, id] : scored) {
        out.push_back(id);
        if (out.size() == k) break;
    }
    return out;
}

inline QualifierPlan plan_qualifier_correction(const Ontology& ont, ChatClient& chat,
                                               EmbedClient& embed, const KnowledgeGraph& kg,
                                               const Triple& t, size_t qidx,
                                               const std::vector<Violation>& violations,
                                               const std::string& chunk_text,
                                               size_t candidate_k = 10) {
    QualifierPlan plan;
    plan.triple = t.id;
    plan.qualifier_index = qidx;
    plan.offered_predicates =
        candidate_qualifier_predicates(ont, embed, kg, t, qidx, candidate_k);

    const Qualifier& q = t.qualifiers.at(qidx);
    const PredicateSpec& rq = ont.predicate(q.predicate);
    std::vector<std::string> explanations;
    for (const Violation& v : violations) explanations.push_back(v.explanation);
    std::string prompt = prompts::build_qualifier_correction_prompt(
        ont, chunk_text, kg.entity(t.subject).label, ont.predicate(t.predicate).label,
        kg.entity(t.object).label, rq.label, kg.entity(q.object).label, rq.range,
        plan.offered_predicates, explanations);

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response = chat.chat(Stage::mend_qualifier, prompt);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(detail::strip_code_fence(response));
        } catch (const nlohmann::json::exception&) {
            continue;
        }
        if (!j.is_array()) continue;
        if (j.empty()) break;  // explicit decline
        if (j.size() != 2 || !j.at(0).is_string() || !j.at(1).is_string()) break;
        std::string action = j.at(0).get<std::string>();
        std::string value = j.at(1).get<std::string>();
        if (action == "replace_predicate") {
            if (auto id = detail::resolve_among(ont, plan.offered_predicates, value))
                plan.action = QualifierAction{QualifierAction::Kind::replace_predicate, *id};
        } else if (action == "add_object_type") {
            auto id = detail::resolve_type(ont, value);
            // Added type must come from the qualifier predicate's range.
            if (id && rq.range && rq.range->count(*id))
                plan.action = QualifierAction{QualifierAction::Kind::add_object_type, *id};
        }
        break;
    }
    return plan;
}

inline ApplyResult apply_qualifier_plan(const Ontology& ont, KnowledgeGraph& kg,
                                        const QualifierPlan& plan) {
    ApplyResult result;
    result.final_id = plan.triple;
    if (!plan.action) return result;  // declined

    size_t before = validate_qualifier(ont, kg, kg.triple(plan.triple), plan.qualifier_index).size();
    KnowledgeGraph staged = kg;
    TripleId cur = plan.triple;
    size_t qidx = plan.qualifier_index;
    EntityId qualifier_object = staged.triple(cur).qualifiers.at(qidx).object;
    try {
        switch (plan.action->kind) {
            case QualifierAction::Kind::replace_predicate:
                cur = staged.replace_qualifier_predicate(cur, qidx, plan.action->value);
                break;
            case QualifierAction::Kind::add_object_type:
                add_entity_type(staged, ont, qualifier_object, plan.action->value);
                break;
        }
    } catch (const data_error&) {
        result.outcome = PlanOutcome::declined;
        return result;
    }

    // A qualifier-predicate replacement may coalesce the triple into an
    // existing duplicate; find the mutated qualifier again in the survivor.
    const Triple& t = staged.triple(cur);
    if (qidx >= t.qualifiers.size() || t.qualifiers[qidx].object != qualifier_object) {
        for (size_t i = 0; i < t.qualifiers.size(); ++i) {
            if (t.qualifiers[i].object == qualifier_object) {
                qidx = i;
                break;
            }
        }
    }
    size_t after = validate_qualifier(ont, staged, t, qidx).size();
    if (after > before) {
        result.outcome = PlanOutcome::still_invalid;
        return result;
    }
    kg = std::move(staged);
    result.final_id = cur;
    result.committed = true;
    result.outcome = after == 0 ? PlanOutcome::fixed : PlanOutcome::still_invalid;
    return result;
}

// ---- passes ----

struct MendCounts {
    uint64_t auto_swapped = 0;
    uint64_t llm_fixed = 0;
    uint64_t declined = 0;
    uint64_t still_invalid = 0;

    nlohmann::json to_json() const {
        return {{"auto_swapped", auto_swapped},
                {"llm_fixed", llm_fixed},
                {"declined", declined},
                {"still_invalid", still_invalid}};
    }
};

struct MendReport {
    MendCounts triples;
    MendCounts qualifiers;

    nlohmann::json to_json() const {
        return {{"triples", triples.to_json()}, {"qualifiers", qualifiers.to_json()}};
    }
};

struct MendOptions {
    size_t candidate_k = 10;
    int rounds = 1;
};

// Auto-swap first, then a single pass (configurable rounds) over
// violating triples in id order. Each triple is re-validated immediately
// before its turn: earlier type propagation may already have fixed it, in
// which case it costs zero chat calls.
inline MendCounts mend_triples(const Ontology& ont, KnowledgeGraph& kg, ChatClient& chat,
                               EmbedClient& embed,
                               const std::map<ChunkId, std::string>& chunk_texts,
                               const MendOptions& options = {}) {
    MendCounts counts;
    counts.auto_swapped = auto_swap_pass(ont, kg);

    for (int round = 0; round < options.rounds; ++round) {
        std::vector<TripleId> targets;
        for (const auto& [id, t] : kg.triples())
            if (!validate_triple(ont, kg, t).empty()) targets.push_back(id);
        if (targets.empty()) break;

        for (const TripleId& id : targets) {
            if (!kg.has_triple(id)) continue;
            std::vector<Violation> vs = validate_triple(ont, kg, kg.triple(id));
            if (vs.empty()) continue;  // fixed by propagation; no call

            auto ct = chunk_texts.find(kg.triple(id).provenance);
            std::string chunk_text = ct == chunk_texts.end() ? std::string() : ct->second;
            TriplePlan plan = plan_triple_correction(ont, chat, embed, kg, kg.triple(id), vs,
                                                     chunk_text, options.candidate_k);
            if (plan.actions.empty()) {
                ++counts.declined;
                kg.set_flag_unrepairable(id);
                continue;
            }
            ApplyResult res = apply_plan(ont, kg, plan);
            switch (res.outcome) {
                case PlanOutcome::fixed: ++counts.llm_fixed; break;
                case PlanOutcome::declined: ++counts.declined; break;
                case PlanOutcome::still_invalid: ++counts.still_invalid; break;
            }
            if (res.outcome != PlanOutcome::fixed && kg.has_triple(res.final_id))
                kg.set_flag_unrepairable(res.final_id);
        }
    }
    return counts;
}

// Runs after mend_triples so triple predicates (and hence qual(r)) are
// final. One chat call per qualifier still violating at its turn.
inline MendCounts mend_qualifiers(const Ontology& ont, KnowledgeGraph& kg, ChatClient& chat,
                                  EmbedClient& embed,
                                  const std::map<ChunkId, std::string>& chunk_texts,
                                  const MendOptions& options = {}) {
    MendCounts counts;
    for (int round = 0; round < options.rounds; ++round) {
        std::vector<std::pair<TripleId, size_t>> targets;
        for (const auto& [id, t] : kg.triples())
            for (size_t qi = 0; qi < t.qualifiers.size(); ++qi)
                if (!validate_qualifier(ont, kg, t, qi).empty()) targets.push_back({id, qi});
        if (targets.empty()) break;

        for (const auto& [id, qi] : targets) {
            if (!kg.has_triple(id)) continue;
            const Triple& t = kg.triple(id);
            if (qi >= t.qualifiers.size()) continue;
            std::vector<Violation> vs = validate_qualifier(ont, kg, t, qi);
            if (vs.empty()) continue;  // legalized earlier; no call

            auto ct = chunk_texts.find(t.provenance);
            std::string chunk_text = ct == chunk_texts.end() ? std::string() : ct->second;
            QualifierPlan plan = plan_qualifier_correction(ont, chat, embed, kg, t, qi, vs,
                                                           chunk_text, options.candidate_k);
            if (!plan.action) {
                ++counts.declined;
                kg.set_flag_unrepairable(id);
                continue;
            }
            ApplyResult res = apply_qualifier_plan(ont, kg, plan);
            switch (res.outcome) {
                case PlanOutcome::fixed: ++counts.llm_fixed; break;
                case PlanOutcome::declined: ++counts.declined; break;
                case PlanOutcome::still_invalid: ++counts.still_invalid; break;
            }
            if (res.outcome != PlanOutcome::fixed && kg.has_triple(res.final_id))
                kg.set_flag_unrepairable(res.final_id);
        }
    }
    return counts;
}

inline MendReport mend_graph(const Ontology& ont, KnowledgeGraph& kg, ChatClient& chat,
                             EmbedClient& embed, const std::map<ChunkId, std::string>& chunk_texts,
                             const MendOptions& options = {}) {
    MendReport report;
    report.triples = mend_triples(ont, kg, chat, embed, chunk_texts, options);
    report.qualifiers = mend_qualifiers(ont, kg, chat, embed, chunk_texts, options);
    return report;
}

}  // namespace oakmend
