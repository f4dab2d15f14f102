#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oakmend/core.hpp"
#include "oakmend/kg.hpp"
#include "oakmend/ontology.hpp"

namespace oakmend {

enum class ViolationKind {
    DomainViolation,
    RangeViolation,
    QualifierNotAllowed,
    QualifierRangeViolation
};

inline const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::DomainViolation: return "DomainViolation";
        case ViolationKind::RangeViolation: return "RangeViolation";
        case ViolationKind::QualifierNotAllowed: return "QualifierNotAllowed";
        case ViolationKind::QualifierRangeViolation: return "QualifierRangeViolation";
    }
    return "?";
}

// One constraint failure. The explanation is template-generated and
// deterministic: it feeds the correction prompts, and scripted mocks
// depend on its stability.
struct Violation {
    ViolationKind kind;
    TripleId triple_id;
    std::optional<size_t> qualifier_index;
    std::string explanation;

    bool operator==(const Violation&) const = default;
};

namespace detail {

inline std::string sorted_braces(const std::set<TypeId>& types) {
    return brace_set(std::set<std::string>(types.begin(), types.end()));
}

inline std::string constraint_braces(const std::set<TypeId>& cons) {
    return brace_set(std::set<std::string>(cons.begin(), cons.end()));
}

}  // namespace detail

// Domain/range check for one triple (qualifiers are validated separately).
inline std::vector<Violation> validate_triple(const Ontology& ont, const KnowledgeGraph& kg,
                                              const Triple& t) {
    const PredicateSpec& spec = ont.predicate(t.predicate);
    const Entity& s = kg.entity(t.subject);
    const Entity& o = kg.entity(t.object);
    std::vector<Violation> out;
    if (spec.domain && !ont.types_satisfy(s.types, spec.domain)) {
        out.push_back({ViolationKind::DomainViolation, t.id, std::nullopt,
                       "subject types " + detail::sorted_braces(s.types) +
                           " do not satisfy domain " + detail::constraint_braces(*spec.domain) +
                           " of predicate " + t.predicate});
    }
    if (spec.range && !ont.types_satisfy(o.types, spec.range)) {
        out.push_back({ViolationKind::RangeViolation, t.id, std::nullopt,
                       "object types " + detail::sorted_braces(o.types) +
                           " do not satisfy range " + detail::constraint_braces(*spec.range) +
                           " of predicate " + t.predicate});
    }
    return out;
}

// Checks one attached qualifier: admissibility under qual(r) and the
// qualifier predicate's own range. The range check runs even when the
// qualifier predicate is disallowed, so corrections see the whole picture.
inline std::vector<Violation> validate_qualifier(const Ontology& ont, const KnowledgeGraph& kg,
                                                 const Triple& t, size_t qidx) {
    if (qidx >= t.qualifiers.size()) throw data_error("qualifier index out of range");
    const Qualifier& q = t.qualifiers[qidx];
    const PredicateSpec& rq = ont.predicate(q.predicate);
    if (!rq.is_qualifier)
        throw data_error("predicate '" + q.predicate + "' is not a qualifier predicate");
    const PredicateSpec& r = ont.predicate(t.predicate);
    const Entity& obj = kg.entity(q.object);

    std::vector<Violation> out;
    if (r.allowed_qualifiers && !r.allowed_qualifiers->count(q.predicate)) {
        out.push_back({ViolationKind::QualifierNotAllowed, t.id, qidx,
                       "qualifier predicate " + q.predicate + " is not allowed by predicate " +
                           t.predicate});
    }
    if (rq.range && !ont.types_satisfy(obj.types, rq.range)) {
        out.push_back({ViolationKind::QualifierRangeViolation, t.id, qidx,
                       "qualifier object types " + detail::sorted_braces(obj.types) +
                           " do not satisfy range " + detail::constraint_braces(*rq.range) +
                           " of qualifier predicate " + q.predicate});
    }
    return out;
}

// The "% Valid" numbers: triples and qualifiers are counted in separate
// columns; 0/0 is reported as not-applicable.
struct ConsistencyReport {
    uint64_t total_triples = 0;
    uint64_t valid_triples = 0;
    uint64_t total_qualifiers = 0;
    uint64_t valid_qualifiers = 0;
    std::optional<double> pct_valid_triples;
    std::optional<double> pct_valid_qualifiers;
    std::map<std::string, uint64_t> per_kind;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"total_triples", total_triples},
                            {"valid_triples", valid_triples},
                            {"total_qualifiers", total_qualifiers},
                            {"valid_qualifiers", valid_qualifiers},
                            {"per_kind", per_kind}};
        j["pct_valid_triples"] = pct_valid_triples ? nlohmann::json(*pct_valid_triples)
                                                   : nlohmann::json(nullptr);
        j["pct_valid_qualifiers"] = pct_valid_qualifiers ? nlohmann::json(*pct_valid_qualifiers)
                                                         : nlohmann::json(nullptr);
        return j;
    }

    static ConsistencyReport from_json(const nlohmann::json& j) {
        ConsistencyReport r;
        r.total_triples = j.at("total_triples").get<uint64_t>();
        r.valid_triples = j.at("valid_triples").get<uint64_t>();
        r.total_qualifiers = j.at("total_qualifiers").get<uint64_t>();
        r.valid_qualifiers = j.at("valid_qualifiers").get<uint64_t>();
        if (!j.at("pct_valid_triples").is_null())
            r.pct_valid_triples = j.at("pct_valid_triples").get<double>();
        if (!j.at("pct_valid_qualifiers").is_null())
            r.pct_valid_qualifiers = j.at("pct_valid_qualifiers").get<double>();
        for (const auto& [k, v] : j.at("per_kind").items()) r.per_kind[k] = v.get<uint64_t>();
        return r;
    }

    std::string to_table() const {
        char buf[256];
        std::string out;
        auto pct = [](const std::optional<double>& p) {
            if (!p) return std::string("   n/a");
            char b[32];
            std::snprintf(b, sizeof(b), "%6.1f", *p);
            return std::string(b);
        };
        std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %8s\n", "", "total", "valid", "% valid");
        out += buf;
        std::snprintf(buf, sizeof(buf), "%-12s %10llu %10llu %8s\n", "triples",
                      static_cast<unsigned long long>(total_triples),
                      static_cast<unsigned long long>(valid_triples),
                      pct(pct_valid_triples).c_str());
        out += buf;
        std::snprintf(buf, sizeof(buf), "%-12s %10llu %10llu %8s\n", "qualifiers",
                      static_cast<unsigned long long>(total_qualifiers),
                      static_cast<unsigned long long>(valid_qualifiers),
                      pct(pct_valid_qualifiers).c_str());
        out += buf;
        for (const auto& [kind, count] : per_kind) {
            std::snprintf(buf, sizeof(buf), "  %-24s %8llu\n", kind.c_str(),
                          static_cast<unsigned long long>(count));
            out += buf;
        }
        return out;
    }
};

struct GraphValidation {
    ConsistencyReport report;
    std::vector<Violation> violations;  // triple-id ascending, qualifiers after the core
};

inline GraphValidation validate_graph(const Ontology& ont, const KnowledgeGraph& kg) {
    GraphValidation out;
    for (const auto& [id, t] : kg.triples()) {
        ++out.report.total_triples;
        std::vector<Violation> tv = validate_triple(ont, kg, t);
        if (tv.empty()) ++out.report.valid_triples;
        for (Violation& v : tv) {
            ++out.report.per_kind[to_string(v.kind)];
            out.violations.push_back(std::move(v));
        }
        for (size_t qi = 0; qi < t.qualifiers.size(); ++qi) {
            ++out.report.total_qualifiers;
            std::vector<Violation> qv = validate_qualifier(ont, kg, t, qi);
            if (qv.empty()) ++out.report.valid_qualifiers;
            for (Violation& v : qv) {
                ++out.report.per_kind[to_string(v.kind)];
                out.violations.push_back(std::move(v));
            }
        }
    }
    if (out.report.total_triples > 0)
        out.report.pct_valid_triples =
            100.0 * static_cast<double>(out.report.valid_triples) /
            static_cast<double>(out.report.total_triples);
    if (out.report.total_qualifiers > 0)
        out.report.pct_valid_qualifiers =
            100.0 * static_cast<double>(out.report.valid_qualifiers) /
            static_cast<double>(out.report.total_qualifiers);
    return out;
}

}  // namespace oakmend
