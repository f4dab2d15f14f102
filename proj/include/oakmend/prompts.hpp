#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oakmend/core.hpp"
#include "oakmend/ontology.hpp"

// Prompt texts are versioned assets: every builder produces bit-stable
// output for given inputs, so scripted mocks keyed by prompt digest stay
// valid across runs.

namespace oakmend::prompts {

inline constexpr const char* kExtractSystem = R"(## Task Description
Your task is to extract a Wikidata-like knowledge graph from text. A knowledge graph consists of subject-predicate-object triples where:
- subject and object: Named entities or concepts that describe groups of people, events, or any abstract objects.
- predicate: A predicate (or relation type) that connects the subject and object.

Additionally, some triples may have qualifiers providing contextual information about a triple (e.g., date, place, or other attributes).
Each qualifier only exists when linked to a triple and consists of a predicate-object pair.

## Inputs
You will receive the text.

## Output Format
Extract triples and qualifiers in **JSON** as a list of dictionaries, where each dictionary contains:
- "triple": A list of three elements: subject, predicate, and object
- "subject_type": The type of the subject
- "object_type": The type of the object
- "qualifiers": An optional list of dictionaries, where each dictionary contains:
    - "pair": A list of two elements: qualifier predicate, and qualifier object
    - "object_type": The type of the qualifier object
)";

// Fixed in-context example appended to every extraction prompt.
inline constexpr const char* kExtractExample = R"(## Example
Text:
Marie Curie received the Nobel Prize in Physics in 1903 together with Pierre Curie.

### Output
[
    {
        "triple": ["Marie Curie", "award received", "Nobel Prize in Physics"],
        "subject_type": "human",
        "object_type": "award",
        "qualifiers": [
            {"pair": ["point in time", "1903"], "object_type": "date"},
            {"pair": ["together with", "Pierre Curie"], "object_type": "human"}
        ]
    }
]
)";

inline constexpr const char* kTypeCanonSystem = R"(## Task Description
Your task is to disambiguate an entity type for one or more entities extracted from text.

## Inputs
You will receive a text, a list of extracted entities, an extracted entity type, and a list of candidate types.
Return a single type for all the entities. No additional text.
)";

inline constexpr const char* kPredicateCanonSystem = R"(## Task Description
Your task is to disambiguate a predicate indicating the relationship type between pairs of entities extracted from text. Assume the predicate direction is not important.

## Inputs
You will receive a text, a list of extracted entity pairs, the extracted predicate, and a list of candidate predicates.
Return a single predicate for all the entity pairs. No additional text.
)";

inline constexpr const char* kDedupSystem = R"(## Task Description
Find duplicates for a given entity, and an entity alias that best represents the duplicates.
Duplicates are those that are the same in meaning, such as with variation in tense, plural form, stem form, case, abbreviation, shorthand.

## Inputs
You will receive an entity and a list of candidate duplicate entities.

## Output Format
Return duplicates and the alias in **JSON** as a dictionary containing:
- "duplicates": A list of duplicate entities taken from the candidates list
- "alias": Best entity name to represent the duplicates

If there are no duplicates, then return the empty dictionary {}.
)";

inline constexpr const char* kTripleCorrectionSystem = R"(## Task Description
You are a knowledge graph expert. Your task is to correct an invalid subject-predicate-object (SPO) triple so that it satisfies ontology constraints, while still reflecting information present in the source text.

## Inputs
- Source text
- The invalid triple (subject, predicate, object)
- The domain and range constraints of the predicate
- A list of candidate replacement predicates
- The reasons why the triple is invalid

## Allowed Actions (applied in sequence)
- "swap": swap subject and object
- "add_subject_type": add type to subject (to satisfy domain)
- "add_object_type": add type to object (to satisfy range)
- "replace_predicate": replace predicate with a candidate

## Rules
- Added types must be plausible given the text
- Only use candidates for replace_predicate
- Actions are applied in order, each modifying the result of the previous one
- Choose the sequence of actions that produces a triple consistent with the ontology constraints and grounded in the source text. If no such sequence exists, return an empty list []

## Output
Return only a **JSON** list of [action, value] pairs, where action is one of swap, add_subject_type, add_object_type, replace_predicate, and value is the new type or predicate string (or null for swap). Return an empty list if no correction is possible.

### Output Examples
- [["replace_predicate", "publication date"]]
- [["swap", null], ["add_object_type", "person"]]
- []
)";

inline constexpr const char* kQualifierCorrectionSystem = R"(## Task Description
You are a knowledge graph expert. Your task is to correct a qualifier predicate-object pair associated to a triple so that it satisfies ontology constraints, while still reflecting information present in the source text.

## Inputs
- Source text
- The triple (subject, predicate, object)
- The invalid qualifier (qualifier predicate, qualifier object)
- The range constraint of the qualifier predicate
- A list of candidate replacement qualifier predicates
- The reason why the qualifier is invalid

## Allowed Actions
- "add_object_type": add type to qualifier object (to satisfy range)
- "replace_predicate": replace qualifier predicate with a candidate

## Rules
- Added types must be plausible given the text
- Only use candidates for replace_predicate
- Choose the action that produces a qualifier consistent with the ontology constraints and grounded in the source text. If no action exists, return an empty list []

## Output
Return only a **JSON** list [action, value], where action is one of add_object_type, replace_predicate, and value is the new type or predicate string. Return an empty list if no correction is possible.

### Output Examples
- ["replace_predicate", "doctoral advisor"]
- ["add_object_type", "person"]
- []
)";

inline std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += "- " + i + "\n";
    if (items.empty()) out += "- (none)\n";
    return out;
}

inline std::string build_extract_prompt(const std::string& chunk_text) {
    return std::string(kExtractSystem) + "\n" + kExtractExample + "\n## Text\n" + chunk_text + "\n";
}

inline std::string describe_catalog_entry(const Ontology& ont, const std::string& id,
                                          bool is_type) {
    const std::string& label = is_type ? ont.type(id).label : ont.predicate(id).label;
    const std::vector<std::string>& aliases =
        is_type ? ont.type(id).aliases : ont.predicate(id).aliases;
    std::string out = label;
    if (!aliases.empty()) out += " (aliases: " + join(aliases, ", ") + ")";
    return out;
}

inline std::string build_type_canon_prompt(const Ontology& ont, const std::string& source_text,
                                           const std::vector<std::string>& entities,
                                           const std::string& open_type,
                                           const std::vector<TypeId>& candidates) {
    std::string out = kTypeCanonSystem;
    out += "\n## Text\n" + source_text + "\n\n## Entities\n" + bullet_list(entities);
    out += "\n## Extracted Type\n" + open_type + "\n\n## Candidate Types\n";
    std::vector<std::string> lines;
    for (const TypeId& c : candidates) lines.push_back(describe_catalog_entry(ont, c, true));
    out += bullet_list(lines);
    return out;
}

inline std::string build_predicate_canon_prompt(
    const Ontology& ont, const std::string& source_text,
    const std::vector<std::pair<std::string, std::string>>& pairs, const std::string& open_pred,
    const std::vector<PredicateId>& candidates) {
    std::string out = kPredicateCanonSystem;
    out += "\n## Text\n" + source_text + "\n\n## Entity Pairs\n";
    std::vector<std::string> pair_lines;
    for (const auto& [s, o] : pairs) pair_lines.push_back("(" + s + ", " + o + ")");
    out += bullet_list(pair_lines);
    out += "\n## Extracted Predicate\n" + open_pred + "\n\n## Candidate Predicates\n";
    std::vector<std::string> lines;
    for (const PredicateId& c : candidates) lines.push_back(describe_catalog_entry(ont, c, false));
    out += bullet_list(lines);
    return out;
}

inline std::string build_dedup_prompt(const std::string& entity_label,
                                      const std::vector<std::string>& candidates) {
    std::string out = kDedupSystem;
    out += "\n## Entity\n" + entity_label + "\n\n## Candidates\n" + bullet_list(candidates);
    return out;
}

inline std::string describe_constraint(const Ontology& ont,
                                       const std::optional<std::set<TypeId>>& cons) {
    if (!cons) return "unconstrained";
    std::set<std::string> labels;
    for (const TypeId& t : *cons) labels.insert(ont.type(t).label);
    return brace_set(labels);
}

inline std::string build_triple_correction_prompt(
    const Ontology& ont, const std::string& source_text, const std::string& subject_label,
    const std::string& predicate_label, const std::string& object_label,
    const std::optional<std::set<TypeId>>& domain, const std::optional<std::set<TypeId>>& range,
    const std::vector<PredicateId>& candidate_predicates,
    const std::vector<std::string>& explanations) {
    std::string out = kTripleCorrectionSystem;
    out += "\n## Source Text\n" + source_text + "\n";
    out += "\n## Invalid Triple\n(" + subject_label + ", " + predicate_label + ", " +
           object_label + ")\n";
    out += "\n## Constraints\ndomain(" + predicate_label + "): " + describe_constraint(ont, domain) +
           "\nrange(" + predicate_label + "): " + describe_constraint(ont, range) + "\n";
    out += "\n## Candidate Replacement Predicates\n";
    std::vector<std::string> lines;
    for (const PredicateId& c : candidate_predicates) lines.push_back(ont.predicate(c).label);
    out += bullet_list(lines);
    out += "\n## Violations\n" + bullet_list(explanations);
    return out;
}

inline std::string build_qualifier_correction_prompt(
    const Ontology& ont, const std::string& source_text, const std::string& subject_label,
    const std::string& predicate_label, const std::string& object_label,
    const std::string& qualifier_predicate_label, const std::string& qualifier_object_label,
    const std::optional<std::set<TypeId>>& qualifier_range,
    const std::vector<PredicateId>& candidate_predicates,
    const std::vector<std::string>& explanations) {
    std::string out = kQualifierCorrectionSystem;
    out += "\n## Source Text\n" + source_text + "\n";
    out += "\n## Triple\n(" + subject_label + ", " + predicate_label + ", " + object_label + ")\n";
    out += "\n## Invalid Qualifier\n(" + qualifier_predicate_label + ", " +
           qualifier_object_label + ")\n";
    out += "\n## Range Constraint\nrange(" + qualifier_predicate_label +
           "): " + describe_constraint(ont, qualifier_range) + "\n";
    out += "\n## Candidate Replacement Qualifier Predicates\n";
    std::vector<std::string> lines;
    for (const PredicateId& c : candidate_predicates) lines.push_back(ont.predicate(c).label);
    out += bullet_list(lines);
    out += "\n## Violations\n" + bullet_list(explanations);
    return out;
}

}  // namespace oakmend::prompts
