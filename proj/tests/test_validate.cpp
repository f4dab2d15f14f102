#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oakmend/validate.hpp"
#include "testutil.hpp"

using namespace oakmend;
using testutil::GraphBuilder;
using testutil::toy_ontology;
using testutil::turing_fixture;

namespace {

std::set<ViolationKind> kinds_of(const std::vector<Violation>& vs) {
    std::set<ViolationKind> out;
    for (const Violation& v : vs) out.insert(v.kind);
    return out;
}

}  // namespace

TEST_CASE("the Turing triple and its qualifier validate clean") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g = turing_fixture();
    const Triple& t = g.kg.triples().begin()->second;
    CHECK(validate_triple(ont, g.kg, t).empty());
    CHECK(validate_qualifier(ont, g.kg, t, 0).empty());
}

TEST_CASE("reversed subject and object produce domain and range violations together") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    TripleId id = g.tri(g.ent("G. Orwell", {"human"}), "author", g.ent("Animal Farm", {"book"}));
    auto vs = validate_triple(ont, g.kg, g.kg.triple(id));
    CHECK(kinds_of(vs) ==
          std::set<ViolationKind>{ViolationKind::DomainViolation, ViolationKind::RangeViolation});
}

TEST_CASE("a mis-canonicalized predicate produces exactly a range violation") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    TripleId id = g.tri(g.ent("Animal Farm", {"book"}), "distribution-format",
                        g.ent("Penguin Books", {"organization"}));
    auto vs = validate_triple(ont, g.kg, g.kg.triple(id));
    CHECK(kinds_of(vs) == std::set<ViolationKind>{ViolationKind::RangeViolation});
}

TEST_CASE("an under-specific subject type produces exactly a domain violation") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    TripleId id = g.tri(g.ent("Animal Farm", {"written-work"}), "author",
                        g.ent("G. Orwell", {"human"}));
    auto vs = validate_triple(ont, g.kg, g.kg.triple(id));
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == ViolationKind::DomainViolation);
    // The explanation is the deterministic template fed to correction prompts.
    CHECK(vs[0].explanation ==
          "subject types {written-work} do not satisfy domain {book} of predicate author");
}

TEST_CASE("disallowed qualifier predicates are flagged; allowed ones with absent range pass") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    EntityId turing = g.ent("Alan Turing", {"mathematician"});
    EntityId princeton = g.ent("Princeton University", {"university"});
    EntityId red = g.ent("red", {"color-kind"});
    TripleId id = g.tri(turing, "educated-at", princeton, {{"color-q", red}});
    auto vs = validate_qualifier(ont, g.kg, g.kg.triple(id), 0);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == ViolationKind::QualifierNotAllowed);
    CHECK(vs[0].qualifier_index == 0);
    CHECK(vs[0].explanation ==
          "qualifier predicate color-q is not allowed by predicate educated-at");

    // together-with has no range constraint: no range violation possible.
    GraphBuilder h(ont);
    EntityId curie = h.ent("Marie Curie", {"human"});
    EntityId prize = h.ent("Nobel Prize", {"award"});
    EntityId pierre = h.ent("Pierre Curie", {"human"});
    TripleId award = h.tri(curie, "award-received", prize, {{"together-with", pierre}});
    CHECK(validate_qualifier(ont, h.kg, h.kg.triple(award), 0).empty());
}

TEST_CASE("qualifier range checks run even when the qualifier is disallowed") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    EntityId farm = g.ent("Animal Farm", {"book"});
    EntityId date = g.ent("1945", {"year"}, LiteralKind::date);
    EntityId london = g.ent("London", {"city"});
    // location is not in qual(educated-at)... use publication-date whose
    // qual list excludes location; London is in range of location though.
    TripleId id = g.tri(farm, "publication-date", date, {{"location", london}});
    auto vs = validate_qualifier(ont, g.kg, g.kg.triple(id), 0);
    CHECK(kinds_of(vs) == std::set<ViolationKind>{ViolationKind::QualifierNotAllowed});

    // Now a disallowed qualifier whose object also misses the range.
    GraphBuilder h(ont);
    EntityId farm2 = h.ent("Animal Farm", {"book"});
    EntityId date2 = h.ent("1945", {"year"}, LiteralKind::date);
    EntityId org = h.ent("Penguin Books", {"organization"});
    TripleId id2 = h.tri(farm2, "publication-date", date2, {{"location", org}});
    auto vs2 = validate_qualifier(ont, h.kg, h.kg.triple(id2), 0);
    CHECK(kinds_of(vs2) == std::set<ViolationKind>{ViolationKind::QualifierNotAllowed,
                                                   ViolationKind::QualifierRangeViolation});
}

TEST_CASE("validate_graph on the empty graph reports not-applicable percentages") {
    KnowledgeGraph kg;
    GraphValidation v = validate_graph(toy_ontology(), kg);
    CHECK(v.report.total_triples == 0);
    CHECK_FALSE(v.report.pct_valid_triples.has_value());
    CHECK_FALSE(v.report.pct_valid_qualifiers.has_value());
    CHECK(v.report.to_json().at("pct_valid_triples").is_null());
}

TEST_CASE("validate_graph percentage matches the per-triple oracle") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    EntityId turing = g.ent("Alan Turing", {"mathematician"});
    EntityId princeton = g.ent("Princeton University", {"university"});
    EntityId farm = g.ent("Animal Farm", {"book"});
    EntityId orwell = g.ent("G. Orwell", {"human"});
    g.tri(turing, "educated-at", princeton);
    g.tri(farm, "author", orwell);
    g.tri(orwell, "author", farm);  // reversed: invalid

    GraphValidation v = validate_graph(ont, g.kg);

    // Brute-force oracle: validate each triple independently.
    uint64_t valid = 0;
    for (const auto& [_, t] : g.kg.triples())
        if (validate_triple(ont, g.kg, t).empty()) ++valid;
    CHECK(v.report.total_triples == 3);
    CHECK(v.report.valid_triples == valid);
    CHECK(valid == 2);
    CHECK(*v.report.pct_valid_triples == Catch::Approx(66.7).margin(0.05));
}

TEST_CASE("the graph report equals the aggregation of per-triple and per-qualifier calls") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g = turing_fixture();
    EntityId farm = g.ent("Animal Farm", {"written-work"});
    EntityId orwell = g.ent("G. Orwell", {"human"});
    EntityId red = g.ent("red", {"color-kind"});
    g.tri(farm, "author", orwell, {{"color-q", red}});

    GraphValidation v = validate_graph(ont, g.kg);
    uint64_t triple_violations = 0, qualifier_violations = 0;
    for (const auto& [_, t] : g.kg.triples()) {
        triple_violations += validate_triple(ont, g.kg, t).size();
        for (size_t qi = 0; qi < t.qualifiers.size(); ++qi)
            qualifier_violations += validate_qualifier(ont, g.kg, t, qi).size();
    }
    uint64_t reported = 0;
    for (const auto& [_, n] : v.report.per_kind) reported += n;
    CHECK(reported == triple_violations + qualifier_violations);
    CHECK(v.violations.size() == reported);
}

TEST_CASE("identical inputs yield byte-identical reports") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g = turing_fixture();
    g.tri(g.ent("Animal Farm", {"written-work"}), "author", g.ent("G. Orwell", {"human"}));
    std::string a = validate_graph(ont, g.kg).report.to_json().dump();
    std::string b = validate_graph(ont, g.kg).report.to_json().dump();
    CHECK(a == b);
}

TEST_CASE("dangling references surface as data errors") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    Triple t;
    t.id = "t1";
    t.subject = "ghost";
    t.predicate = "author";
    t.object = "ghost";
    CHECK_THROWS_AS(validate_triple(ont, g.kg, t), data_error);
}

TEST_CASE("adding types never increases the violation set") {
    const Ontology& ont = toy_ontology();
    std::mt19937_64 rng(271828);
    std::vector<TypeId> all_types;
    for (const auto& [id, _] : ont.types()) all_types.push_back(id);

    for (int iter = 0; iter < 20; ++iter) {
        GraphBuilder g(ont);
        std::vector<EntityId> ids;
        for (int i = 0; i < 6; ++i)
            ids.push_back(g.ent("e" + std::to_string(i), {all_types[rng() % all_types.size()]}));
        std::vector<PredicateId> preds = {"educated-at", "author", "publisher",
                                          "publication-date", "located-in"};
        for (int i = 0; i < 8; ++i)
            g.tri(ids[rng() % ids.size()], preds[rng() % preds.size()], ids[rng() % ids.size()]);

        GraphValidation before = validate_graph(ont, g.kg);
        add_entity_type(g.kg, ont, ids[rng() % ids.size()], all_types[rng() % all_types.size()]);
        GraphValidation after = validate_graph(ont, g.kg);
        CHECK(after.violations.size() <= before.violations.size());
        CHECK(after.report.valid_triples >= before.report.valid_triples);
    }
}
