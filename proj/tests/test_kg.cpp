#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "oakmend/kg.hpp"
#include "oakmend/validate.hpp"
#include "testutil.hpp"

using namespace oakmend;
using testutil::GraphBuilder;
using testutil::toy_ontology;
using testutil::turing_fixture;

namespace {

// Label-keyed canonical form: triples as (subject label, predicate,
// object label, sorted qualifier labels). Equality up to entity-id
// renaming reduces to equality of these multisets.
std::multiset<std::string> canonical_form(const KnowledgeGraph& kg) {
    std::multiset<std::string> out;
    for (const auto& [_, t] : kg.triples()) {
        std::vector<std::string> quals;
        for (const Qualifier& q : t.qualifiers)
            quals.push_back(q.predicate + "=" + normalize_label(kg.entity(q.object).label));
        std::sort(quals.begin(), quals.end());
        out.insert(normalize_label(kg.entity(t.subject).label) + "|" + t.predicate + "|" +
                   normalize_label(kg.entity(t.object).label) + "|" + join(quals, ","));
    }
    return out;
}

std::multiset<std::string> entity_types_form(const KnowledgeGraph& kg) {
    std::multiset<std::string> out;
    for (const auto& [_, e] : kg.entities())
        out.insert(normalize_label(e.label) + "|" +
                   join(std::set<std::string>(e.types.begin(), e.types.end()), ","));
    return out;
}

KnowledgeGraph random_graph(std::mt19937_64& rng, size_t n_entities, size_t n_triples) {
    GraphBuilder g(toy_ontology());
    std::vector<EntityId> ids;
    for (size_t i = 0; i < n_entities; ++i)
        ids.push_back(g.ent("entity " + std::to_string(rng() % 40), {"human"}));
    for (size_t i = 0; i < n_triples && ids.size() >= 2; ++i) {
        EntityId s = ids[rng() % ids.size()];
        EntityId o = ids[rng() % ids.size()];
        std::vector<Qualifier> quals;
        if (rng() % 3 == 0) quals.push_back({"point-in-time", ids[rng() % ids.size()]});
        g.tri(s, rng() % 2 ? "author" : "educated-at", o, quals);
    }
    return g.kg;
}

}  // namespace

TEST_CASE("merge with the empty graph is identity up to ids") {
    KnowledgeGraph g = turing_fixture().kg;
    KnowledgeGraph empty;
    empty.ontology_hash = g.ontology_hash;
    KnowledgeGraph merged = merge_graphs({&g, &empty});
    CHECK(canonical_form(merged) == canonical_form(g));
    CHECK(entity_types_form(merged) == entity_types_form(g));
}

TEST_CASE("merge unions types of same-label entities") {
    GraphBuilder a(toy_ontology());
    a.ent("Alan Turing", {"mathematician"});
    GraphBuilder b(toy_ontology());
    b.ent("alan  turing", {"human"});  // case/whitespace-insensitive identity

    KnowledgeGraph merged = merge_graphs({&a.kg, &b.kg});
    REQUIRE(merged.entities().size() == 1);
    const Entity& e = merged.entities().begin()->second;
    CHECK(e.types == std::set<TypeId>{"human", "mathematician"});
    CHECK(e.label == "Alan Turing");
    CHECK(e.aliases == std::vector<std::string>{"alan  turing"});
}

TEST_CASE("identical triples appear once after merge") {
    auto build = [] {
        GraphBuilder g(toy_ontology());
        EntityId s = g.ent("Alan Turing", {"mathematician"});
        EntityId o = g.ent("Princeton University", {"university"});
        g.tri(s, "educated-at", o);
        return g.kg;
    };
    KnowledgeGraph a = build(), b = build();
    KnowledgeGraph merged = merge_graphs({&a, &b});
    CHECK(merged.triples().size() == 1);
}

TEST_CASE("same statement with different qualifiers stays two triples") {
    GraphBuilder a(toy_ontology());
    EntityId s = a.ent("Alan Turing", {"mathematician"});
    EntityId o = a.ent("Princeton University", {"university"});
    EntityId y = a.ent("1938", {"year"}, LiteralKind::date);
    a.tri(s, "educated-at", o);
    a.tri(s, "educated-at", o, {{"point-in-time", y}});
    CHECK(a.kg.triples().size() == 2);
}

TEST_CASE("merge rejects graphs canonicalized against different ontologies") {
    KnowledgeGraph a, b;
    a.ontology_hash = "aaaa";
    b.ontology_hash = "bbbb";
    CHECK_THROWS_AS(merge_graphs({&a, &b}), data_error);
}

TEST_CASE("add_entity_type reaches every triple referencing the entity") {
    const Ontology& ont = toy_ontology();
    GraphBuilder g(ont);
    EntityId farm = g.ent("Animal Farm", {"written-work"});
    EntityId orwell = g.ent("George Orwell", {"human"});
    EntityId penguin = g.ent("Penguin Books", {"organization"});
    TripleId t1 = g.tri(farm, "author", orwell);
    TripleId t2 = g.tri(farm, "publisher", penguin);
    TripleId t3 = g.tri(farm, "publication-date", g.ent("1945", {"year"}, LiteralKind::date));

    // Revalidate-all oracle: every triple's outcome recomputed from scratch.
    auto outcomes = [&] {
        std::vector<bool> v;
        for (TripleId id : {t1, t2, t3})
            v.push_back(validate_triple(ont, g.kg, g.kg.triple(id)).empty());
        return v;
    };
    CHECK(outcomes() == std::vector<bool>{false, true, true});  // author needs book

    add_entity_type(g.kg, ont, farm, "book");
    CHECK(g.kg.entity(farm).types == std::set<TypeId>{"written-work", "book"});
    CHECK(outcomes() == std::vector<bool>{true, true, true});

    add_entity_type(g.kg, ont, farm, "book");  // idempotent
    CHECK(g.kg.entity(farm).types.size() == 2);

    CHECK_THROWS_AS(add_entity_type(g.kg, ont, "missing", "book"), data_error);
    CHECK_THROWS_AS(add_entity_type(g.kg, ont, farm, "missing"), data_error);
}

TEST_CASE("save/load round-trips the Turing fixture") {
    KnowledgeGraph g = turing_fixture().kg;
    std::ostringstream out;
    save_kg(g, out);
    std::istringstream in(out.str());
    KnowledgeGraph loaded = load_kg(in);
    CHECK(loaded == g);
    CHECK(loaded.indexes_consistent());
}

TEST_CASE("save/load of the empty graph is header-only") {
    KnowledgeGraph g;
    g.ontology_hash = "cafe";
    std::ostringstream out;
    save_kg(g, out);
    std::string text = out.str();
    CHECK(text.find("\"kind\":\"kg\"") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    std::istringstream in(text);
    KnowledgeGraph loaded = load_kg(in);
    CHECK(loaded == g);
}

TEST_CASE("a corrupt line is rejected with its line number") {
    KnowledgeGraph g = turing_fixture().kg;
    std::ostringstream out;
    save_kg(g, out);
    std::string text = out.str();

    // Corrupt the third line (an entity record).
    std::vector<std::string> lines;
    std::istringstream split(text);
    std::string line;
    while (std::getline(split, line)) lines.push_back(line);
    REQUIRE(lines.size() >= 3);
    lines[2] = "{\"kind\":\"entity\",\"id\":3}";
    std::istringstream in(join(lines, "\n"));
    CHECK_THROWS_MATCHES(load_kg(in), data_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("line 3")));
}

TEST_CASE("literal entities are rejected in subject position") {
    GraphBuilder g(toy_ontology());
    EntityId lit = g.ent("1938", {"year"}, LiteralKind::date);
    EntityId uni = g.ent("Princeton University", {"university"});
    CHECK_THROWS_AS(g.tri(lit, "educated-at", uni), data_error);
}

TEST_CASE("index consistency holds after random mutation sequences") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 10; ++iter) {
        KnowledgeGraph kg = random_graph(rng, 3 + rng() % 10, rng() % 25);
        std::vector<TripleId> ids;
        for (const auto& [id, _] : kg.triples()) ids.push_back(id);
        for (int step = 0; step < 8 && !ids.empty(); ++step) {
            TripleId id = ids[rng() % ids.size()];
            if (!kg.has_triple(id)) continue;
            switch (rng() % 3) {
                case 0:
                    if (!kg.entity(kg.triple(id).object).literal_kind) kg.swap_triple(id);
                    break;
                case 1: kg.replace_predicate(id, "publisher"); break;
                case 2: kg.add_entity_type(kg.triple(id).subject, "book"); break;
            }
        }
        CHECK(kg.indexes_consistent());
    }
}

TEST_CASE("merge is associative and commutative up to entity-id renaming") {
    std::mt19937_64 rng(99);
    for (int iter = 0; iter < 8; ++iter) {
        KnowledgeGraph a = random_graph(rng, 2 + rng() % 8, rng() % 12);
        KnowledgeGraph b = random_graph(rng, 2 + rng() % 8, rng() % 12);
        KnowledgeGraph c = random_graph(rng, 2 + rng() % 8, rng() % 12);

        KnowledgeGraph ab_c = merge_graphs({&a, &b, &c});
        KnowledgeGraph ba = merge_graphs({&b, &a});
        KnowledgeGraph ba_c = merge_graphs({&ba, &c});
        KnowledgeGraph bc = merge_graphs({&b, &c});
        KnowledgeGraph a_bc = merge_graphs({&a, &bc});

        CHECK(canonical_form(ab_c) == canonical_form(ba_c));
        CHECK(canonical_form(ab_c) == canonical_form(a_bc));
        CHECK(entity_types_form(ab_c) == entity_types_form(ba_c));
        CHECK(entity_types_form(ab_c) == entity_types_form(a_bc));
    }
}

TEST_CASE("round-trip preserves triple count, qualifier count, and type multiset") {
    std::mt19937_64 rng(123);
    for (int iter = 0; iter < 10; ++iter) {
        KnowledgeGraph kg = random_graph(rng, 2 + rng() % 10, rng() % 20);
        std::ostringstream out;
        save_kg(kg, out);
        std::istringstream in(out.str());
        KnowledgeGraph loaded = load_kg(in);
        CHECK(loaded.triples().size() == kg.triples().size());
        CHECK(loaded.qualifier_count() == kg.qualifier_count());
        CHECK(entity_types_form(loaded) == entity_types_form(kg));
        CHECK(loaded == kg);
    }
}
