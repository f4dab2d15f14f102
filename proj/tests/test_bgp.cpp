#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "oakmend/bgp.hpp"
#include "testutil.hpp"

using namespace oakmend;
using testutil::GraphBuilder;

namespace {

// Ontology for the pattern-language tests: a few ground predicates, some
// constrained so the valid-triple filter has teeth.
const Ontology& bench_ontology() {
    static Ontology ont = [] {
        nlohmann::json doc = {
            {"types",
             {{{"id", "A"}, {"label", "A"}}, {{"id", "B"}, {"label", "B"}},
              {{"id", "human"}, {"label", "human"}}}},
            {"predicates",
             {{{"id", "occupation"}, {"label", "occupation"}},
              {{"id", "awardReceived"}, {"label", "award received"}},
              {{"id", "educatedAt"}, {"label", "educated at"}},
              {{"id", "P31"}, {"label", "instanceOf"}},
              {{"id", "r1"}, {"label", "r1"}},
              {{"id", "r2"}, {"label", "r2"}},
              {{"id", "r3"}, {"label", "r3"}},
              {{"id", "r4"}, {"label", "r4"}, {"domain", {"A"}}},
              {{"id", "r5"}, {"label", "r5"}, {"range", {"B"}}}}}};
        return Ontology::from_json(doc);
    }();
    return ont;
}

// Exhaustive assignment enumeration over the whole entity universe;
// independent of the backtracking join.
uint64_t oracle_match_count(const Ontology& ont, const KnowledgeGraph& kg,
                            const BasicGraphPattern& bgp) {
    std::set<std::tuple<EntityId, PredicateId, EntityId>> facts;
    for (const auto& [_, t] : kg.triples())
        if (validate_triple(ont, kg, t).empty()) facts.insert({t.subject, t.predicate, t.object});

    std::vector<std::string> vars;
    for (const TriplePattern& p : bgp.patterns) {
        for (const Term* term : {&p.subject, &p.object})
            if (term->is_var && std::find(vars.begin(), vars.end(), term->name) == vars.end())
                vars.push_back(term->name);
    }
    std::vector<EntityId> universe;
    for (const auto& [id, _] : kg.entities()) universe.push_back(id);
    if (universe.empty()) return 0;

    uint64_t count = 0;
    std::vector<size_t> pick(vars.size(), 0);
    for (;;) {
        std::map<std::string, EntityId> assign;
        for (size_t i = 0; i < vars.size(); ++i) assign[vars[i]] = universe[pick[i]];
        bool ok = true;
        for (const TriplePattern& p : bgp.patterns) {
            EntityId s = p.subject.is_var ? assign[p.subject.name] : p.subject.name;
            EntityId o = p.object.is_var ? assign[p.object.name] : p.object.name;
            if (!facts.count({s, p.predicate, o})) {
                ok = false;
                break;
            }
        }
        if (ok) ++count;
        size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < universe.size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return count;
}

// Isomorphism oracle: try every bijection between the variable sets.
bool oracle_isomorphic(const BasicGraphPattern& a, const BasicGraphPattern& b) {
    auto vars_of = [](const BasicGraphPattern& g) {
        std::vector<std::string> vars;
        for (const TriplePattern& p : g.patterns)
            for (const Term* t : {&p.subject, &p.object})
                if (t->is_var && std::find(vars.begin(), vars.end(), t->name) == vars.end())
                    vars.push_back(t->name);
        return vars;
    };
    std::vector<std::string> va = vars_of(a), vb = vars_of(b);
    if (va.size() != vb.size() || a.patterns.size() != b.patterns.size()) return false;
    std::sort(vb.begin(), vb.end());
    do {
        std::map<std::string, std::string> m;
        for (size_t i = 0; i < va.size(); ++i) m[va[i]] = vb[i];
        std::multiset<std::string> ma, mb;
        for (const TriplePattern& p : a.patterns)
            ma.insert((p.subject.is_var ? m[p.subject.name] : p.subject.name) + "|" +
                      p.predicate + "|" + (p.object.is_var ? m[p.object.name] : p.object.name));
        for (const TriplePattern& p : b.patterns)
            mb.insert((p.subject.is_var ? p.subject.name : p.subject.name) + "|" + p.predicate +
                      "|" + (p.object.is_var ? p.object.name : p.object.name));
        if (ma == mb) return true;
    } while (std::next_permutation(vb.begin(), vb.end()));
    return false;
}

BasicGraphPattern bgp_of(const Ontology& ont, const std::string& text) {
    return parse_bgp(ont, text);
}

}  // namespace

TEST_CASE("parse_bgp reads the two-pattern example") {
    BasicGraphPattern bgp =
        bgp_of(bench_ontology(), "?x1 occupation: ?x2 . ?x1 awardReceived: ?x3 .");
    REQUIRE(bgp.patterns.size() == 2);
    CHECK(bgp.patterns[0].subject == Term{true, "x1"});
    CHECK(bgp.patterns[0].predicate == "occupation");
    CHECK(bgp.patterns[1].predicate == "awardReceived");
    CHECK(bgp.patterns[1].object == Term{true, "x3"});
}

TEST_CASE("parse_bgp accepts constants and single patterns") {
    BasicGraphPattern bgp = bgp_of(bench_ontology(), "?a educatedAt: Princeton .");
    REQUIRE(bgp.patterns.size() == 1);
    CHECK(bgp.patterns[0].object == Term{false, "Princeton"});
    // Too small once normalized.
    CHECK_FALSE(normalize_bgp(bgp).has_value());
}

TEST_CASE("parse_bgp reports syntax errors with token positions") {
    CHECK_THROWS_MATCHES(bgp_of(bench_ontology(), "?x ?y"), data_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("token 2")));
    CHECK_THROWS_MATCHES(bgp_of(bench_ontology(), "?x nosuchpred ?y ."), data_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown predicate")));
    CHECK_THROWS_AS(bgp_of(bench_ontology(), "?x occupation:"), data_error);
    CHECK_THROWS_AS(bgp_of(bench_ontology(), ""), data_error);
}

TEST_CASE("parse_bgp resolves predicates by unique label when the id does not match") {
    BasicGraphPattern bgp = bgp_of(bench_ontology(), "?a instanceOf: ?b . ?a r1 ?c .");
    CHECK(bgp.patterns[0].predicate == "P31");
}

TEST_CASE("bgp text round-trips through the parser") {
    BasicGraphPattern bgp =
        bgp_of(bench_ontology(), "?x1 r1 ?x2 . ?x2 r2 ?x3 . ?x3 r3 ?x4 .");
    BasicGraphPattern again = bgp_of(bench_ontology(), bgp_to_text(bgp));
    CHECK(bgp == again);
}

TEST_CASE("normalize_bgp replaces constants with fresh variables") {
    BasicGraphPattern bgp =
        bgp_of(bench_ontology(), "?p awardReceived: NobelPrizePhysics . ?p occupation: ?o .");
    auto norm = normalize_bgp(bgp);
    REQUIRE(norm.has_value());
    for (const TriplePattern& p : norm->patterns) {
        CHECK(p.subject.is_var);
        CHECK(p.object.is_var);
    }
    // Same constant maps to the same fresh variable.
    BasicGraphPattern twice = bgp_of(
        bench_ontology(), "?p awardReceived: Nobel . ?q occupation: Nobel .");
    auto norm2 = normalize_bgp(twice);
    REQUIRE(norm2.has_value());
    CHECK(norm2->patterns[0].object.name == norm2->patterns[1].object.name);
}

TEST_CASE("normalize_bgp rejects repeated predicates, small and disconnected patterns") {
    const Ontology& ont = bench_ontology();
    CHECK_FALSE(normalize_bgp(bgp_of(ont, "?a r1 ?b . ?b r1 ?c .")).has_value());
    CHECK_FALSE(normalize_bgp(bgp_of(ont, "?a r1 ?b .")).has_value());
    CHECK_FALSE(normalize_bgp(bgp_of(ont, "?a r1 ?b . ?c r2 ?d .")).has_value());
    // Already-normal patterns come back unchanged (fixpoint).
    BasicGraphPattern ok = bgp_of(ont, "?a r1 ?b . ?b r2 ?c .");
    auto norm = normalize_bgp(ok);
    REQUIRE(norm.has_value());
    CHECK(*norm == ok);
}

TEST_CASE("dedup_bgps collapses variable renamings and keeps distinct shapes") {
    const Ontology& ont = bench_ontology();
    BasicGraphPattern a = bgp_of(ont, "?a r1 ?b . ?b r2 ?c .");
    BasicGraphPattern renamed = bgp_of(ont, "?x r1 ?y . ?y r2 ?z .");
    BasicGraphPattern different = bgp_of(ont, "?a r1 ?b . ?c r2 ?b .");

    CHECK(oracle_isomorphic(a, renamed));
    CHECK_FALSE(oracle_isomorphic(a, different));

    std::vector<BasicGraphPattern> out = dedup_bgps({a, renamed, different});
    REQUIRE(out.size() == 2);
    CHECK(out[0] == a);
    CHECK(out[1] == different);
    CHECK(dedup_bgps({}).empty());
}

TEST_CASE("isomorphism test agrees with the exhaustive bijection oracle") {
    std::mt19937_64 rng(31337);
    std::vector<std::string> vars = {"?u", "?v", "?w", "?x"};
    std::vector<std::string> preds = {"r1", "r2", "r3"};
    auto random_bgp = [&] {
        BasicGraphPattern bgp;
        size_t n = 2 + rng() % 2;
        std::vector<std::string> ps = preds;
        for (size_t i = 0; i < n; ++i) {
            TriplePattern p;
            p.subject = Term{true, vars[rng() % vars.size()].substr(1)};
            p.predicate = ps[i];
            p.object = Term{true, vars[rng() % vars.size()].substr(1)};
            bgp.patterns.push_back(p);
        }
        return bgp;
    };
    for (int iter = 0; iter < 300; ++iter) {
        BasicGraphPattern a = random_bgp();
        BasicGraphPattern b = random_bgp();
        CHECK(bgps_isomorphic(a, b) == oracle_isomorphic(a, b));
        CHECK(bgps_isomorphic(a, a));
    }
}

TEST_CASE("dedup outcome is invariant under renaming and reordering") {
    const Ontology& ont = bench_ontology();
    BasicGraphPattern a = bgp_of(ont, "?a r1 ?b . ?b r2 ?c . ?c r3 ?d .");
    BasicGraphPattern renamed = bgp_of(ont, "?q r1 ?w . ?w r2 ?e . ?e r3 ?r .");
    BasicGraphPattern reordered = bgp_of(ont, "?c r3 ?d . ?a r1 ?b . ?b r2 ?c .");
    CHECK(dedup_bgps({a, renamed}).size() == 1);
    CHECK(dedup_bgps({a, reordered}).size() == 1);
    CHECK(dedup_bgps({renamed, reordered}).size() == 1);
}

TEST_CASE("build_ontology_kg encodes constraints as edges with an any node") {
    const Ontology& ont = testutil::toy_ontology();
    OntologyKG okg = build_ontology_kg(ont, {"author", "located-in"});
    // author: dom {book} x rng {human}.
    CHECK(std::find(okg.edges.begin(), okg.edges.end(),
                    std::make_tuple(std::string("book"), std::string("author"),
                                    std::string("human"))) != okg.edges.end());
    // located-in has no domain: the any node fills the subject side.
    CHECK(std::find(okg.edges.begin(), okg.edges.end(),
                    std::make_tuple(okg.any_node, std::string("located-in"),
                                    std::string("place"))) != okg.edges.end());
    CHECK(okg.nodes.count(okg.any_node) == 1);

    CHECK(build_ontology_kg(ont, {}).edges.empty());
    CHECK_THROWS_AS(build_ontology_kg(ont, {"nope"}), data_error);

    // Predicates with neither constraint contribute nothing.
    OntologyKG unconstrained = build_ontology_kg(bench_ontology(), {"r1"});
    CHECK(unconstrained.edges.empty());
}

TEST_CASE("generate_bgps enumerates walks on a two-edge ontology KG") {
    nlohmann::json doc = {
        {"types",
         {{{"id", "A"}, {"label", "A"}}, {{"id", "B"}, {"label", "B"}},
          {{"id", "C"}, {"label", "C"}}}},
        {"predicates",
         {{{"id", "r1"}, {"label", "r1"}, {"domain", {"A"}}, {"range", {"B"}}},
          {{"id", "r2"}, {"label", "r2"}, {"domain", {"B"}}, {"range", {"C"}}}}}};
    Ontology ont = Ontology::from_json(doc);
    OntologyKG okg = build_ontology_kg(ont, {"r1", "r2"});

    // 2p: the only realizable walk is r1 then r2.
    std::vector<BasicGraphPattern> walks = generate_bgps(ont, okg, "2p", 100, 0);
    REQUIRE(walks.size() == 1);
    CHECK(bgp_to_text(walks[0]) == "?x1 r1 ?x2 . ?x2 r2 ?x3 .");
    CHECK(walks[0].template_tag == "2p");

    // 2i: ranges B and C never meet at the shared object.
    CHECK(generate_bgps(ont, okg, "2i", 100, 0).empty());

    CHECK_THROWS_AS(generate_bgps(ont, okg, "5x", 100, 0), data_error);
}

TEST_CASE("generation joins respect the subtype closure") {
    // E < B, so rng(r1)={B} meets dom(r3)={E} at the node typed E.
    nlohmann::json doc = {
        {"types",
         {{{"id", "A"}, {"label", "A"}}, {{"id", "B"}, {"label", "B"}},
          {{"id", "D"}, {"label", "D"}},
          {{"id", "E"}, {"label", "E"}, {"parents", {"B"}}}}},
        {"predicates",
         {{{"id", "r1"}, {"label", "r1"}, {"domain", {"A"}}, {"range", {"B"}}},
          {{"id", "r3"}, {"label", "r3"}, {"domain", {"E"}}, {"range", {"D"}}}}}};
    Ontology ont = Ontology::from_json(doc);
    OntologyKG okg = build_ontology_kg(ont, {"r1", "r3"});
    std::vector<BasicGraphPattern> walks = generate_bgps(ont, okg, "2p", 100, 0);
    REQUIRE(walks.size() == 1);
    CHECK(bgp_to_text(walks[0]) == "?x1 r1 ?x2 . ?x2 r3 ?x3 .");
}

TEST_CASE("capped generation is deterministic for a fixed seed") {
    nlohmann::json doc;
    doc["types"] = nlohmann::json::array({{{"id", "T"}, {"label", "T"}}});
    doc["predicates"] = nlohmann::json::array();
    for (int i = 0; i < 6; ++i)
        doc["predicates"].push_back({{"id", "p" + std::to_string(i)},
                                     {"label", "p" + std::to_string(i)},
                                     {"domain", {"T"}},
                                     {"range", {"T"}}});
    Ontology ont = Ontology::from_json(doc);
    std::vector<PredicateId> subset;
    for (const auto& [id, _] : ont.predicates()) subset.push_back(id);
    OntologyKG okg = build_ontology_kg(ont, subset);

    std::vector<BasicGraphPattern> a = generate_bgps(ont, okg, "2p", 1, 77);
    std::vector<BasicGraphPattern> b = generate_bgps(ont, okg, "2p", 1, 77);
    REQUIRE(a.size() == 1);
    CHECK(bgp_to_text(a[0]) == bgp_to_text(b[0]));
    std::vector<BasicGraphPattern> c = generate_bgps(ont, okg, "2p", 5, 78);
    CHECK(c.size() == 5);
}

TEST_CASE("match_count joins a simple path") {
    const Ontology& ont = bench_ontology();
    GraphBuilder g(ont);
    EntityId a = g.ent("a", {"A"});
    EntityId b = g.ent("b", {"B"});
    EntityId c = g.ent("c", {"A"});
    g.tri(a, "r1", b);
    g.tri(b, "r2", c);
    BasicGraphPattern bgp = bgp_of(ont, "?x r1 ?y . ?y r2 ?z .");
    CHECK(match_count(ont, g.kg, bgp) == 1);
    CHECK(oracle_match_count(ont, g.kg, bgp) == 1);

    KnowledgeGraph empty;
    CHECK(match_count(ont, empty, bgp) == 0);
}

TEST_CASE("match_count counts distinct assignments on the shared-object fixture") {
    const Ontology& ont = bench_ontology();
    GraphBuilder g(ont);
    EntityId a = g.ent("a", {"A"});
    EntityId b = g.ent("b", {"A"});
    EntityId c = g.ent("c", {"B"});
    g.tri(a, "r1", c);
    g.tri(b, "r2", c);
    g.tri(a, "r2", c);
    BasicGraphPattern bgp = bgp_of(ont, "?x1 r1 ?x3 . ?x2 r2 ?x3 .");
    // Exhaustive enumeration: ?x1 binds a; ?x2 binds a or b; ?x3 binds c.
    uint64_t expected = oracle_match_count(ont, g.kg, bgp);
    CHECK(expected == 2);
    CHECK(match_count(ont, g.kg, bgp) == expected);
}

TEST_CASE("variables may co-bind unless the data forbids it") {
    const Ontology& ont = bench_ontology();
    GraphBuilder g(ont);
    EntityId a = g.ent("a", {"A"});
    g.tri(a, "r1", a);
    BasicGraphPattern bgp = bgp_of(ont, "?x r1 ?y . ?y r1 ?x .");
    // Homomorphism semantics: x = y = a satisfies both patterns.
    CHECK(match_count(ont, g.kg, bgp) == 1);
}

TEST_CASE("violating triples are excluded from the match universe") {
    const Ontology& ont = bench_ontology();
    GraphBuilder g(ont);
    EntityId a = g.ent("a", {"A"});
    EntityId b = g.ent("b", {"B"});
    EntityId w = g.ent("w", {"human"});
    g.tri(a, "r4", b);  // valid: dom(r4) = {A}
    g.tri(w, "r4", b);  // violates dom(r4)
    g.tri(b, "r5", b);  // valid: rng(r5) = {B}
    BasicGraphPattern bgp = bgp_of(ont, "?x r4 ?y . ?y r5 ?z .");
    CHECK(match_count(ont, g.kg, bgp) == 1);
    CHECK(oracle_match_count(ont, g.kg, bgp) == 1);
}

TEST_CASE("match_count equals exhaustive enumeration on random instances") {
    const Ontology& ont = bench_ontology();
    std::mt19937_64 rng(4242);
    std::vector<std::string> preds = {"r1", "r2", "r3", "r4", "r5"};
    for (int iter = 0; iter < 40; ++iter) {
        GraphBuilder g(ont);
        std::vector<EntityId> ids;
        size_t n_ent = 3 + rng() % 6;
        for (size_t i = 0; i < n_ent; ++i) {
            std::set<TypeId> types;
            if (rng() % 2) types.insert("A");
            if (rng() % 2) types.insert("B");
            if (types.empty()) types.insert("human");
            ids.push_back(g.ent("e" + std::to_string(i), types));
        }
        size_t n_tri = rng() % 20;
        for (size_t i = 0; i < n_tri; ++i)
            g.tri(ids[rng() % ids.size()], preds[rng() % preds.size()], ids[rng() % ids.size()]);

        const std::string tmpl = bgp_templates()[iter % bgp_templates().size()];
        const auto& shape = template_shape(tmpl);
        BasicGraphPattern bgp;
        std::vector<std::string> chosen = preds;
        for (size_t i = 0; i < shape.size(); ++i) {
            TriplePattern p;
            p.subject = Term{true, "x" + std::to_string(shape[i].first)};
            p.predicate = chosen[i];
            p.object = Term{true, "x" + std::to_string(shape[i].second)};
            bgp.patterns.push_back(p);
        }
        CHECK(match_count(ont, g.kg, bgp) == oracle_match_count(ont, g.kg, bgp));
    }
}

TEST_CASE("h-index and i-k-index match their definitional scans") {
    CHECK(h_index({}) == 0);
    CHECK(i_k_index({}, 100) == 0);
    CHECK(h_index({10, 8, 5, 4, 3}) == 4);
    CHECK(i_k_index({150, 120, 99}, 100) == 2);

    std::mt19937_64 rng(555);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<uint64_t> freqs;
        size_t n = rng() % 40;
        for (size_t i = 0; i < n; ++i) freqs.push_back(rng() % 300);

        // Definitional scan: the largest n with >= n entries >= n.
        uint64_t h = 0;
        for (uint64_t candidate = 0; candidate <= freqs.size(); ++candidate) {
            uint64_t at_least = 0;
            for (uint64_t f : freqs)
                if (f >= candidate) ++at_least;
            if (at_least >= candidate) h = candidate;
        }
        CHECK(h_index(freqs) == h);
        CHECK(h_index(freqs) <= freqs.size());

        uint64_t k = rng() % 200;
        uint64_t ik = 0;
        for (uint64_t f : freqs)
            if (f >= k) ++ik;
        CHECK(i_k_index(freqs, k) == ik);
        if (k > 0) CHECK(i_k_index(freqs, k) <= i_k_index(freqs, k - 1));

        std::vector<uint64_t> shuffled = freqs;
        for (size_t i = 0; i + 1 < shuffled.size(); ++i)
            std::swap(shuffled[i], shuffled[i + rng() % (shuffled.size() - i)]);
        CHECK(h_index(shuffled) == h);
    }
}

TEST_CASE("edge stats: documented examples") {
    const Ontology& ont = bench_ontology();
    GraphBuilder g(ont);
    EntityId a = g.ent("a", {"A"});
    EntityId b = g.ent("b", {"B"});
    EntityId c = g.ent("c", {"A"});
    EntityId d = g.ent("d", {"B"});
    g.tri(a, "r1", b);
    g.tri(a, "r2", b);
    g.tri(c, "r1", d);
    EdgeStats stats = edge_stats(ont, g.kg);
    CHECK(*stats.avg_multiplicity == Catch::Approx(1.5));
    CHECK(*stats.pct_pairs_multi == Catch::Approx(50.0));

    GraphBuilder flat(ont);
    flat.tri(flat.ent("x", {"A"}), "r1", flat.ent("y", {"B"}));
    flat.tri(flat.ent("y", {"B"}), "r2", flat.ent("z", {"A"}));
    EdgeStats fstats = edge_stats(ont, flat.kg);
    CHECK(*fstats.avg_multiplicity == Catch::Approx(1.0));
    CHECK(*fstats.pct_pairs_multi == Catch::Approx(0.0));

    KnowledgeGraph empty;
    EdgeStats estats = edge_stats(ont, empty);
    CHECK_FALSE(estats.avg_multiplicity.has_value());
    CHECK_FALSE(estats.pct_pairs_multi.has_value());
}

TEST_CASE("edge stats agree with direct enumeration on random graphs") {
    const Ontology& ont = bench_ontology();
    std::mt19937_64 rng(808);
    std::vector<std::string> preds = {"r1", "r2", "r3"};
    for (int iter = 0; iter < 30; ++iter) {
        GraphBuilder g(ont);
        std::vector<EntityId> ids;
        for (int i = 0; i < 5; ++i) ids.push_back(g.ent("e" + std::to_string(i), {"A"}));
        size_t n = rng() % 15;
        for (size_t i = 0; i < n; ++i)
            g.tri(ids[rng() % ids.size()], preds[rng() % preds.size()], ids[rng() % ids.size()]);

        std::map<std::pair<EntityId, EntityId>, std::set<PredicateId>> oracle;
        for (const auto& [_, t] : g.kg.triples()) oracle[{t.subject, t.object}].insert(t.predicate);
        EdgeStats stats = edge_stats(ont, g.kg);
        if (oracle.empty()) {
            CHECK_FALSE(stats.avg_multiplicity.has_value());
            continue;
        }
        double total = 0, multi = 0;
        for (const auto& [_, s] : oracle) {
            total += static_cast<double>(s.size());
            if (s.size() >= 2) ++multi;
        }
        CHECK(*stats.avg_multiplicity ==
              Catch::Approx(total / static_cast<double>(oracle.size())));
        CHECK(*stats.pct_pairs_multi ==
              Catch::Approx(100.0 * multi / static_cast<double>(oracle.size())));
    }
}

TEST_CASE("BGP files round-trip with comments") {
    testutil::TempDir dir("bgp");
    testutil::write_file(dir.file("patterns.txt"),
                         "# log-derived patterns\n"
                         "?x1 r1 ?x2 . ?x2 r2 ?x3 .\n"
                         "\n"
                         "?a occupation: ?b . ?a awardReceived: ?c .  # trailing comment\n");
    std::vector<BasicGraphPattern> bgps = parse_bgp_file(bench_ontology(), dir.file("patterns.txt"));
    REQUIRE(bgps.size() == 2);
    CHECK(bgps[1].patterns[0].predicate == "occupation");

    testutil::write_file(dir.file("bad.txt"), "?x r1 ?y\n?broken\n");
    CHECK_THROWS_MATCHES(parse_bgp_file(bench_ontology(), dir.file("bad.txt")), data_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("line 2")));
}

TEST_CASE("evaluate_bgps assembles the metrics report") {
    const Ontology& ont = bench_ontology();
    GraphBuilder g(ont);
    EntityId a = g.ent("a", {"A"});
    EntityId b = g.ent("b", {"B"});
    EntityId c = g.ent("c", {"A"});
    g.tri(a, "r1", b);
    g.tri(b, "r2", c);
    std::vector<BasicGraphPattern> bgps = {bgp_of(ont, "?x r1 ?y . ?y r2 ?z .")};
    BgpMetrics metrics = evaluate_bgps(ont, g.kg, bgps);
    CHECK(metrics.h == 1);
    CHECK(metrics.i10 == 0);
    nlohmann::json j = metrics.to_json();
    CHECK(j.at("per_bgp").size() == 1);
    CHECK(j.at("per_bgp").at(0).at("count") == 1);
    CHECK(j.at("h_index") == 1);
}
