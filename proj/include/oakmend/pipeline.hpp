#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oakmend/bgp.hpp"
#include "oakmend/canon.hpp"
#include "oakmend/core.hpp"
#include "oakmend/extract.hpp"
#include "oakmend/kg.hpp"
#include "oakmend/llm.hpp"
#include "oakmend/mend.hpp"
#include "oakmend/ontology.hpp"
#include "oakmend/validate.hpp"

namespace oakmend {

struct PipelineConfig {
    std::string ontology_path;
    std::string corpus_path;
    std::string out_dir;
    std::string backend_mode = "scripted-mock";  // live | scripted-mock | replay
    std::string mock_dir;
    std::string chat_url;   // falls back to OAKMEND_CHAT_URL
    std::string embed_url;  // falls back to OAKMEND_EMBED_URL
    double beta = 0.05;
    double dedup_threshold = 0.9;
    double similarity_floor = 0.3;
    int candidate_k = 10;
    int mend_rounds = 1;
    int parallelism = 1;
    int context_cap = 20;
    uint64_t seed = 0;
    // bgp-gen / bgp-eval inputs
    std::vector<std::string> bgp_templates_requested;
    size_t bgp_cap = 10000;
    std::string bgp_file;

    void validate() const {
        if (beta < 0 || beta > 1) throw data_error("beta must be in [0, 1]");
        if (dedup_threshold < -1 || dedup_threshold > 1)
            throw data_error("dedup threshold must be in [-1, 1]");
        if (candidate_k < 1) throw data_error("candidate k must be >= 1");
        if (mend_rounds < 1) throw data_error("mend rounds must be >= 1");
        if (parallelism < 1) throw data_error("parallelism must be >= 1");
        if (context_cap < 1) throw data_error("context cap must be >= 1");
        if (backend_mode != "live" && backend_mode != "scripted-mock" &&
            backend_mode != "replay")
            throw data_error("backend mode must be live, scripted-mock, or replay");
    }

    nlohmann::json to_json() const {
        return {{"ontology_path", ontology_path},
                {"corpus_path", corpus_path},
                {"out_dir", out_dir},
                {"backend_mode", backend_mode},
                {"mock_dir", mock_dir},
                {"chat_url", chat_url},
                {"embed_url", embed_url},
                {"beta", beta},
                {"dedup_threshold", dedup_threshold},
                {"similarity_floor", similarity_floor},
                {"candidate_k", candidate_k},
                {"mend_rounds", mend_rounds},
                {"parallelism", parallelism},
                {"context_cap", context_cap},
                {"seed", seed},
                {"bgp_templates", bgp_templates_requested},
                {"bgp_cap", bgp_cap},
                {"bgp_file", bgp_file}};
    }

    static PipelineConfig from_json(const nlohmann::json& j) {
        PipelineConfig c;
        c.ontology_path = j.value("ontology_path", c.ontology_path);
        c.corpus_path = j.value("corpus_path", c.corpus_path);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.backend_mode = j.value("backend_mode", c.backend_mode);
        c.mock_dir = j.value("mock_dir", c.mock_dir);
        c.chat_url = j.value("chat_url", c.chat_url);
        c.embed_url = j.value("embed_url", c.embed_url);
        c.beta = j.value("beta", c.beta);
        c.dedup_threshold = j.value("dedup_threshold", c.dedup_threshold);
        c.similarity_floor = j.value("similarity_floor", c.similarity_floor);
        c.candidate_k = j.value("candidate_k", c.candidate_k);
        c.mend_rounds = j.value("mend_rounds", c.mend_rounds);
        c.parallelism = j.value("parallelism", c.parallelism);
        c.context_cap = j.value("context_cap", c.context_cap);
        c.seed = j.value("seed", c.seed);
        if (j.contains("bgp_templates"))
            c.bgp_templates_requested = j.at("bgp_templates").get<std::vector<std::string>>();
        c.bgp_cap = j.value("bgp_cap", c.bgp_cap);
        c.bgp_file = j.value("bgp_file", c.bgp_file);
        return c;
    }

    // Hash over everything that feeds artifact content; mixing artifacts
    // from different configs is rejected via this pin. The output
    // directory itself is not content-relevant.
    std::string config_hash() const {
        nlohmann::json j = to_json();
        j.erase("out_dir");
        return hex64(fnv1a64(j.dump()));
    }
};

// Atomic write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw data_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw data_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("'" + path + "': " + e.what());
    }
}

// Stage completion flags and artifact paths. A completed stage's artifact
// must exist; the manifest carries no timestamps so reruns are
// byte-reproducible.
struct RunManifest {
    std::string config_hash;
    std::string ontology_hash;
    std::map<std::string, std::vector<std::string>> stages;  // stage -> artifact filenames
    std::vector<nlohmann::json> failures;

    bool done(const std::string& stage) const { return stages.count(stage) > 0; }

    nlohmann::json to_json() const {
        return {{"version", 1},
                {"config_hash", config_hash},
                {"ontology_hash", ontology_hash},
                {"stages", stages},
                {"failures", failures}};
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.config_hash = j.at("config_hash").get<std::string>();
        m.ontology_hash = j.at("ontology_hash").get<std::string>();
        for (const auto& [k, v] : j.at("stages").items())
            m.stages[k] = v.get<std::vector<std::string>>();
        for (const auto& f : j.at("failures")) m.failures.push_back(f);
        return m;
    }
};

// One pipeline run owns its output directory exclusively.
class RunLock {
public:
    explicit RunLock(const std::string& dir) : path_(std::filesystem::path(dir) / ".lock") {
        std::filesystem::create_directories(dir);
        if (std::filesystem::exists(path_))
            throw data_error("output directory is locked by another run (" + path_.string() +
                             "); remove the stale lock to proceed");
        std::ofstream out(path_);
        out << "locked\n";
    }
    ~RunLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
};

// Stage artifacts, fixed names inside the output directory.
namespace artifact {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kLedger = "ledger.json";
inline constexpr const char* kOpenGraph = "open_graph.json";
inline constexpr const char* kCanonKg = "kg_canon.jsonl";
inline constexpr const char* kCanonReport = "canon_report.json";
inline constexpr const char* kDedupKg = "kg_dedup.jsonl";
inline constexpr const char* kDedupReport = "dedup_report.json";
inline constexpr const char* kValidatePre = "validate_pre.json";
inline constexpr const char* kMendedKg = "kg_mended.jsonl";
inline constexpr const char* kMendReport = "mend_report.json";
inline constexpr const char* kValidatePost = "validate_post.json";
inline constexpr const char* kStats = "stats.json";
inline constexpr const char* kBgps = "bgps.txt";
inline constexpr const char* kBgpMetrics = "bgp_metrics.json";
}  // namespace artifact

// Backends for one run; the pipeline owns the scripted/live objects and
// hands stages a ChatClient + EmbedClient pair.
struct BackendSet {
    std::unique_ptr<ScriptedChat> scripted;
    std::unique_ptr<ChatBackend> live;  // set in live/replay modes
    std::unique_ptr<EmbedBackend> embedder;
    // Heap-held so ChatClient's reference survives moving the set.
    std::unique_ptr<TokenLedger> ledger = std::make_unique<TokenLedger>();
    std::unique_ptr<ChatClient> chat;
    std::unique_ptr<EmbedClient> embed;
};

// The pipeline stage driver. Stages read prior artifacts from disk and
// write their own atomically, so every stage is independently runnable,
// inspectable, and resumable.
class Pipeline {
public:
    Pipeline(PipelineConfig config, BackendSet backends)
        : config_(std::move(config)), backends_(std::move(backends)) {
        config_.validate();
        ontology_ = Ontology::load_file(config_.ontology_path);
        std::filesystem::create_directories(config_.out_dir);
        load_or_init_manifest();
    }

    const Ontology& ontology() const { return ontology_; }
    const RunManifest& manifest() const { return manifest_; }
    const TokenLedger& ledger() const { return *backends_.ledger; }
    const PipelineConfig& config() const { return config_; }

    static const std::vector<std::string>& pipeline_stages() {
        static const std::vector<std::string> kOrder = {
            "extract", "canon", "dedup", "validate", "mend", "validate_post", "stats"};
        return kOrder;
    }

    // Runs one stage; returns false when the stage was already complete
    // and force is off (no-op with notice).
    bool run_stage(const std::string& stage, bool force = false) {
        if (manifest_.done(stage) && !force) return false;
        check_prerequisites(stage);

        if (stage == "extract") run_extract();
        else if (stage == "canon") run_canon();
        else if (stage == "dedup") run_dedup();
        else if (stage == "validate") run_validate(artifact::kValidatePre, "validate", latest_kg_for_validate());
        else if (stage == "validate_post") run_validate(artifact::kValidatePost, "validate_post", artifact::kMendedKg);
        else if (stage == "mend") run_mend();
        else if (stage == "stats") run_stats();
        else if (stage == "bgp-gen") run_bgp_gen();
        else if (stage == "bgp-eval") run_bgp_eval();
        else throw data_error("unknown stage '" + stage + "'");
        return true;
    }

    // extract → canon → dedup → validate → mend → validate → stats,
    // resuming from the manifest.
    void run_pipeline(bool force = false) {
        for (const std::string& stage : pipeline_stages()) run_stage(stage, force);
    }

    nlohmann::json stats_json() const { return read_artifact_json(artifact::kStats); }

    std::string artifact_path(const std::string& name) const {
        return (std::filesystem::path(config_.out_dir) / name).string();
    }

private:
    PipelineConfig config_;
    BackendSet backends_;
    Ontology ontology_;
    RunManifest manifest_;

    void load_or_init_manifest() {
        std::string path = artifact_path(artifact::kManifest);
        if (std::filesystem::exists(path)) {
            manifest_ = RunManifest::from_json(read_json_file(path));
            if (manifest_.config_hash != config_.config_hash())
                throw data_error("output directory holds artifacts from a different config "
                                 "(hash " + manifest_.config_hash + " vs " +
                                 config_.config_hash() + ")");
            if (manifest_.ontology_hash != ontology_.hash())
                throw data_error("output directory holds artifacts from a different ontology");
            for (const auto& [stage, files] : manifest_.stages)
                for (const std::string& f : files)
                    if (!std::filesystem::exists(artifact_path(f)))
                        throw data_error("manifest lists stage '" + stage +
                                         "' as done but artifact '" + f + "' is missing");
            std::string lpath = artifact_path(artifact::kLedger);
            if (std::filesystem::exists(lpath))
                *backends_.ledger = TokenLedger::from_json(read_json_file(lpath));
        } else {
            manifest_.config_hash = config_.config_hash();
            manifest_.ontology_hash = ontology_.hash();
            save_manifest();
        }
    }

    void save_manifest() {
        write_file_atomic(artifact_path(artifact::kManifest), manifest_.to_json().dump(2) + "\n");
    }

    void persist_ledger() {
        write_file_atomic(artifact_path(artifact::kLedger),
                          backends_.ledger->to_json().dump(2) + "\n");
    }

    void complete_stage(const std::string& stage, std::vector<std::string> files) {
        manifest_.stages[stage] = std::move(files);
        persist_ledger();
        save_manifest();
    }

    void check_prerequisites(const std::string& stage) const {
        static const std::map<std::string, std::vector<std::string>> kPrereqs = {
            {"extract", {}},
            {"canon", {"extract"}},
            {"dedup", {"extract", "canon"}},
            {"validate", {"extract", "canon"}},
            {"mend", {"extract", "canon", "dedup", "validate"}},
            {"validate_post", {"extract", "canon", "dedup", "validate", "mend"}},
            {"stats", {"extract", "canon", "dedup", "validate", "mend", "validate_post"}},
            {"bgp-gen", {}},
            {"bgp-eval", {"extract", "canon"}},
        };
        for (const std::string& pre : kPrereqs.at(stage))
            if (!manifest_.done(pre))
                throw data_error("stage '" + stage + "' requires stage '" + pre +
                                 "' to run first");
    }

    nlohmann::json read_artifact_json(const std::string& name) const {
        return read_json_file(artifact_path(name));
    }

    // Pre-mend validation runs against the deduplicated KG when dedup has
    // run, else the freshly canonicalized one.
    std::string latest_kg_for_validate() const {
        return manifest_.done("dedup") ? artifact::kDedupKg : artifact::kCanonKg;
    }

    void run_extract() {
        std::vector<Document> docs = load_corpus(config_.corpus_path);
        std::vector<Chunk> chunks = chunk_corpus(docs);
        OpenGraph open = extract_corpus(*backends_.chat, chunks, config_.parallelism);
        for (const ChunkId& id : open.failed_chunks)
            manifest_.failures.push_back({{"stage", "extract"},
                                          {"detail", "chunk " + id + " skipped: JSON parse failed twice"}});
        write_file_atomic(artifact_path(artifact::kOpenGraph), open.to_json().dump(2) + "\n");
        complete_stage("extract", {artifact::kOpenGraph});
    }

    void run_canon() {
        OpenGraph open = OpenGraph::from_json(read_artifact_json(artifact::kOpenGraph));
        CanonOptions opts;
        opts.beta = config_.beta;
        opts.similarity_floor = config_.similarity_floor;
        opts.context_cap = static_cast<size_t>(config_.context_cap);
        CanonResult result =
            canonicalize_graph(ontology_, open, *backends_.chat, *backends_.embed, opts);
        std::ostringstream kg_out;
        save_kg(result.kg, kg_out);
        write_file_atomic(artifact_path(artifact::kCanonKg), kg_out.str());
        write_file_atomic(artifact_path(artifact::kCanonReport),
                          result.report.to_json().dump(2) + "\n");
        complete_stage("canon", {artifact::kCanonKg, artifact::kCanonReport});
    }

    void run_dedup() {
        KnowledgeGraph kg = load_kg_file(artifact_path(artifact::kCanonKg));
        DedupReport report =
            dedup_entities(kg, *backends_.chat, *backends_.embed, config_.dedup_threshold);
        std::ostringstream kg_out;
        save_kg(kg, kg_out);
        write_file_atomic(artifact_path(artifact::kDedupKg), kg_out.str());
        write_file_atomic(artifact_path(artifact::kDedupReport), report.to_json().dump(2) + "\n");
        complete_stage("dedup", {artifact::kDedupKg, artifact::kDedupReport});
    }

    void run_validate(const std::string& artifact_name, const std::string& stage_name,
                      const std::string& kg_artifact) {
        KnowledgeGraph kg = load_kg_file(artifact_path(kg_artifact));
        if (kg.ontology_hash != ontology_.hash())
            throw data_error("KG artifact was canonicalized against a different ontology");
        GraphValidation v = validate_graph(ontology_, kg);
        nlohmann::json j = v.report.to_json();
        nlohmann::json violations = nlohmann::json::array();
        for (const Violation& viol : v.violations) {
            nlohmann::json vj = {{"kind", to_string(viol.kind)},
                                 {"triple", viol.triple_id},
                                 {"explanation", viol.explanation}};
            if (viol.qualifier_index) vj["qualifier_index"] = *viol.qualifier_index;
            violations.push_back(vj);
        }
        j["violations"] = violations;
        write_file_atomic(artifact_path(artifact_name), j.dump(2) + "\n");
        complete_stage(stage_name, {artifact_name});
    }

    void run_mend() {
        KnowledgeGraph kg = load_kg_file(artifact_path(artifact::kDedupKg));
        OpenGraph open = OpenGraph::from_json(read_artifact_json(artifact::kOpenGraph));
        std::map<ChunkId, std::string> chunk_texts;
        for (const Chunk& c : open.chunks) chunk_texts[c.id()] = c.text;
        MendOptions opts;
        opts.candidate_k = static_cast<size_t>(config_.candidate_k);
        opts.rounds = config_.mend_rounds;
        MendReport report =
            mend_graph(ontology_, kg, *backends_.chat, *backends_.embed, chunk_texts, opts);
        std::ostringstream kg_out;
        save_kg(kg, kg_out);
        write_file_atomic(artifact_path(artifact::kMendedKg), kg_out.str());
        write_file_atomic(artifact_path(artifact::kMendReport), report.to_json().dump(2) + "\n");
        complete_stage("mend", {artifact::kMendedKg, artifact::kMendReport});
    }

    void run_stats() {
        ConsistencyReport pre =
            ConsistencyReport::from_json(read_artifact_json(artifact::kValidatePre));
        ConsistencyReport post =
            ConsistencyReport::from_json(read_artifact_json(artifact::kValidatePost));
        nlohmann::json mend = read_artifact_json(artifact::kMendReport);
        TokenLedger::Snapshot total = backends_.ledger->total();
        nlohmann::json j = {
            {"triples",
             {{"total_pre", pre.total_triples},
              {"pct_valid_pre", pre.pct_valid_triples ? nlohmann::json(*pre.pct_valid_triples)
                                                      : nlohmann::json(nullptr)},
              {"total_post", post.total_triples},
              {"pct_valid_post", post.pct_valid_triples ? nlohmann::json(*post.pct_valid_triples)
                                                        : nlohmann::json(nullptr)}}},
            {"qualifiers",
             {{"total_pre", pre.total_qualifiers},
              {"pct_valid_pre", pre.pct_valid_qualifiers
                                    ? nlohmann::json(*pre.pct_valid_qualifiers)
                                    : nlohmann::json(nullptr)},
              {"total_post", post.total_qualifiers},
              {"pct_valid_post", post.pct_valid_qualifiers
                                     ? nlohmann::json(*post.pct_valid_qualifiers)
                                     : nlohmann::json(nullptr)}}},
            {"mend", mend},
            {"tokens", backends_.ledger->to_json()},
            {"weighted_cost",
             {{"prompt_weight", 0.25},
              {"value", weighted_cost(total.prompt_tokens, total.completion_tokens, 0.25)}}}};
        write_file_atomic(artifact_path(artifact::kStats), j.dump(2) + "\n");
        complete_stage("stats", {artifact::kStats});
    }

    void run_bgp_gen() {
        std::vector<PredicateId> subset;
        for (const auto& [id, spec] : ontology_.predicates())
            if (!spec.is_qualifier && (spec.domain || spec.range)) subset.push_back(id);
        OntologyKG okg = build_ontology_kg(ontology_, subset);
        std::vector<std::string> templates = config_.bgp_templates_requested;
        if (templates.empty()) templates = bgp_templates();
        std::vector<BasicGraphPattern> all;
        for (const std::string& tmpl : templates) {
            auto batch = generate_bgps(ontology_, okg, tmpl, config_.bgp_cap, config_.seed);
            all.insert(all.end(), batch.begin(), batch.end());
        }
        std::ostringstream out;
        write_bgp_file(all, out);
        write_file_atomic(artifact_path(artifact::kBgps), out.str());
        complete_stage("bgp-gen", {artifact::kBgps});
    }

    void run_bgp_eval() {
        std::string bgp_path =
            config_.bgp_file.empty() ? artifact_path(artifact::kBgps) : config_.bgp_file;
        std::vector<BasicGraphPattern> raw = parse_bgp_file(ontology_, bgp_path);
        std::vector<BasicGraphPattern> normalized;
        for (const BasicGraphPattern& bgp : raw)
            if (auto n = normalize_bgp(bgp)) normalized.push_back(std::move(*n));
        normalized = dedup_bgps(normalized);

        std::string kg_artifact = manifest_.done("mend")    ? artifact::kMendedKg
                                  : manifest_.done("dedup") ? artifact::kDedupKg
                                                            : artifact::kCanonKg;
        KnowledgeGraph kg = load_kg_file(artifact_path(kg_artifact));
        BgpMetrics metrics = evaluate_bgps(ontology_, kg, normalized);
        write_file_atomic(artifact_path(artifact::kBgpMetrics), metrics.to_json().dump(2) + "\n");
        complete_stage("bgp-eval", {artifact::kBgpMetrics});
    }
};

// Scripted-mock backends: strict fixture replay plus the trigram
// embedder. Live and replay variants live with the CLI, which links the
// HTTP clients.
inline BackendSet make_mock_backends(const std::string& mock_dir = "") {
    BackendSet b;
    b.scripted = std::make_unique<ScriptedChat>();
    if (!mock_dir.empty()) b.scripted->load_dir(mock_dir);
    b.embedder = std::make_unique<TrigramEmbedder>();
    b.chat = std::make_unique<ChatClient>(*b.scripted, *b.ledger);
    b.embed = std::make_unique<EmbedClient>(*b.embedder);
    return b;
}

inline std::string stats_table(const nlohmann::json& stats) {
    char buf[256];
    std::string out;
    auto pct = [&](const nlohmann::json& v) {
        if (v.is_null()) return std::string("n/a");
        char b[32];
        std::snprintf(b, sizeof(b), "%.1f", v.get<double>());
        return std::string(b);
    };
    std::snprintf(buf, sizeof(buf), "%-22s %12s %12s\n", "", "triples", "qualifiers");
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-22s %12llu %12llu\n", "total (pre-mend)",
                  stats.at("triples").at("total_pre").get<unsigned long long>(),
                  stats.at("qualifiers").at("total_pre").get<unsigned long long>());
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-22s %12s %12s\n", "% valid (pre-mend)",
                  pct(stats.at("triples").at("pct_valid_pre")).c_str(),
                  pct(stats.at("qualifiers").at("pct_valid_pre")).c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-22s %12llu %12llu\n", "total (post-mend)",
                  stats.at("triples").at("total_post").get<unsigned long long>(),
                  stats.at("qualifiers").at("total_post").get<unsigned long long>());
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-22s %12s %12s\n", "% valid (post-mend)",
                  pct(stats.at("triples").at("pct_valid_post")).c_str(),
                  pct(stats.at("qualifiers").at("pct_valid_post")).c_str());
    out += buf;
    const auto& tokens = stats.at("tokens").at("total");
    std::snprintf(buf, sizeof(buf),
                  "tokens: prompt=%llu completion=%llu weighted(w=0.25)=%.1f\n",
                  tokens.at("prompt_tokens").get<unsigned long long>(),
                  tokens.at("completion_tokens").get<unsigned long long>(),
                  stats.at("weighted_cost").at("value").get<double>());
    out += buf;
    for (const auto& [stage, counts] : stats.at("tokens").at("stages").items()) {
        std::snprintf(buf, sizeof(buf), "  %-16s prompt=%-8llu completion=%-8llu calls=%llu\n",
                      stage.c_str(), counts.at("prompt_tokens").get<unsigned long long>(),
                      counts.at("completion_tokens").get<unsigned long long>(),
                      counts.at("calls").get<unsigned long long>());
        out += buf;
    }
    return out;
}

}  // namespace oakmend
