// oakmend: staged pipeline for ontology-aligned KG extraction, symbolic
// validation, LLM-planned corrections, and the BGP benchmark.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oakmend/http_backend.hpp"
#include "oakmend/pipeline.hpp"

namespace {

using namespace oakmend;

BackendSet make_backends(const PipelineConfig& config) {
    BackendSet b;
    if (config.backend_mode == "scripted-mock") {
        b.scripted = std::make_unique<ScriptedChat>();
        if (!config.mock_dir.empty()) b.scripted->load_dir(config.mock_dir);
        b.embedder = std::make_unique<TrigramEmbedder>();
        b.chat = std::make_unique<ChatClient>(*b.scripted, *b.ledger);
    } else if (config.backend_mode == "live") {
        std::string url = config.chat_url.empty() ? env_or("OAKMEND_CHAT_URL", "") : config.chat_url;
        if (url.empty()) throw data_error("live mode needs --chat-url or OAKMEND_CHAT_URL");
        b.live = std::make_unique<HttpChatBackend>(
            parse_endpoint(url, env_or("OAKMEND_API_KEY", ""), "default"));
        std::string eurl =
            config.embed_url.empty() ? env_or("OAKMEND_EMBED_URL", "") : config.embed_url;
        if (eurl.empty())
            b.embedder = std::make_unique<TrigramEmbedder>();
        else
            b.embedder = std::make_unique<HttpEmbedBackend>(
                parse_endpoint(eurl, env_or("OAKMEND_API_KEY", ""), "default"));
        b.chat = std::make_unique<ChatClient>(*b.live, *b.ledger);
    } else {  // replay: scripted entries first, live fallback recorded into the mock dir
        if (config.mock_dir.empty()) throw data_error("replay mode needs --mock DIR");
        b.scripted = std::make_unique<ScriptedChat>();
        if (std::filesystem::is_directory(config.mock_dir))
            b.scripted->load_dir(config.mock_dir);
        b.scripted->set_record_dir(config.mock_dir);
        std::string url = config.chat_url.empty() ? env_or("OAKMEND_CHAT_URL", "") : config.chat_url;
        if (!url.empty()) {
            b.live = std::make_unique<HttpChatBackend>(
                parse_endpoint(url, env_or("OAKMEND_API_KEY", ""), "default"));
            ChatBackend* live = b.live.get();
            b.scripted->set_fallback([live](Stage stage, const std::string& prompt) {
                ScriptedChat::Entry e;
                uint64_t p = 0, c = 0;
                e.response = live->chat_raw(stage, prompt, p, c);
                e.prompt_tokens = p;
                e.completion_tokens = c;
                return e;
            });
        }
        b.embedder = std::make_unique<TrigramEmbedder>();
        b.chat = std::make_unique<ChatClient>(*b.scripted, *b.ledger);
    }
    b.embed = std::make_unique<EmbedClient>(*b.embedder);
    return b;
}

int run(int argc, char** argv) {
    CLI::App app{"ontology-aligned KG extraction with post-hoc constraint mending"};
    app.require_subcommand(1);

    std::string config_path, ontology_path, in_path, out_dir, mock_dir, chat_url, embed_url;
    double beta = -1;
    double dedup_threshold = -1;
    int64_t seed = -1;
    int parallelism = 0;
    int mend_rounds = 0;
    int candidate_k = 0;
    int context_cap = 0;
    bool force = false;
    std::string backend_mode;
    std::vector<std::string> templates;
    int64_t bgp_cap = -1;

    app.add_option("--config", config_path, "JSON config file mirroring PipelineConfig");
    app.add_option("--ontology", ontology_path, "ontology JSON document");
    app.add_option("--in", in_path, "stage input (corpus, KG, or BGP file)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--beta", beta, "canonicalization band width");
    app.add_option("--dedup-threshold", dedup_threshold, "dedup clustering cosine threshold");
    app.add_option("--context-cap", context_cap, "entity/pair context cap in canon prompts");
    app.add_option("--seed", seed, "RNG seed for BGP sampling");
    app.add_option("--parallelism", parallelism, "max in-flight extraction chunks");
    app.add_option("--mend-rounds", mend_rounds, "extra mend passes");
    app.add_option("--candidate-k", candidate_k, "replacement candidate list size");
    app.add_option("--mock", mock_dir, "scripted mock / replay fixture directory");
    app.add_option("--backend", backend_mode, "live | scripted-mock | replay");
    app.add_option("--chat-url", chat_url, "chat endpoint (else OAKMEND_CHAT_URL)");
    app.add_option("--embed-url", embed_url, "embedding endpoint (else OAKMEND_EMBED_URL)");
    app.add_option("--templates", templates, "BGP templates for bgp-gen");
    app.add_option("--bgp-cap", bgp_cap, "max BGPs per template");
    app.add_flag("--force", force, "rerun stages that are already complete");

    std::vector<std::string> stage_names = {"extract", "canon", "dedup",   "validate", "mend",
                                            "stats",   "bgp-gen", "bgp-eval", "pipeline"};
    std::map<std::string, CLI::App*> subs;
    for (const std::string& name : stage_names) {
        subs[name] = app.add_subcommand(name, "run the " + name + " stage");
        subs[name]->fallthrough();  // global flags may follow the subcommand
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        PipelineConfig config;
        if (!config_path.empty()) config = PipelineConfig::from_json(read_json_file(config_path));
        if (!ontology_path.empty()) config.ontology_path = ontology_path;
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!mock_dir.empty()) config.mock_dir = mock_dir;
        if (!backend_mode.empty()) config.backend_mode = backend_mode;
        if (!chat_url.empty()) config.chat_url = chat_url;
        if (!embed_url.empty()) config.embed_url = embed_url;
        if (beta >= 0) config.beta = beta;
        if (dedup_threshold >= 0) config.dedup_threshold = dedup_threshold;
        if (seed >= 0) config.seed = static_cast<uint64_t>(seed);
        if (parallelism > 0) config.parallelism = parallelism;
        if (mend_rounds > 0) config.mend_rounds = mend_rounds;
        if (candidate_k > 0) config.candidate_k = candidate_k;
        if (context_cap > 0) config.context_cap = context_cap;
        if (!templates.empty()) config.bgp_templates_requested = templates;
        if (bgp_cap > 0) config.bgp_cap = static_cast<size_t>(bgp_cap);

        std::string sub;
        for (const auto& [name, ptr] : subs)
            if (ptr->parsed()) sub = name;

        if (!in_path.empty()) {
            if (sub == "bgp-eval")
                config.bgp_file = in_path;
            else
                config.corpus_path = in_path;
        }
        if (config.ontology_path.empty()) throw data_error("--ontology (or config) is required");
        if (config.out_dir.empty()) throw data_error("--out (or config) is required");
        config.validate();

        RunLock lock(config.out_dir);
        Pipeline pipeline(config, make_backends(config));

        auto notice = [&](const std::string& stage, bool ran) {
            if (!ran)
                std::cerr << "stage '" << stage << "' already complete; use --force to rerun\n";
        };

        if (sub == "pipeline") {
            pipeline.run_pipeline(force);
            std::cout << stats_table(pipeline.stats_json());
        } else if (sub == "validate") {
            std::string stage = pipeline.manifest().done("mend") ? "validate_post" : "validate";
            bool ran = pipeline.run_stage(stage, force);
            notice(stage, ran);
            nlohmann::json report = read_json_file(pipeline.artifact_path(
                stage == "validate" ? artifact::kValidatePre : artifact::kValidatePost));
            std::cout << ConsistencyReport::from_json(report).to_table();
        } else if (sub == "stats") {
            bool ran = pipeline.run_stage("stats", force);
            notice("stats", ran);
            std::cout << stats_table(pipeline.stats_json());
        } else {
            bool ran = pipeline.run_stage(sub, force);
            notice(sub, ran);
        }
        return 0;
    } catch (const backend_error& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
