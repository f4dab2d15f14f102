#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "oakmend/llm.hpp"

namespace oakmend {

struct HttpEndpoint {
    std::string base;   // scheme://host:port
    std::string path;   // /v1/...
    std::string api_key;
    std::string model;
};

inline HttpEndpoint parse_endpoint(const std::string& url, const std::string& api_key,
                                   const std::string& model) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw data_error("endpoint URL '" + url + "' must include a scheme");
    auto path_start = url.find('/', scheme_end + 3);
    HttpEndpoint ep;
    ep.base = path_start == std::string::npos ? url : url.substr(0, path_start);
    ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    ep.api_key = api_key;
    ep.model = model;
    return ep;
}

inline std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

// Chat-completions convention: POST {"model", "messages":[{role,content}]},
// response read from the first choice plus usage token counts.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpEndpoint ep) : ep_(std::move(ep)) {}

    static HttpChatBackend from_env(const std::string& model = "default") {
        std::string url = env_or("OAKMEND_CHAT_URL", "");
        if (url.empty()) throw data_error("OAKMEND_CHAT_URL is not set");
        return HttpChatBackend(parse_endpoint(url, env_or("OAKMEND_API_KEY", ""), model));
    }

    std::string chat_raw(Stage, const std::string& prompt, uint64_t& prompt_tokens,
                         uint64_t& completion_tokens) override {
        nlohmann::json body = {
            {"model", ep_.model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
        nlohmann::json resp = post(body);
        try {
            prompt_tokens = resp.contains("usage")
                                ? resp.at("usage").value("prompt_tokens", 0ull)
                                : whitespace_tokens(prompt);
            completion_tokens =
                resp.contains("usage") ? resp.at("usage").value("completion_tokens", 0ull) : 0;
            std::string content =
                resp.at("choices").at(0).at("message").at("content").get<std::string>();
            if (!resp.contains("usage")) completion_tokens = whitespace_tokens(content);
            return content;
        } catch (const nlohmann::json::exception& e) {
            throw backend_error(std::string("malformed chat response: ") + e.what());
        }
    }

private:
    nlohmann::json post(const nlohmann::json& body) {
        httplib::Client client(ep_.base);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!ep_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + ep_.api_key);
        auto res = client.Post(ep_.path, headers, body.dump(), "application/json");
        if (!res) throw transport_error("chat endpoint unreachable: " + ep_.base);
        if (res->status >= 500) throw transport_error("chat endpoint returned " +
                                                      std::to_string(res->status));
        if (res->status != 200)
            throw backend_error("chat endpoint returned " + std::to_string(res->status));
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw backend_error(std::string("chat response is not JSON: ") + e.what());
        }
    }

    HttpEndpoint ep_;
};

// POST {"model", "input":[text]}; accepts either a bare array of float
// arrays or the common {"data":[{"embedding":[...]}]} envelope.
class HttpEmbedBackend : public EmbedBackend {
public:
    explicit HttpEmbedBackend(HttpEndpoint ep) : ep_(std::move(ep)) {}

    static HttpEmbedBackend from_env(const std::string& model = "default") {
        std::string url = env_or("OAKMEND_EMBED_URL", "");
        if (url.empty()) throw data_error("OAKMEND_EMBED_URL is not set");
        return HttpEmbedBackend(parse_endpoint(url, env_or("OAKMEND_API_KEY", ""), model));
    }

    Embedding embed_raw(const std::string& text) override {
        nlohmann::json body = {{"model", ep_.model}, {"input", nlohmann::json::array({text})}};
        httplib::Client client(ep_.base);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!ep_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + ep_.api_key);
        auto res = client.Post(ep_.path, headers, body.dump(), "application/json");
        if (!res) throw transport_error("embedding endpoint unreachable: " + ep_.base);
        if (res->status != 200)
            throw backend_error("embedding endpoint returned " + std::to_string(res->status));
        try {
            nlohmann::json j = nlohmann::json::parse(res->body);
            const nlohmann::json* vec = nullptr;
            if (j.is_array() && !j.empty())
                vec = &j.at(0);
            else if (j.is_object() && j.contains("data"))
                vec = &j.at("data").at(0).at("embedding");
            if (!vec) throw backend_error("embedding response has no vector");
            Embedding v = vec->get<Embedding>();
            l2_normalize(v);
            return v;
        } catch (const nlohmann::json::exception& e) {
            throw backend_error(std::string("malformed embedding response: ") + e.what());
        }
    }

private:
    HttpEndpoint ep_;
};

}  // namespace oakmend
