#include <atomic>
#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <thread>

#include "sdg/policy/remote_policy.hpp"

using namespace sdg;

namespace {

// Scoped override of one environment variable, restored on destruction.
struct EnvGuard {
    std::string key;
    std::optional<std::string> old;

    EnvGuard(std::string k, const char* value) : key(std::move(k)) {
        if (const char* v = std::getenv(key.c_str())) old = v;
        if (value)
            setenv(key.c_str(), value, 1);
        else
            unsetenv(key.c_str());
    }
    ~EnvGuard() {
        if (old)
            setenv(key.c_str(), old->c_str(), 1);
        else
            unsetenv(key.c_str());
    }
};

struct LoopbackServer {
    httplib::Server svr;
    int port = 0;
    std::thread worker;
    std::atomic<int> hits{0};

    LoopbackServer() = default;

    void start() {
        port = svr.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        worker = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }
    ~LoopbackServer() {
        svr.stop();
        if (worker.joinable()) worker.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

RemoteConfig config_for(const LoopbackServer& server, int attempts = 3) {
    RemoteConfig cfg;
    cfg.base_url = server.url();
    cfg.model = "test-model";
    cfg.max_attempts = attempts;
    cfg.backoff_ms = 0;
    cfg.timeout_s = 5;
    return cfg;
}

ChatPrompt sample_prompt() {
    return ChatPrompt{{{MessageSource::System, "You are terse."}, {MessageSource::User, "Say hi."}}};
}

std::string completion_body(const std::string& content, const std::string& finish = "stop") {
    return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}, {"finish_reason", finish}}}}}
        .dump();
}

}  // namespace

TEST_CASE("remote happy path round trips content and request shape") {
    EnvGuard key("SDG_API_KEY", "test-key-123");
    LoopbackServer server;
    json seen_body;
    std::string seen_auth;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        server.hits++;
        seen_auth = req.get_header_value("Authorization");
        seen_body = json::parse(req.body);
        res.set_content(completion_body("Hello there."), "application/json");
    });
    server.start();

    RemotePolicy policy(config_for(server));
    GenerationResult out = policy.generate(sample_prompt(), {0.7, 48, nullptr});

    REQUIRE(out.text == "Hello there.");
    REQUIRE_FALSE(out.truncated);
    REQUIRE(server.hits == 1);
    REQUIRE(seen_auth == "Bearer test-key-123");
    REQUIRE(seen_body["model"] == "test-model");
    REQUIRE(seen_body["temperature"] == Catch::Approx(0.7));
    REQUIRE(seen_body["max_tokens"] == 48);
    REQUIRE(seen_body["messages"].size() == 2);
    REQUIRE(seen_body["messages"][0]["role"] == "system");
    REQUIRE(seen_body["messages"][1]["content"] == "Say hi.");
}

TEST_CASE("missing credential fails before any network call") {
    EnvGuard key("SDG_API_KEY", nullptr);
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        server.hits++;
        res.set_content(completion_body("x"), "application/json");
    });
    server.start();

    RemotePolicy policy(config_for(server));
    REQUIRE_THROWS_AS(policy.generate(sample_prompt(), {}), AuthError);
    REQUIRE(server.hits == 0);
}

TEST_CASE("rate limiting exhausts the retry budget") {
    EnvGuard key("SDG_API_KEY", "k");
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        server.hits++;
        res.status = 429;
        res.set_content("slow down", "text/plain");
    });
    server.start();

    RemotePolicy policy(config_for(server, 3));
    REQUIRE_THROWS_AS(policy.generate(sample_prompt(), {}), RetryExhausted);
    REQUIRE(server.hits == 3);
}

TEST_CASE("server errors surface with status and attempt count") {
    EnvGuard key("SDG_API_KEY", "k");
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        server.hits++;
        res.status = 500;
    });
    server.start();

    RemotePolicy policy(config_for(server, 2));
    try {
        policy.generate(sample_prompt(), {});
        FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
        REQUIRE(e.status == 500);
        REQUIRE(e.attempts == 2);
    }
    REQUIRE(server.hits == 2);
}

TEST_CASE("client errors do not retry") {
    EnvGuard key("SDG_API_KEY", "k");
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        server.hits++;
        res.status = 404;
    });
    server.start();

    RemotePolicy policy(config_for(server, 5));
    try {
        policy.generate(sample_prompt(), {});
        FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
        REQUIRE(e.status == 404);
        REQUIRE(e.attempts == 1);
    }
    REQUIRE(server.hits == 1);
}

TEST_CASE("credential rejection maps to auth error") {
    EnvGuard key("SDG_API_KEY", "expired");
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        server.hits++;
        res.status = 401;
    });
    server.start();

    RemotePolicy policy(config_for(server));
    REQUIRE_THROWS_AS(policy.generate(sample_prompt(), {}), AuthError);
    REQUIRE(server.hits == 1);
}

TEST_CASE("malformed completion bodies raise remote errors") {
    EnvGuard key("SDG_API_KEY", "k");
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        server.hits++;
        res.set_content("{\"choices\": []}", "application/json");
    });
    server.start();

    RemotePolicy policy(config_for(server));
    REQUIRE_THROWS_AS(policy.generate(sample_prompt(), {}), RemoteError);
}

TEST_CASE("length finish reason marks truncation") {
    EnvGuard key("SDG_API_KEY", "k");
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion_body("cut off mid", "length"), "application/json");
    });
    server.start();

    RemotePolicy policy(config_for(server));
    GenerationResult out = policy.generate(sample_prompt(), {});
    REQUIRE(out.truncated);
    REQUIRE(out.text == "cut off mid");
}

TEST_CASE("remote policies are generation only") {
    RemoteConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    cfg.model = "m";
    RemotePolicy policy(cfg);
    REQUIRE_FALSE(policy.can_score());
    REQUIRE(policy.labeled_output());
    REQUIRE_THROWS_AS(policy.score(sample_prompt(), "t"), UnsupportedCapability);
}

TEST_CASE("audit trace records request and status") {
    EnvGuard key("SDG_API_KEY", "k");
    LoopbackServer server;
    server.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion_body("ok"), "application/json");
    });
    server.start();

    std::string path = "audit_trace_test.jsonl";
    std::remove(path.c_str());
    RemoteConfig cfg = config_for(server);
    cfg.audit_path = path;
    RemotePolicy policy(cfg);
    policy.generate(sample_prompt(), {});

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    json j = json::parse(line);
    REQUIRE(j["request"]["model"] == "test-model");
    REQUIRE(j["status"] == 200);
    std::remove(path.c_str());
}
