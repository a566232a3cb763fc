#include "evopat/llm.hpp"

#include "evopat/errors.hpp"
#include "evopat/tokenize.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

using namespace evopat;

namespace {

const std::string kDataDir = EVOPAT_TEST_DATA_DIR;

std::vector<ToolSpec> sample_tools() {
    ToolSpec papers;
    papers.name = "search_papers";
    papers.description = "Search scholarly literature with at most 3 English keywords; returns "
                         "titles and urls.";
    papers.params = {{"keywords", ParamType::string_list, "At most 3 English keywords", true},
                     {"limit", ParamType::integer, "Maximum number of results", false}};
    return {papers};
}

ChatRequest sample_request() {
    ChatRequest request;
    request.messages.push_back(ChatMessage::system_msg("You are a test system."));
    request.messages.push_back(ChatMessage::user_msg("Analyze this."));
    request.tools = sample_tools();
    return request;
}

struct ServerFixture {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit ServerFixture(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~ServerFixture() {
        server.stop();
        thread.join();
    }

    ProviderConfig config() const {
        ProviderConfig cfg;
        cfg.mode = "live";
        cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
        cfg.model = "gpt-4o";
        cfg.auth_env = "EVOPAT_TEST_KEY";
        cfg.max_retries = 2;
        cfg.retry_base_ms = 1;
        return cfg;
    }
};

} // namespace

TEST_CASE("scripted backend replays recorded tool calls verbatim") {
    ProviderConfig cfg;
    cfg.mode = "scripted";
    cfg.script_path = kDataDir + "/script_full_run.json";
    const auto client = make_llm_client(cfg);

    ChatRequest request = sample_request();
    request.role_tag = "academic_direction";
    const ChatMessage reply = client->complete(request);
    REQUIRE(reply.tool_call.has_value());
    CHECK(reply.tool_call->tool_name == "search_papers");
    CHECK(reply.tool_call->call_id == "call-papers-1");
    CHECK(parse_string_list_arg(reply.tool_call->arguments.at("keywords")) ==
          std::vector<std::string>{"nanoimprint", "lithography", "resist"});

    const ChatMessage text = client->complete(request);
    CHECK_FALSE(text.tool_call.has_value());
    CHECK(text.content.find("Current research directions") != std::string::npos);
}

TEST_CASE("exhausted script is a MalformedResponse") {
    ProviderConfig cfg;
    cfg.mode = "scripted";
    cfg.script_path = kDataDir + "/script_full_run.json";
    const auto client = make_llm_client(cfg);
    ChatRequest request = sample_request();
    request.role_tag = "technical_detail";
    client->complete(request); // consumes the only record
    try {
        client->complete(request);
        FAIL("expected MalformedResponse");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedResponse);
    }
}

TEST_CASE("two scripted runs produce identical sequences") {
    ProviderConfig cfg;
    cfg.mode = "scripted";
    cfg.script_path = kDataDir + "/script_full_run.json";
    ChatRequest request = sample_request();
    request.role_tag = "implementation_method";

    const auto a = make_llm_client(cfg)->complete(request);
    const auto b = make_llm_client(cfg)->complete(request);
    CHECK(a.content == b.content);
}

TEST_CASE("tool call validation catches unknown tools and bad types") {
    const auto tools = sample_tools();

    ToolCall unknown{"no_such_tool", {}, "c1"};
    CHECK_THROWS_AS(validate_tool_call(unknown, tools), Error);

    ToolCall missing_required{"search_papers", {}, "c2"};
    CHECK_THROWS_AS(validate_tool_call(missing_required, tools), Error);

    ToolCall bad_list{"search_papers", {{"keywords", "not json"}}, "c3"};
    CHECK_THROWS_AS(validate_tool_call(bad_list, tools), Error);

    ToolCall bad_int{"search_papers", {{"keywords", "[\"a\"]"}, {"limit", "\"five\""}}, "c4"};
    CHECK_THROWS_AS(validate_tool_call(bad_int, tools), Error);

    ToolCall extra{"search_papers", {{"keywords", "[\"a\"]"}, {"bogus", "1"}}, "c5"};
    CHECK_THROWS_AS(validate_tool_call(extra, tools), Error);

    ToolCall good{"search_papers", {{"keywords", "[\"a\",\"b\"]"}, {"limit", "3"}}, "c6"};
    CHECK_NOTHROW(validate_tool_call(good, tools));
}

TEST_CASE("request serialization matches the golden wire body") {
    ProviderConfig cfg;
    cfg.mode = "live";
    cfg.endpoint = "http://example.invalid/v1/chat";
    cfg.model = "gpt-4o";
    cfg.auth_env = "KEY";
    cfg.temperature = 0.0;

    const nlohmann::json body = serialize_chat_request(sample_request(), cfg);

    std::ifstream golden_file(kDataDir + "/golden_chat_request.json");
    REQUIRE(golden_file.good());
    const std::string golden_bytes((std::istreambuf_iterator<char>(golden_file)), {});
    CHECK(body == nlohmann::json::parse(golden_bytes));
    CHECK(body.dump(2) + "\n" == golden_bytes);
}

TEST_CASE("count_tokens is the shared tokenizer") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("a b c") == 3);
    const std::string text = "Mixed CASE, with 3 numbers and www.links.example!";
    CHECK(count_tokens(text) == tokenize(text).size());
}

TEST_CASE("live client parses text and tool-call responses") {
    setenv("EVOPAT_TEST_KEY", "secret-token", 1);
    std::atomic<int> hits{0};
    ServerFixture server([&hits](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        CHECK(req.get_header_value("Authorization") == "Bearer secret-token");
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body["model"] == "gpt-4o");
        if (hits == 1) {
            res.set_content(R"({"message": {"content": "final text"}})", "application/json");
        } else {
            res.set_content(
                R"({"message": {"tool_call": {"name": "search_papers",
                    "arguments": {"keywords": "[\"a\"]"}, "call_id": "srv-1"}}})",
                "application/json");
        }
    });

    const auto client = make_llm_client(server.config());
    const ChatMessage text = client->complete(sample_request());
    CHECK(text.content == "final text");

    const ChatMessage call = client->complete(sample_request());
    REQUIRE(call.tool_call.has_value());
    CHECK(call.tool_call->tool_name == "search_papers");
    CHECK(call.tool_call->call_id == "srv-1");
}

TEST_CASE("live client retries transient failures with a bounded attempt count") {
    setenv("EVOPAT_TEST_KEY", "secret-token", 1);
    std::atomic<int> hits{0};
    ServerFixture server([&hits](const httplib::Request&, httplib::Response& res) {
        const int n = ++hits;
        if (n < 3) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"message": {"content": "recovered"}})", "application/json");
    });

    const auto client = make_llm_client(server.config());
    CHECK(client->complete(sample_request()).content == "recovered");
    CHECK(hits == 3); // max_retries 2 -> at most 3 attempts
}

TEST_CASE("live client surfaces auth failures without retry") {
    setenv("EVOPAT_TEST_KEY", "secret-token", 1);
    std::atomic<int> hits{0};
    ServerFixture server([&hits](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
    });
    const auto client = make_llm_client(server.config());
    try {
        client->complete(sample_request());
        FAIL("expected Auth");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Auth);
    }
    CHECK(hits == 1);
}

TEST_CASE("rate limiting honors Retry-After and eventually errors") {
    setenv("EVOPAT_TEST_KEY", "secret-token", 1);
    std::atomic<int> hits{0};
    ServerFixture server([&hits](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 429;
        res.set_header("Retry-After", "0");
    });
    const auto client = make_llm_client(server.config());
    try {
        client->complete(sample_request());
        FAIL("expected RateLimited");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RateLimited);
    }
    CHECK(hits == 3);
}

TEST_CASE("missing auth env var is an Auth error in live mode") {
    unsetenv("EVOPAT_NO_SUCH_KEY");
    ProviderConfig cfg;
    cfg.mode = "live";
    cfg.endpoint = "http://127.0.0.1:1/v1/chat";
    cfg.auth_env = "EVOPAT_NO_SUCH_KEY";
    const auto client = make_llm_client(cfg);
    try {
        client->complete(sample_request());
        FAIL("expected Auth");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Auth);
    }
}
