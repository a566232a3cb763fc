#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evopat {

enum class Role { system, user, assistant, tool };

const char* role_name(Role role);
Role role_from_name(const std::string& name);

struct ToolCall {
    std::string tool_name;
    // values are JSON-encoded for list/integer params, raw text for strings
    std::map<std::string, std::string> arguments;
    std::string call_id;
};

struct ChatMessage {
    Role role = Role::user;
    std::string content;
    std::optional<ToolCall> tool_call;      // only when role == assistant
    std::optional<std::string> tool_result_for; // only when role == tool

    static ChatMessage system_msg(std::string content);
    static ChatMessage user_msg(std::string content);
    static ChatMessage assistant_msg(std::string content);
    static ChatMessage tool_msg(std::string content, std::string call_id);
};

enum class ParamType { string, string_list, integer };

struct ToolParam {
    std::string name;
    ParamType type = ParamType::string;
    std::string description;
    bool required = true;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ToolParam> params;
};

struct ProviderConfig {
    std::string mode = "scripted"; // "live" | "scripted"
    std::string endpoint;
    std::string model;
    std::string auth_env;     // env var with the bearer token (live mode)
    std::string script_path;  // scripted mode
    int timeout_seconds = 60;
    int max_retries = 2;
    int retry_base_ms = 250;
    double temperature = 0.0;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::vector<ToolSpec> tools;
    // scripted backends key their replay on (role_tag, per-role turn index)
    std::string role_tag;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    // Returns an assistant message holding either final text or exactly one
    // validated tool call.
    virtual ChatMessage complete(const ChatRequest& request) = 0;
};

std::unique_ptr<LlmClient> make_llm_client(const ProviderConfig& config);

// The live wire body; exposed so the golden-file test can pin it.
nlohmann::json serialize_chat_request(const ChatRequest& request, const ProviderConfig& config);

// Throws MalformedResponse when the call names an unknown tool or its
// arguments do not satisfy the ToolSpec.
void validate_tool_call(const ToolCall& call, const std::vector<ToolSpec>& tools);

// Typed accessors over the JSON-encoded argument strings.
std::vector<std::string> parse_string_list_arg(const std::string& value);
long parse_integer_arg(const std::string& value);

} // namespace evopat
