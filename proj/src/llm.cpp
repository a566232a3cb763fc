#include "evopat/llm.hpp"

#include "evopat/errors.hpp"
#include "evopat/http_client.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace evopat {

const char* role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "user";
}

Role role_from_name(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    if (name == "tool") return Role::tool;
    raise(ErrorCode::MalformedResponse, "unknown role: " + name);
}

ChatMessage ChatMessage::system_msg(std::string content) {
    return {Role::system, std::move(content), std::nullopt, std::nullopt};
}
ChatMessage ChatMessage::user_msg(std::string content) {
    return {Role::user, std::move(content), std::nullopt, std::nullopt};
}
ChatMessage ChatMessage::assistant_msg(std::string content) {
    return {Role::assistant, std::move(content), std::nullopt, std::nullopt};
}
ChatMessage ChatMessage::tool_msg(std::string content, std::string call_id) {
    ChatMessage msg{Role::tool, std::move(content), std::nullopt, std::nullopt};
    msg.tool_result_for = std::move(call_id);
    return msg;
}

std::vector<std::string> parse_string_list_arg(const std::string& value) {
    nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array()) {
        raise(ErrorCode::MalformedResponse, "expected a JSON string array, got: " + value);
    }
    std::vector<std::string> out;
    for (const auto& item : parsed) {
        if (!item.is_string()) {
            raise(ErrorCode::MalformedResponse, "list element is not a string: " + value);
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

long parse_integer_arg(const std::string& value) {
    nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_number_integer()) {
        raise(ErrorCode::MalformedResponse, "expected an integer, got: " + value);
    }
    return parsed.get<long>();
}

void validate_tool_call(const ToolCall& call, const std::vector<ToolSpec>& tools) {
    const auto spec_it = std::find_if(tools.begin(), tools.end(), [&call](const ToolSpec& s) {
        return s.name == call.tool_name;
    });
    if (spec_it == tools.end()) {
        raise(ErrorCode::MalformedResponse, "tool_call names unknown tool " + call.tool_name);
    }
    for (const ToolParam& param : spec_it->params) {
        const auto arg_it = call.arguments.find(param.name);
        if (arg_it == call.arguments.end()) {
            if (param.required) {
                raise(ErrorCode::MalformedResponse,
                      "missing required argument " + param.name + " for " + call.tool_name);
            }
            continue;
        }
        switch (param.type) {
            case ParamType::string:
                break;
            case ParamType::string_list:
                parse_string_list_arg(arg_it->second);
                break;
            case ParamType::integer:
                parse_integer_arg(arg_it->second);
                break;
        }
    }
    for (const auto& [name, value] : call.arguments) {
        const bool known = std::any_of(spec_it->params.begin(), spec_it->params.end(),
                                       [&name](const ToolParam& p) { return p.name == name; });
        if (!known) {
            raise(ErrorCode::MalformedResponse,
                  "unexpected argument " + name + " for " + call.tool_name);
        }
    }
}

namespace {

const char* param_type_name(ParamType type) {
    switch (type) {
        case ParamType::string: return "string";
        case ParamType::string_list: return "array";
        case ParamType::integer: return "integer";
    }
    return "string";
}

nlohmann::json tool_parameters_schema(const ToolSpec& spec) {
    nlohmann::json properties = nlohmann::json::object();
    nlohmann::json required = nlohmann::json::array();
    for (const ToolParam& param : spec.params) {
        nlohmann::json prop;
        prop["type"] = param_type_name(param.type);
        if (param.type == ParamType::string_list) {
            prop["items"] = {{"type", "string"}};
        }
        prop["description"] = param.description;
        properties[param.name] = prop;
        if (param.required) required.push_back(param.name);
    }
    return {{"type", "object"}, {"properties", properties}, {"required", required}};
}

// Scripted backend: replays recorded responses keyed on (role_tag, turn).
class ScriptedClient : public LlmClient {
public:
    explicit ScriptedClient(const std::string& script_path) {
        std::ifstream in(script_path);
        if (!in) raise(ErrorCode::IoError, "cannot open script file " + script_path);
        nlohmann::json script = nlohmann::json::parse(in, nullptr, false);
        if (script.is_discarded() || !script.is_array()) {
            raise(ErrorCode::MalformedResponse, "script file is not a JSON list: " + script_path);
        }
        for (const auto& record : script) {
            const std::string role = record.at("role").get<std::string>();
            const int turn = record.at("turn").get<int>();
            responses_[{role, turn}] = record.at("response");
        }
    }

    ChatMessage complete(const ChatRequest& request) override {
        const int turn = turn_counter_[request.role_tag]++;
        const auto it = responses_.find({request.role_tag, turn});
        if (it == responses_.end()) {
            raise(ErrorCode::MalformedResponse,
                  "script exhausted for role " + request.role_tag + " at turn " +
                      std::to_string(turn));
        }
        ChatMessage msg = parse_response(it->second);
        if (msg.tool_call) validate_tool_call(*msg.tool_call, request.tools);
        return msg;
    }

private:
    static ChatMessage parse_response(const nlohmann::json& response) {
        ChatMessage msg = ChatMessage::assistant_msg("");
        if (response.contains("tool_call")) {
            const auto& tc = response["tool_call"];
            ToolCall call;
            call.tool_name = tc.at("name").get<std::string>();
            call.call_id = tc.value("call_id", "call-" + call.tool_name);
            for (const auto& [key, value] : tc.at("arguments").items()) {
                call.arguments[key] = value.is_string() ? value.get<std::string>() : value.dump();
            }
            msg.tool_call = std::move(call);
        } else if (response.contains("content")) {
            msg.content = response["content"].get<std::string>();
        } else {
            raise(ErrorCode::MalformedResponse, "script record has neither content nor tool_call");
        }
        return msg;
    }

    std::map<std::pair<std::string, int>, nlohmann::json> responses_;
    std::map<std::string, int> turn_counter_;
};

class HttpLlmClient : public LlmClient {
public:
    explicit HttpLlmClient(ProviderConfig config) : config_(std::move(config)) {
        if (config_.endpoint.empty()) {
            raise(ErrorCode::ConfigError, "live provider requires an endpoint");
        }
        if (config_.auth_env.empty()) {
            raise(ErrorCode::ConfigError, "live provider requires an auth key reference");
        }
    }

    ChatMessage complete(const ChatRequest& request) override {
        const nlohmann::json body = serialize_chat_request(request, config_);
        const char* key = std::getenv(config_.auth_env.c_str());
        if (key == nullptr || *key == '\0') {
            raise(ErrorCode::Auth, "auth env var " + config_.auth_env + " is not set");
        }
        const http::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

        int delay_ms = config_.retry_base_ms;
        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                delay_ms = std::min(delay_ms * 2, 30000);
            }
            const http::Response response =
                http::post_json(config_.endpoint, body.dump(), headers, config_.timeout_seconds);
            if (response.transport_failed()) {
                last_error = response.error;
                continue;
            }
            if (response.status == 401 || response.status == 403) {
                raise(ErrorCode::Auth, "provider rejected credentials (status " +
                                           std::to_string(response.status) + ")");
            }
            if (response.status == 429) {
                const auto retry_after = response.headers.find("Retry-After");
                if (retry_after != response.headers.end()) {
                    const int seconds = std::atoi(retry_after->second.c_str());
                    delay_ms = std::max(delay_ms, seconds * 1000);
                }
                last_error = "rate limited";
                continue;
            }
            if (response.status >= 500) {
                last_error = "server status " + std::to_string(response.status);
                continue;
            }
            if (response.status != 200) {
                raise(ErrorCode::MalformedResponse,
                      "unexpected status " + std::to_string(response.status));
            }
            ChatMessage msg = parse_response(response.body);
            if (msg.tool_call) validate_tool_call(*msg.tool_call, request.tools);
            return msg;
        }
        if (last_error == "rate limited") {
            raise(ErrorCode::RateLimited, "still rate limited after " +
                                              std::to_string(config_.max_retries + 1) + " attempts");
        }
        raise(ErrorCode::Transport, "request failed after " +
                                        std::to_string(config_.max_retries + 1) +
                                        " attempts: " + last_error);
    }

private:
    static ChatMessage parse_response(const std::string& body) {
        nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("message")) {
            raise(ErrorCode::MalformedResponse, "response is not a {\"message\": ...} object");
        }
        const auto& message = parsed["message"];
        ChatMessage msg = ChatMessage::assistant_msg("");
        if (message.contains("tool_call") && !message["tool_call"].is_null()) {
            const auto& tc = message["tool_call"];
            if (!tc.contains("name") || !tc.contains("arguments") || !tc["arguments"].is_object()) {
                raise(ErrorCode::MalformedResponse, "tool_call missing name or arguments");
            }
            ToolCall call;
            call.tool_name = tc["name"].get<std::string>();
            call.call_id = tc.value("call_id", "call-" + call.tool_name);
            for (const auto& [key, value] : tc["arguments"].items()) {
                call.arguments[key] = value.is_string() ? value.get<std::string>() : value.dump();
            }
            msg.tool_call = std::move(call);
        } else if (message.contains("content") && message["content"].is_string()) {
            msg.content = message["content"].get<std::string>();
        } else {
            raise(ErrorCode::MalformedResponse, "message has neither content nor tool_call");
        }
        return msg;
    }

    ProviderConfig config_;
};

} // namespace

nlohmann::json serialize_chat_request(const ChatRequest& request, const ProviderConfig& config) {
    nlohmann::json messages = nlohmann::json::array();
    for (const ChatMessage& msg : request.messages) {
        messages.push_back({{"role", role_name(msg.role)}, {"content", msg.content}});
    }
    nlohmann::json tools = nlohmann::json::array();
    for (const ToolSpec& spec : request.tools) {
        tools.push_back({{"name", spec.name},
                         {"description", spec.description},
                         {"parameters", tool_parameters_schema(spec)}});
    }
    return {{"model", config.model},
            {"temperature", config.temperature},
            {"messages", messages},
            {"tools", tools}};
}

std::unique_ptr<LlmClient> make_llm_client(const ProviderConfig& config) {
    if (config.mode == "scripted") {
        if (config.script_path.empty()) {
            raise(ErrorCode::ConfigError, "scripted provider requires a script file path");
        }
        return std::make_unique<ScriptedClient>(config.script_path);
    }
    if (config.mode == "live") {
        return std::make_unique<HttpLlmClient>(config);
    }
    raise(ErrorCode::ConfigError, "unknown provider mode: " + config.mode);
}

} // namespace evopat
