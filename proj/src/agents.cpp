#include "evopat/agents.hpp"

#include "evopat/embed.hpp"
#include "evopat/tokenize.hpp"

#include "prompt_catalog.hpp"

#include <algorithm>
#include <sstream>

namespace evopat {

const char* agent_role_name(AgentRole role) {
    switch (role) {
        case AgentRole::innovation_points: return "innovation_points";
        case AgentRole::implementation_method: return "implementation_method";
        case AgentRole::technical_detail: return "technical_detail";
        case AgentRole::horizontal_comparison: return "horizontal_comparison";
        case AgentRole::academic_direction: return "academic_direction";
    }
    return "innovation_points";
}

AgentRole agent_role_from_name(const std::string& name) {
    for (const AgentRole role : kPipelineOrder) {
        if (name == agent_role_name(role)) return role;
    }
    throw std::invalid_argument("unknown agent role: " + name);
}

const char* section_title(AgentRole role) {
    switch (role) {
        case AgentRole::innovation_points: return "Abstract and Innovations";
        case AgentRole::implementation_method: return "Implementation Methods";
        case AgentRole::technical_detail: return "Technical Details";
        case AgentRole::horizontal_comparison: return "Comparative Analysis";
        case AgentRole::academic_direction: return "Academic Direction";
    }
    return "";
}

std::string_view prompt_catalog_text(AgentRole role) {
    switch (role) {
        case AgentRole::innovation_points: return prompts::k_innovation_points;
        case AgentRole::implementation_method: return prompts::k_implementation_method;
        case AgentRole::technical_detail: return prompts::k_technical_detail;
        case AgentRole::horizontal_comparison: return prompts::k_horizontal_comparison;
        case AgentRole::academic_direction: return prompts::k_academic_direction;
    }
    return {};
}

namespace {

std::string strip_blank_edges(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && (text[begin] == '\n' || text[begin] == '\r')) ++begin;
    while (end > begin && (text[end - 1] == '\n' || text[end - 1] == '\r' ||
                           text[end - 1] == ' ')) {
        --end;
    }
    return std::string(text.substr(begin, end - begin));
}

// Catalog format: a "[system]" block followed by a "[user]" block.
std::pair<std::string, std::string> parse_catalog(std::string_view text, AgentRole role) {
    const std::size_t sys = text.find("[system]\n");
    const std::size_t usr = text.find("\n[user]\n");
    if (sys == std::string_view::npos || usr == std::string_view::npos || usr < sys) {
        throw std::runtime_error(std::string("malformed prompt catalog for ") +
                                 agent_role_name(role));
    }
    const std::size_t sys_begin = sys + 9;
    return {strip_blank_edges(text.substr(sys_begin, usr - sys_begin)),
            strip_blank_edges(text.substr(usr + 8))};
}

std::string substitute_patent(std::string_view tmpl, std::string_view patent_text) {
    static constexpr std::string_view kPlaceholder = "{patent_content}";
    std::string out(tmpl);
    const std::size_t pos = out.find(kPlaceholder);
    if (pos != std::string::npos) {
        out.replace(pos, kPlaceholder.size(), patent_text);
    }
    return out;
}

std::string digest_hex(std::string_view data) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

// (title, url) pairs from a tool result, by tool shape: patent records cite
// their pdf_url, paper records their url.
std::vector<std::pair<std::string, std::string>> extract_references(const std::string& tool_name,
                                                                    const nlohmann::json& result) {
    std::vector<std::pair<std::string, std::string>> refs;
    const auto add_record = [&refs, &tool_name](const nlohmann::json& rec) {
        if (!rec.is_object()) return;
        const std::string title = rec.value("title", "");
        const std::string url =
            tool_name == "search_papers" ? rec.value("url", "") : rec.value("pdf_url", "");
        if (!title.empty() && !url.empty()) refs.emplace_back(title, url);
    };
    if (result.is_array()) {
        for (const auto& rec : result) add_record(rec);
    } else {
        add_record(result);
    }
    return refs;
}

nlohmann::json arguments_to_json(const std::map<std::string, std::string>& arguments) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : arguments) j[key] = value;
    return j;
}

nlohmann::json tool_call_to_json(const ToolCall& call) {
    return {{"name", call.tool_name},
            {"arguments", arguments_to_json(call.arguments)},
            {"call_id", call.call_id}};
}

ToolCall tool_call_from_json(const nlohmann::json& j) {
    ToolCall call;
    call.tool_name = j.at("name").get<std::string>();
    call.call_id = j.value("call_id", "");
    for (const auto& [key, value] : j.at("arguments").items()) {
        call.arguments[key] = value.get<std::string>();
    }
    return call;
}

} // namespace

AgentProfile build_profile(AgentRole role) {
    AgentProfile profile;
    profile.role = role;
    const auto [system_message, user_template] = parse_catalog(prompt_catalog_text(role), role);
    profile.system_message = system_message;
    profile.user_message_template = user_template;
    switch (role) {
        case AgentRole::innovation_points:
            profile.allowed_tools = {"lookup_patent_metadata"};
            profile.max_tool_calls = 1;
            break;
        case AgentRole::horizontal_comparison:
            profile.allowed_tools = {"search_patents"};
            profile.max_tool_calls = 1;
            break;
        case AgentRole::academic_direction:
            profile.allowed_tools = {"search_papers"};
            profile.max_tool_calls = 1;
            break;
        case AgentRole::implementation_method:
        case AgentRole::technical_detail:
            profile.max_tool_calls = 0;
            break;
    }
    return profile;
}

std::string ContextPolicy::apply_to_patent(std::string_view patent_text) const {
    if (strategy == "compress") {
        return compress_prompt(patent_text, compression, stats, stopwords);
    }
    return std::string(patent_text);
}

SectionOutput run_agent(const AgentProfile& profile, const std::string& patent_text,
                        TeamState& state, AgentDeps& deps) {
    const bool transform = deps.context.strategy == "transform";

    // shared transcript, limited to the configured history budget
    std::vector<HistoryMessage> history;
    history.reserve(state.transcript.size());
    for (const ChatMessage& msg : state.transcript) {
        history.push_back({msg.content, false});
    }
    const std::vector<HistoryMessage> limited = limit_history(history, deps.context.budget);

    std::string user_content = substitute_patent(profile.user_message_template, patent_text);
    if (transform) {
        user_content = truncate_tokens(user_content, deps.context.budget.max_tokens_per_message);
    }

    ChatRequest request;
    request.role_tag = agent_role_name(profile.role);
    request.tools = deps.registry.specs();
    request.messages.push_back(ChatMessage::system_msg(profile.system_message));
    for (const HistoryMessage& msg : limited) {
        std::string content = msg.content;
        if (transform) {
            content = truncate_tokens(content, deps.context.budget.max_tokens_per_message);
        }
        request.messages.push_back(ChatMessage::assistant_msg(std::move(content)));
    }
    request.messages.push_back(ChatMessage::user_msg(user_content));

    std::vector<ChatMessage> exchange; // this role's contribution to the transcript
    std::vector<ToolCitation> citations;
    std::size_t dispatched = 0;

    const auto finish = [&state, &exchange](SectionOutput section) {
        state.transcript.insert(state.transcript.end(), exchange.begin(), exchange.end());
        return section;
    };

    for (std::size_t turn = 0; turn < profile.max_turns; ++turn) {
        ChatMessage reply = deps.llm.complete(request);
        request.messages.push_back(reply);
        exchange.push_back(reply);

        if (!reply.tool_call) {
            if (reply.content.empty()) {
                raise(ErrorCode::MalformedResponse, "assistant returned an empty answer");
            }
            SectionOutput section;
            section.role = profile.role;
            section.markdown = reply.content;
            section.tool_citations = std::move(citations);
            section.completion_seq = state.completed_order.size() + 1;
            return finish(std::move(section));
        }

        const ToolCall& call = *reply.tool_call;
        const bool allowed = std::find(profile.allowed_tools.begin(), profile.allowed_tools.end(),
                                       call.tool_name) != profile.allowed_tools.end();
        const bool within_budget = dispatched < profile.max_tool_calls;

        ChatMessage tool_reply = ChatMessage::tool_msg("", call.call_id);
        if (allowed && within_budget) {
            try {
                tool_reply = deps.registry.dispatch(call);
                ++dispatched;
                ToolCitation citation;
                citation.tool_name = call.tool_name;
                citation.arguments_json = arguments_to_json(call.arguments).dump();
                citation.result_digest = digest_hex(tool_reply.content);
                const nlohmann::json result =
                    nlohmann::json::parse(tool_reply.content, nullptr, false);
                if (!result.is_discarded()) {
                    citation.references = extract_references(call.tool_name, result);
                    if (call.tool_name == "lookup_patent_metadata" && result.is_object()) {
                        state.metadata = PatentRecord::from_json(result);
                    }
                }
                citations.push_back(std::move(citation));
            } catch (const Error& e) {
                // structured error the agent can react to; budget is spent
                ++dispatched;
                tool_reply.content = nlohmann::json({{"error", e.what()}}).dump();
            }
        } else {
            tool_reply.content =
                nlohmann::json({{"error", "tool unavailable; answer from context"}}).dump();
        }
        request.messages.push_back(tool_reply);
        exchange.push_back(tool_reply);
    }

    state.transcript.insert(state.transcript.end(), exchange.begin(), exchange.end());
    raise(ErrorCode::TurnLimitExceeded,
          std::string(agent_role_name(profile.role)) + " produced no text answer within " +
              std::to_string(profile.max_turns) + " turns");
}

TeamState run_pipeline(const CleanDocument& patent, AgentDeps& deps) {
    TeamState state;
    state.patent_id = patent.doc_id;
    const std::string effective_text = deps.context.apply_to_patent(patent.text);

    for (const AgentRole role : kPipelineOrder) {
        const AgentProfile profile = build_profile(role);
        SectionOutput section;
        try {
            section = run_agent(profile, effective_text, state, deps);
        } catch (const Error& e) {
            throw PipelineError(role, std::move(state), e);
        }
        state.sections[role] = std::move(section);
        state.completed_order.push_back(role);
    }
    return state;
}

nlohmann::json TeamState::to_json() const {
    nlohmann::json transcript_json = nlohmann::json::array();
    for (const ChatMessage& msg : transcript) {
        nlohmann::json m = {{"role", role_name(msg.role)}, {"content", msg.content}};
        if (msg.tool_call) m["tool_call"] = tool_call_to_json(*msg.tool_call);
        if (msg.tool_result_for) m["tool_result_for"] = *msg.tool_result_for;
        transcript_json.push_back(std::move(m));
    }

    nlohmann::json sections_json = nlohmann::json::array();
    for (const AgentRole role : kPipelineOrder) {
        const auto it = sections.find(role);
        if (it == sections.end()) continue;
        const SectionOutput& section = it->second;
        nlohmann::json citations = nlohmann::json::array();
        for (const ToolCitation& c : section.tool_citations) {
            nlohmann::json refs = nlohmann::json::array();
            for (const auto& [title, url] : c.references) {
                refs.push_back({{"title", title}, {"url", url}});
            }
            citations.push_back({{"tool_name", c.tool_name},
                                 {"arguments", c.arguments_json},
                                 {"result_digest", c.result_digest},
                                 {"references", refs}});
        }
        sections_json.push_back({{"role", agent_role_name(role)},
                                 {"markdown", section.markdown},
                                 {"tool_citations", citations},
                                 {"completion_seq", section.completion_seq}});
    }

    nlohmann::json order = nlohmann::json::array();
    for (const AgentRole role : completed_order) order.push_back(agent_role_name(role));

    nlohmann::json j = {{"patent_id", patent_id},
                        {"transcript", transcript_json},
                        {"sections", sections_json},
                        {"completed_order", order}};
    if (metadata) j["metadata"] = metadata->to_json();
    return j;
}

TeamState TeamState::from_json(const nlohmann::json& j) {
    TeamState state;
    state.patent_id = j.value("patent_id", "");
    for (const auto& m : j.at("transcript")) {
        ChatMessage msg;
        msg.role = role_from_name(m.at("role").get<std::string>());
        msg.content = m.at("content").get<std::string>();
        if (m.contains("tool_call")) msg.tool_call = tool_call_from_json(m["tool_call"]);
        if (m.contains("tool_result_for")) {
            msg.tool_result_for = m["tool_result_for"].get<std::string>();
        }
        state.transcript.push_back(std::move(msg));
    }
    for (const auto& s : j.at("sections")) {
        SectionOutput section;
        section.role = agent_role_from_name(s.at("role").get<std::string>());
        section.markdown = s.at("markdown").get<std::string>();
        section.completion_seq = s.value("completion_seq", 0u);
        for (const auto& c : s.value("tool_citations", nlohmann::json::array())) {
            ToolCitation citation;
            citation.tool_name = c.at("tool_name").get<std::string>();
            citation.arguments_json = c.value("arguments", "");
            citation.result_digest = c.value("result_digest", "");
            for (const auto& r : c.value("references", nlohmann::json::array())) {
                citation.references.emplace_back(r.at("title").get<std::string>(),
                                                 r.at("url").get<std::string>());
            }
            section.tool_citations.push_back(std::move(citation));
        }
        state.sections[section.role] = std::move(section);
    }
    for (const auto& r : j.value("completed_order", nlohmann::json::array())) {
        state.completed_order.push_back(agent_role_from_name(r.get<std::string>()));
    }
    if (j.contains("metadata")) state.metadata = PatentRecord::from_json(j["metadata"]);
    return state;
}

} // namespace evopat
