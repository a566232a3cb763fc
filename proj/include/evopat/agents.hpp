#pragma once

#include "evopat/context.hpp"
#include "evopat/errors.hpp"
#include "evopat/ingest.hpp"
#include "evopat/llm.hpp"
#include "evopat/tools.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evopat {

// The five analysis roles, in pipeline order.
enum class AgentRole {
    innovation_points,
    implementation_method,
    technical_detail,
    horizontal_comparison,
    academic_direction,
};

inline constexpr std::array<AgentRole, 5> kPipelineOrder = {
    AgentRole::innovation_points,   AgentRole::implementation_method,
    AgentRole::technical_detail,    AgentRole::horizontal_comparison,
    AgentRole::academic_direction,
};

const char* agent_role_name(AgentRole role);
AgentRole agent_role_from_name(const std::string& name);
const char* section_title(AgentRole role);

struct AgentProfile {
    AgentRole role = AgentRole::innovation_points;
    std::string system_message;
    std::string user_message_template; // contains the {patent_content} placeholder
    std::vector<std::string> allowed_tools;
    std::size_t max_tool_calls = 0;
    std::size_t max_turns = 4;
};

// Prompts come from the shipped catalog (prompts/<role>.txt, embedded at
// build time).
AgentProfile build_profile(AgentRole role);

// Raw catalog text for one role, exactly as shipped (used by the prompt-drift
// checksum test).
std::string_view prompt_catalog_text(AgentRole role);

struct ToolCitation {
    std::string tool_name;
    std::string arguments_json;
    std::string result_digest; // fnv1a64 of the result JSON, hex
    std::vector<std::pair<std::string, std::string>> references; // (title, url)
};

struct SectionOutput {
    AgentRole role = AgentRole::innovation_points;
    std::string markdown;
    std::vector<ToolCitation> tool_citations;
    std::size_t completion_seq = 0;
};

struct TeamState {
    std::string patent_id;
    std::vector<ChatMessage> transcript; // append-only shared history
    std::map<AgentRole, SectionOutput> sections;
    std::vector<AgentRole> completed_order;
    std::optional<PatentRecord> metadata; // captured from the lookup tool

    nlohmann::json to_json() const;
    static TeamState from_json(const nlohmann::json& j);
};

// How agent inputs are kept inside token budgets; strategy is "compress"
// (default) or "transform".
struct ContextPolicy {
    std::string strategy = "compress";
    TokenBudget budget;
    CompressionConfig compression = CompressionConfig::defaults();
    CorpusStats stats;
    StopwordList stopwords = StopwordList::default_list();

    std::string apply_to_patent(std::string_view patent_text) const;
};

struct AgentDeps {
    LlmClient& llm;
    const ToolRegistry& registry;
    ContextPolicy context;
};

class PipelineError : public Error {
public:
    PipelineError(AgentRole role, TeamState partial, const Error& cause)
        : Error(cause.code(), std::string(agent_role_name(role)) + " failed: " + cause.what()),
          role_(role),
          partial_(std::move(partial)) {}

    AgentRole failing_role() const { return role_; }
    const TeamState& partial_state() const { return partial_; }

private:
    AgentRole role_;
    TeamState partial_;
};

// Runs one role's conversation loop over the shared transcript; appends the
// exchange (tool calls, results, corrective refusals, final text) to
// state.transcript and returns the section.
SectionOutput run_agent(const AgentProfile& profile, const std::string& patent_text,
                        TeamState& state, AgentDeps& deps);

// All five roles in pipeline order over one shared TeamState. The patent must
// be filtered with the llm profile; the context strategy is applied here.
TeamState run_pipeline(const CleanDocument& patent, AgentDeps& deps);

} // namespace evopat
