#pragma once

#include "wf/artifact.hpp"
#include "wf/grammar.hpp"
#include "wf/message.hpp"
#include "wf/projection.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

/// Immutable per-agent configuration shared by successive states.
struct AgentConfig {
    std::string agent_id;
    Gmawfp model;  ///< axiom-augmented
    Accreditation accreditation;
    LocalGmwf local;
    SortSet writable;  ///< write set plus local structuring sorts
};

/// Augments the axiom and validates. Throws ModelError listing the violations.
Gmawfp prepare_model(const Gmawfp& raw);

struct TraceEvent {
    std::string case_id;
    std::string agent;
    std::string step;  ///< merge, replicate, execute, expand_prune, diffuse
    nlohmann::json detail;
};

nlohmann::json to_json(const TraceEvent& e);

using Trace = std::vector<TraceEvent>;

struct AgentState {
    std::shared_ptr<const AgentConfig> config;
    std::string case_id;
    std::optional<Artifact> t_global;
    std::optional<Artifact> t_partial;
    std::deque<Message> req_queue;
    std::deque<Message> ans_queue;
    std::vector<std::string> return_list;
    std::set<DeweyAddress> requested;       ///< global buds already forwarded
    std::set<DeweyAddress> hidden_blocked;  ///< partial buds waiting on invisible tasks
    bool terminated = false;

    const std::string& agent_id() const { return config->agent_id; }
    const LocalGmwf& local() const { return config->local; }
};

/// `model` must already be prepared.
AgentState configure(std::string agent_id, const Gmawfp& model);

struct Offer {
    DeweyAddress address;  ///< in the partial replica
    std::string sort;
    std::string description;
    std::vector<Production> productions;
};

struct Decision {
    DeweyAddress address;
    std::string production;  ///< id or description
    std::string status;
};

class DecisionProvider {
public:
    virtual ~DecisionProvider() = default;
    /// Returns nothing to give up; the engine then reports the pending buds.
    virtual std::optional<Decision> decide(const AgentState& state, const std::vector<Offer>& offers) = 0;
    virtual void rejected(const Decision&, const std::string&) {}
};

AgentState start_case(AgentState state, std::string case_id, Trace& trace);

AgentState protocol_merge(AgentState state, Trace& trace);
AgentState protocol_replicate(AgentState state, Trace& trace);
AgentState protocol_execute(AgentState state, DecisionProvider& provider, Trace& trace);
AgentState protocol_expand_prune(AgentState state, Trace& trace);

struct Diffusion {
    AgentState state;
    std::vector<Message> outgoing;
};

Diffusion protocol_diffuse(AgentState state, Trace& trace);

struct Reaction {
    AgentState state;
    std::vector<Message> outgoing;
    Trace trace;
};

/// Queues the message by kind and runs the five steps.
Reaction handle_message(AgentState state, Message msg, DecisionProvider& provider);
/// Starts a case and runs the steps that follow it.
Reaction begin_case(AgentState state, std::string case_id, DecisionProvider& provider);

// Step-wise execution used by the service: one decision at a time.

/// Queues the message, merges, replicates and runs automatic extensions.
AgentState receive(AgentState state, Message msg, Trace& trace);
AgentState open_case(AgentState state, std::string case_id, Trace& trace);
AgentState auto_extend(AgentState state, Trace& trace);
/// Unlocked writable buds awaiting a decision.
std::vector<Offer> offered_buds(const AgentState& state);
/// Throws DecisionError.
AgentState apply_decision(AgentState state, const Decision& d, Trace& trace);
/// Expand-prune and diffuse once nothing is offered; otherwise nothing happens.
Reaction settle(AgentState state, Trace trace = {});

}  // namespace wf
