#pragma once

#include "wf/engine.hpp"
#include "wf/errors.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// One agent's workspace, serving every case it takes part in. All methods
/// are serialized on an internal lock.
class AgentService {
public:
    using Sender = std::function<void(const Message&)>;
    using Listener = std::function<void(const nlohmann::json&)>;

    AgentService(AgentState configured, Sender send);

    const std::string& agent_id() const { return base_.agent_id(); }

    /// [{case_id, phase, pending_task_count}]
    nlohmann::json cases() const;
    /// Throws NotFoundError.
    nlohmann::json workspace(const std::string& case_id) const;
    /// Applies one decision; runs expand-prune and diffuse when nothing is left to decide.
    nlohmann::json execute(const std::string& case_id, const Decision& d);
    /// Starts a case on the initiator.
    nlohmann::json start(const std::string& case_id);
    /// Entry point for the transport.
    void deliver(Message m);

    std::size_t subscribe(Listener listener);
    void unsubscribe(std::size_t id);

    std::vector<nlohmann::json> trace(const std::string& case_id) const;
    std::optional<AgentState> state(const std::string& case_id) const;

private:
    nlohmann::json workspace_locked(const std::string& case_id) const;
    std::vector<Message> publish(const std::string& case_id, Reaction r);
    void dispatch(std::vector<Message> outgoing);

    AgentState base_;
    Sender send_;
    mutable std::mutex mutex_;
    std::map<std::string, AgentState> cases_;
    std::map<std::string, std::vector<nlohmann::json>> traces_;
    std::mutex listeners_mutex_;
    std::map<std::size_t, Listener> listeners_;
    std::size_t next_listener_ = 1;
};

std::string phase_of(const AgentState& s);

}  // namespace wf
