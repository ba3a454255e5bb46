#include "wf/service.hpp"

#include "wf/errors.hpp"

namespace wf {

std::string phase_of(const AgentState& s)
{
    if (s.terminated)
        return "terminated";
    if (!offered_buds(s).empty())
        return "awaiting_decision";
    if (s.t_global)
        return "waiting";
    return "idle";
}

AgentService::AgentService(AgentState configured, Sender send)
    : base_(std::move(configured)), send_(std::move(send))
{
}

nlohmann::json AgentService::cases() const
{
    std::lock_guard lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, s] : cases_)
        out.push_back({{"case_id", id}, {"phase", phase_of(s)}, {"pending_task_count", offered_buds(s).size()}});
    return out;
}

nlohmann::json AgentService::workspace_locked(const std::string& case_id) const
{
    auto it = cases_.find(case_id);
    if (it == cases_.end())
        throw NotFoundError("agent " + agent_id() + " has no case '" + case_id + "'");
    const AgentState& s = it->second;
    nlohmann::json buds_json = nlohmann::json::array();
    nlohmann::json by_sort = nlohmann::json::object();
    for (const auto& o : offered_buds(s)) {
        buds_json.push_back({{"address", o.address.to_string()}, {"sort", o.sort}, {"description", o.description}});
        auto& list = by_sort[o.sort] = nlohmann::json::array();
        for (const auto& p : o.productions)
            list.push_back({{"id", p.id}, {"text", describe(p)}, {"rhs", p.rhs}, {"mode", to_string(p.mode)}});
    }
    return {{"agent", agent_id()},
            {"case_id", case_id},
            {"phase", phase_of(s)},
            {"partial_replica", s.t_partial ? to_json(*s.t_partial) : nlohmann::json(nullptr)},
            {"unlocked_writable_buds", buds_json},
            {"productions_by_sort", by_sort}};
}

nlohmann::json AgentService::workspace(const std::string& case_id) const
{
    std::lock_guard lock(mutex_);
    return workspace_locked(case_id);
}

std::vector<Message> AgentService::publish(const std::string& case_id, Reaction r)
{
    cases_[case_id] = std::move(r.state);
    std::vector<nlohmann::json> events;
    for (const auto& e : r.trace)
        events.push_back(to_json(e));
    auto& log = traces_[case_id];
    log.insert(log.end(), events.begin(), events.end());
    std::lock_guard lock(listeners_mutex_);
    for (const auto& e : events)
        for (const auto& [id, listener] : listeners_)
            listener(e);
    return std::move(r.outgoing);
}

void AgentService::dispatch(std::vector<Message> outgoing)
{
    for (const auto& m : outgoing)
        send_(m);
}

nlohmann::json AgentService::execute(const std::string& case_id, const Decision& d)
{
    std::vector<Message> outgoing;
    nlohmann::json out;
    {
        std::lock_guard lock(mutex_);
        auto it = cases_.find(case_id);
        if (it == cases_.end())
            throw NotFoundError("agent " + agent_id() + " has no case '" + case_id + "'");
        Trace trace;
        AgentState s = apply_decision(it->second, d, trace);
        outgoing = publish(case_id, settle(std::move(s), std::move(trace)));
        out = workspace_locked(case_id);
    }
    dispatch(std::move(outgoing));
    return out;
}

nlohmann::json AgentService::start(const std::string& case_id)
{
    std::vector<Message> outgoing;
    nlohmann::json out;
    {
        std::lock_guard lock(mutex_);
        auto it = cases_.find(case_id);
        AgentState from = it == cases_.end() ? base_ : it->second;
        Trace trace;
        AgentState s = open_case(std::move(from), case_id, trace);
        outgoing = publish(case_id, settle(std::move(s), std::move(trace)));
        out = workspace_locked(case_id);
    }
    dispatch(std::move(outgoing));
    return out;
}

void AgentService::deliver(Message m)
{
    std::vector<Message> outgoing;
    {
        std::lock_guard lock(mutex_);
        std::string case_id = m.case_id;
        auto it = cases_.find(case_id);
        AgentState from = it == cases_.end() ? base_ : it->second;
        Trace trace;
        AgentState s = receive(std::move(from), std::move(m), trace);
        outgoing = publish(case_id, settle(std::move(s), std::move(trace)));
    }
    dispatch(std::move(outgoing));
}

std::size_t AgentService::subscribe(Listener listener)
{
    std::lock_guard lock(listeners_mutex_);
    std::size_t id = next_listener_++;
    listeners_[id] = std::move(listener);
    return id;
}

void AgentService::unsubscribe(std::size_t id)
{
    std::lock_guard lock(listeners_mutex_);
    listeners_.erase(id);
}

std::vector<nlohmann::json> AgentService::trace(const std::string& case_id) const
{
    std::lock_guard lock(mutex_);
    auto it = traces_.find(case_id);
    return it == traces_.end() ? std::vector<nlohmann::json>{} : it->second;
}

std::optional<AgentState> AgentService::state(const std::string& case_id) const
{
    std::lock_guard lock(mutex_);
    auto it = cases_.find(case_id);
    if (it == cases_.end())
        return std::nullopt;
    return it->second;
}

}  // namespace wf
