#include "wf/simulator.hpp"

#include "wf/errors.hpp"

#include <algorithm>

namespace wf {

DeliveryPolicy delivery_policy_from_string(std::string_view text)
{
    if (text == "fifo")
        return DeliveryPolicy::fifo;
    if (text == "random")
        return DeliveryPolicy::random;
    if (text == "scripted")
        return DeliveryPolicy::scripted;
    throw ModelError("unknown delivery policy '" + std::string(text) + "'");
}

Simulator::Simulator(Gmawfp model, std::map<std::string, DecisionProvider*> providers, SimulationOptions options)
    : model_(std::move(model)), providers_(std::move(providers)), options_(std::move(options))
{
}

void Simulator::post(std::vector<Message> outgoing, SimulationResult& result)
{
    for (auto& m : outgoing) {
        if (!result.agents.contains(m.recipient))
            throw RoutingError("unknown recipient '" + m.recipient + "'");
        auto it = std::find_if(channels_.begin(), channels_.end(),
                               [&](const Channel& c) { return c.from == m.sender && c.to == m.recipient; });
        if (it == channels_.end()) {
            channels_.push_back({m.sender, m.recipient, {}, 1});
            it = std::prev(channels_.end());
        }
        m.seq = it->next_seq++;
        it->queue.push_back(std::move(m));
        send_order_.push_back(static_cast<std::size_t>(it - channels_.begin()));
    }
}

void Simulator::check(const std::string& agent, const Trace& trace, SimulationResult& result)
{
    const AgentState& s = result.agents.at(agent);
    auto& report = result.monitors;
    for (const auto& e : trace)
        if (e.step == "execute" && !s.config->writable.contains(e.detail.at("sort").get<std::string>()))
            report.single_writer.push_back(agent + " executed " + e.detail.at("sort").get<std::string>() +
                                           " outside its write set");
    if (s.t_global) {
        if (!conforms(*s.t_global, model_.gmwf))
            report.conformance.push_back(agent + "'s global replica does not conform: " + term(s.t_global->root));
        for_each_node(*s.t_global, [&](const DeweyAddress& a, const Node& n) {
            if (n.state != NodeState::closed || !n.production)
                return;
            auto [it, fresh] = closed_by_address_.emplace(a.to_string(), *n.production);
            if (!fresh && it->second != *n.production)
                report.single_writer.push_back("node " + a.to_string() + " closed with " + it->second + " and " +
                                               *n.production);
        });
    }
    if (s.t_partial) {
        const LocalGmwf& local = s.local();
        if (!conforms(*s.t_partial, local.gmwf))
            report.conformance.push_back(agent + "'s partial replica does not conform: " + term(s.t_partial->root));
        const auto& read = s.config->accreditation.read;
        for_each_node(*s.t_partial, [&](const DeweyAddress& a, const Node& n) {
            if (!read.contains(n.sort) && !local.is_synthesized(n.sort))
                report.read_leaks.push_back(agent + " sees " + n.sort + " at " + a.to_string());
        });
    }
}

void Simulator::absorb(const std::string& agent, Reaction reaction, SimulationResult& result)
{
    result.agents.at(agent) = std::move(reaction.state);
    for (const auto& e : reaction.trace)
        result.trace.push_back(to_json(e));
    check(agent, reaction.trace, result);
    post(std::move(reaction.outgoing), result);
}

Simulator::Channel* Simulator::pick(std::mt19937_64& rng, std::size_t& scripted_index)
{
    auto fifo = [&]() -> Channel* {
        while (!send_order_.empty()) {
            std::size_t c = send_order_.front();
            send_order_.pop_front();
            if (!channels_[c].queue.empty())
                return &channels_[c];
        }
        return nullptr;
    };
    std::vector<Channel*> ready;
    for (auto& c : channels_)
        if (!c.queue.empty())
            ready.push_back(&c);
    if (ready.empty())
        return nullptr;
    switch (options_.policy) {
    case DeliveryPolicy::fifo:
        return fifo();
    case DeliveryPolicy::random: {
        std::uniform_int_distribution<std::size_t> dist(0, ready.size() - 1);
        return ready[dist(rng)];
    }
    case DeliveryPolicy::scripted:
        if (scripted_index < options_.schedule.size()) {
            const std::string& want = options_.schedule[scripted_index++];
            for (Channel* c : ready)
                if (c->from + ">" + c->to == want)
                    return c;
            throw InvariantError("schedule asks for channel " + want + " which has nothing to deliver");
        }
        return fifo();
    }
    return nullptr;
}

SimulationResult Simulator::run()
{
    SimulationResult result;
    for (const auto& acc : model_.accreditations)
        result.agents.emplace(acc.actor, configure(acc.actor, model_));
    channels_.clear();
    send_order_.clear();
    closed_by_address_.clear();

    auto provider_of = [&](const std::string& agent) -> DecisionProvider& {
        auto it = providers_.find(agent);
        if (it == providers_.end() || it->second == nullptr)
            throw InvariantError("no decision provider for " + agent);
        return *it->second;
    };

    std::mt19937_64 rng(options_.seed);
    std::size_t scripted_index = 0;
    try {
        const std::string& initiator = model_.initiator;
        absorb(initiator, begin_case(result.agents.at(initiator), options_.case_id, provider_of(initiator)), result);
        std::size_t steps = 0;
        while (Channel* c = pick(rng, scripted_index)) {
            if (++steps > options_.step_budget) {
                std::string dump;
                for (const auto& ch : channels_)
                    if (!ch.queue.empty())
                        dump += " " + ch.from + ">" + ch.to + ":" + std::to_string(ch.queue.size());
                result.failure = "step budget exhausted; pending" + dump;
                break;
            }
            Message m = std::move(c->queue.front());
            c->queue.pop_front();
            result.trace.push_back({{"deliver", to_json(m)}});
            result.delivered.push_back(m);
            const std::string to = m.recipient;
            absorb(to, handle_message(result.agents.at(to), std::move(m), provider_of(to)), result);
        }
    } catch (const Error& e) {
        result.failure = e.what();
    }

    result.quiescent = !result.failure &&
                       std::all_of(channels_.begin(), channels_.end(), [](const Channel& c) { return c.queue.empty(); });
    const AgentState& init = result.agents.at(model_.initiator);
    result.terminated = init.terminated;
    if (init.t_global)
        result.final_artifact = init.t_global;
    return result;
}

SimulationResult simulate(const Gmawfp& model, const DecisionScript& script, const SimulationOptions& options)
{
    std::map<std::string, std::unique_ptr<ScriptedProvider>> owned;
    std::map<std::string, DecisionProvider*> providers;
    for (const auto& acc : model.accreditations) {
        auto it = script.find(acc.actor);
        owned[acc.actor] = std::make_unique<ScriptedProvider>(it == script.end() ? std::vector<ScriptStep>{}
                                                                                  : it->second);
        providers[acc.actor] = owned[acc.actor].get();
    }
    return Simulator(model, std::move(providers), options).run();
}

}  // namespace wf
