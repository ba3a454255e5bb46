#pragma once

#include "wf/decisions.hpp"
#include "wf/engine.hpp"
#include "wf/message.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

enum class DeliveryPolicy { fifo, random, scripted };

DeliveryPolicy delivery_policy_from_string(std::string_view text);

struct SimulationOptions {
    DeliveryPolicy policy = DeliveryPolicy::fifo;
    std::uint64_t seed = 0;
    std::vector<std::string> schedule;  ///< "S>R" channel picks for the scripted policy
    std::size_t step_budget = 10000;
    std::string case_id = "case-1";
};

struct MonitorReport {
    std::vector<std::string> single_writer;
    std::vector<std::string> read_leaks;
    std::vector<std::string> conformance;

    bool clean() const { return single_writer.empty() && read_leaks.empty() && conformance.empty(); }
};

struct SimulationResult {
    std::map<std::string, AgentState> agents;
    std::vector<Message> delivered;
    std::vector<nlohmann::json> trace;  ///< engine events and delivered envelopes, in order
    MonitorReport monitors;
    bool quiescent = false;
    bool terminated = false;  ///< the initiator reported termination
    std::optional<std::string> failure;
    std::optional<Artifact> final_artifact;  ///< initiator's global replica
};

/// Runs one case of `model` (already prepared) to quiescence.
class Simulator {
public:
    Simulator(Gmawfp model, std::map<std::string, DecisionProvider*> providers, SimulationOptions options = {});

    SimulationResult run();

private:
    struct Channel {
        std::string from;
        std::string to;
        std::deque<Message> queue;
        std::uint64_t next_seq = 1;
    };

    void post(std::vector<Message> outgoing, SimulationResult& result);
    void absorb(const std::string& agent, Reaction reaction, SimulationResult& result);
    Channel* pick(std::mt19937_64& rng, std::size_t& scripted_index);
    void check(const std::string& agent, const Trace& trace, SimulationResult& result);

    Gmawfp model_;
    std::map<std::string, DecisionProvider*> providers_;
    SimulationOptions options_;
    std::vector<Channel> channels_;
    std::deque<std::size_t> send_order_;
    std::map<std::string, std::string> closed_by_address_;
};

/// Builds scripted providers for every actor and runs the case.
SimulationResult simulate(const Gmawfp& model, const DecisionScript& script, const SimulationOptions& options = {});

}  // namespace wf
