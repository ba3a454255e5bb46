#pragma once

#include "wf/engine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

/// One scripted answer. The bud is picked by sort, or by address when given.
struct ScriptStep {
    std::string sort;
    std::optional<DeweyAddress> address;
    std::optional<std::string> production;  ///< id or description; may be omitted when unique
    std::string status;
};

/// Ordered steps per agent.
using DecisionScript = std::map<std::string, std::vector<ScriptStep>>;

DecisionScript script_from_json(const nlohmann::json& doc);
DecisionScript load_script(const std::string& path);
nlohmann::json to_json(const DecisionScript& script);

class ScriptedProvider : public DecisionProvider {
public:
    explicit ScriptedProvider(std::vector<ScriptStep> steps);

    std::optional<Decision> decide(const AgentState& state, const std::vector<Offer>& offers) override;
    void rejected(const Decision& d, const std::string& reason) override;

    std::size_t remaining() const { return steps_.size() - next_; }

private:
    std::vector<ScriptStep> steps_;
    std::size_t next_ = 0;
};

/// Picks a random offered bud and production with a fixed seed.
class RandomProvider : public DecisionProvider {
public:
    explicit RandomProvider(std::uint64_t seed) : rng_(seed) {}

    std::optional<Decision> decide(const AgentState& state, const std::vector<Offer>& offers) override;

private:
    std::mt19937_64 rng_;
};

}  // namespace wf
