#include "wf/decisions.hpp"

#include "wf/errors.hpp"

#include <fstream>

namespace wf {

DecisionScript script_from_json(const nlohmann::json& doc)
{
    DecisionScript out;
    try {
        for (const auto& [agent, steps] : doc.items()) {
            auto& list = out[agent];
            for (const auto& s : steps) {
                ScriptStep step;
                step.sort = s.value("sort", "");
                if (s.contains("address"))
                    step.address = DeweyAddress::parse(s.at("address").get<std::string>());
                if (s.contains("production") && !s.at("production").is_null())
                    step.production = s.at("production").get<std::string>();
                step.status = s.value("status", "");
                if (step.sort.empty() && !step.address)
                    throw ModelError("script step for " + agent + " names neither a sort nor an address");
                list.push_back(std::move(step));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed decision script: ") + e.what());
    }
    return out;
}

DecisionScript load_script(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ModelError("cannot open " + path);
    try {
        return script_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(path + ": " + e.what());
    }
}

nlohmann::json to_json(const DecisionScript& script)
{
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [agent, steps] : script) {
        auto& list = out[agent] = nlohmann::json::array();
        for (const auto& s : steps) {
            nlohmann::json j = {{"sort", s.sort}, {"status", s.status}};
            if (s.address)
                j["address"] = s.address->to_string();
            if (s.production)
                j["production"] = *s.production;
            list.push_back(std::move(j));
        }
    }
    return out;
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptStep> steps) : steps_(std::move(steps)) {}

std::optional<Decision> ScriptedProvider::decide(const AgentState& state, const std::vector<Offer>& offers)
{
    if (next_ >= steps_.size())
        throw DecisionError(DecisionError::Kind::script_exhausted,
                            "script for " + state.agent_id() + " has no step for the " +
                                std::to_string(offers.size()) + " pending bud(s)");
    const ScriptStep& step = steps_[next_];
    const Offer* offer = nullptr;
    for (const auto& o : offers) {
        bool match = step.address ? o.address == *step.address : o.sort == step.sort;
        if (!match)
            continue;
        if (offer != nullptr)
            throw DecisionError(DecisionError::Kind::script_mismatch,
                                "several " + step.sort + " buds offered; give an address");
        offer = &o;
    }
    if (offer == nullptr) {
        std::string seen;
        for (const auto& o : offers)
            seen += " " + o.sort + "@" + o.address.to_string();
        throw DecisionError(DecisionError::Kind::script_mismatch, "script for " + state.agent_id() + " expects " +
                                                                      step.sort + ", offered:" + seen);
    }
    Decision d;
    d.address = offer->address;
    d.status = step.status;
    if (step.production) {
        d.production = *step.production;
    } else if (offer->productions.size() == 1) {
        d.production = offer->productions.front().id;
    } else {
        throw DecisionError(DecisionError::Kind::script_mismatch,
                            "script step for " + offer->sort + " must name one of its productions");
    }
    ++next_;
    return d;
}

void ScriptedProvider::rejected(const Decision&, const std::string& reason)
{
    throw DecisionError(DecisionError::Kind::script_mismatch, "scripted decision rejected: " + reason);
}

std::optional<Decision> RandomProvider::decide(const AgentState&, const std::vector<Offer>& offers)
{
    std::uniform_int_distribution<std::size_t> pick_offer(0, offers.size() - 1);
    const Offer& o = offers[pick_offer(rng_)];
    if (o.productions.empty())
        return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick_production(0, o.productions.size() - 1);
    return Decision{o.address, o.productions[pick_production(rng_)].id, "auto"};
}

}  // namespace wf
