#include "wf/engine.hpp"

#include "wf/errors.hpp"
#include "wf/merge.hpp"

#include <algorithm>
#include <utility>

namespace wf {

namespace {

constexpr int kMaxRejections = 16;

void emit(Trace& trace, const AgentState& s, std::string step, nlohmann::json detail)
{
    trace.push_back({s.case_id, s.agent_id(), std::move(step), std::move(detail)});
}

nlohmann::json address_list(const std::vector<BudRef>& refs)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : refs)
        out.push_back({{"address", r.address.to_string()}, {"sort", r.sort}});
    return out;
}

// Local precedence and writability, with buds blocked upstream kept locked.
void refresh_partial(AgentState& s)
{
    Artifact t = recompute_bud_states(*s.t_partial, s.config->writable);
    for (const auto& a : s.hidden_blocked) {
        Node* n = const_cast<Node*>(find_node(t, a));
        if (n != nullptr && n->is_bud())
            n->state = NodeState::locked_bud;
    }
    s.t_partial = std::move(t);
}

void enqueue(AgentState& s, Message msg)
{
    if (s.case_id.empty())
        s.case_id = msg.case_id;
    else if (s.case_id != msg.case_id)
        throw InvariantError("agent " + s.agent_id() + " serves case '" + s.case_id + "', got a message for '" +
                             msg.case_id + "'");
    if (msg.kind == MessageKind::request)
        s.req_queue.push_back(std::move(msg));
    else
        s.ans_queue.push_back(std::move(msg));
}

const Offer* find_offer(const std::vector<Offer>& offers, const DeweyAddress& a)
{
    for (const auto& o : offers)
        if (o.address == a)
            return &o;
    return nullptr;
}

}  // namespace

Gmawfp prepare_model(const Gmawfp& raw)
{
    auto report = [](const std::vector<Violation>& vs) {
        std::string what = "invalid model:";
        for (const auto& v : vs)
            what += " [" + v.rule + "] " + v.message + ";";
        return what;
    };
    auto vs = validate(raw);
    std::erase_if(vs, [](const Violation& v) { return v.rule == "axiom-visibility"; });
    if (!vs.empty())
        throw ModelError(report(vs));
    Gmawfp model = augment_axiom(raw);
    if (auto augmented = validate(model); !augmented.empty())
        throw ModelError(report(augmented));
    return model;
}

nlohmann::json to_json(const TraceEvent& e)
{
    return {{"case", e.case_id}, {"agent", e.agent}, {"step", e.step}, {"detail", e.detail}};
}

AgentState configure(std::string agent_id, const Gmawfp& model)
{
    if (auto vs = validate(model); !vs.empty())
        throw ModelError("invalid model: " + vs.front().message);
    if (model.gmwf.axioms.size() != 1)
        throw ModelError("model must have a single axiom; prepare it first");
    auto config = std::make_shared<AgentConfig>();
    config->agent_id = std::move(agent_id);
    config->model = model;
    config->accreditation = model.accreditation_of(config->agent_id);
    config->local = project_gmwf(model.gmwf, config->accreditation.read);
    config->writable = config->local.writable(config->accreditation.write);
    AgentState s;
    s.config = std::move(config);
    return s;
}

AgentState open_case(AgentState s, std::string case_id, Trace& trace)
{
    const auto& g = s.config->model.gmwf;
    const std::string& axiom = g.axioms.front();
    if (!s.config->accreditation.write.contains(axiom))
        throw AccreditationError("agent " + s.agent_id() + " does not write the axiom " + axiom);
    if (s.t_global && !s.terminated)
        throw Error("case '" + s.case_id + "' is still open");
    AgentState fresh;
    fresh.config = s.config;
    fresh.case_id = std::move(case_id);
    Artifact t = create_case(g);
    t.root.creator = fresh.agent_id();
    fresh.t_global = std::move(t);
    emit(trace, fresh, "merge", {{"started", true}});
    fresh = protocol_replicate(std::move(fresh), trace);
    return auto_extend(std::move(fresh), trace);
}

AgentState start_case(AgentState s, std::string case_id, Trace& trace)
{
    return open_case(std::move(s), std::move(case_id), trace);
}

AgentState protocol_merge(AgentState s, Trace& trace)
{
    nlohmann::json requests = nlohmann::json::array();
    nlohmann::json answers = nlohmann::json::array();
    auto absorb = [&](const Message& m) {
        s.t_global = s.t_global ? merge_artifacts(*s.t_global, m.artifact) : recompute_bud_states(m.artifact);
    };
    while (!s.req_queue.empty()) {
        Message m = std::move(s.req_queue.front());
        s.req_queue.pop_front();
        absorb(m);
        if (std::find(s.return_list.begin(), s.return_list.end(), m.sender) == s.return_list.end())
            s.return_list.push_back(m.sender);
        requests.push_back(m.sender);
    }
    while (!s.ans_queue.empty()) {
        Message m = std::move(s.ans_queue.front());
        s.ans_queue.pop_front();
        absorb(m);
        answers.push_back(m.sender);
    }
    if (!requests.empty() || !answers.empty())
        emit(trace, s, "merge", {{"requests", requests}, {"answers", answers}, {"return_list", s.return_list}});
    return s;
}

AgentState protocol_replicate(AgentState s, Trace& trace)
{
    if (!s.t_global)
        return s;
    const LocalGmwf& local = s.local();
    Artifact t_if = *s.t_global;
    nlohmann::json detail = nlohmann::json::object();
    if (s.t_partial) {
        MergeGuide guide = find_merge_guide(*s.t_global, *s.t_partial, local);
        Artifact maj = three_way_expand(*s.t_global, *s.t_partial, guide, local, s.agent_id());
        t_if = merge_artifacts(*s.t_global, prune_upstairs(maj, *s.t_global));
        detail["guide"] = guide.index;
    }
    Artifact projected = project_artifact(t_if, local);
    Artifact ready = recompute_bud_states(projected, s.config->writable);
    s.hidden_blocked.clear();
    for (const auto& b : buds(projected))
        if (b.state == NodeState::locked_bud && node_at(ready, b.address).state == NodeState::unlocked_bud)
            s.hidden_blocked.insert(b.address);
    s.t_partial = std::move(projected);
    refresh_partial(s);
    detail["unlocked"] = address_list(unlocked_buds(*s.t_partial));
    emit(trace, s, "replicate", std::move(detail));
    return s;
}

AgentState auto_extend(AgentState s, Trace& trace)
{
    if (!s.t_partial)
        return s;
    const Gmwf& g = s.local().gmwf;
    for (bool progress = true; progress;) {
        progress = false;
        for (const auto& b : unlocked_buds(*s.t_partial)) {
            if (!g.is_structuring(b.sort))
                continue;
            auto ps = g.productions_of(b.sort);
            if (ps.size() != 1)
                continue;
            s.t_partial = extend_bud(*s.t_partial, b.address, *ps.front(), "", s.agent_id());
            refresh_partial(s);
            emit(trace, s, "execute",
                 {{"address", b.address.to_string()}, {"sort", b.sort}, {"production", ps.front()->id},
                  {"status", ""}, {"auto", true}});
            progress = true;
            break;
        }
    }
    return s;
}

std::vector<Offer> offered_buds(const AgentState& s)
{
    std::vector<Offer> out;
    if (!s.t_partial)
        return out;
    const Gmwf& g = s.local().gmwf;
    for (const auto& b : unlocked_buds(*s.t_partial)) {
        Offer o;
        o.address = b.address;
        o.sort = b.sort;
        if (const Sort* sort = g.find_sort(b.sort))
            o.description = sort->description;
        for (const Production* p : g.productions_of(b.sort))
            o.productions.push_back(*p);
        out.push_back(std::move(o));
    }
    return out;
}

AgentState apply_decision(AgentState s, const Decision& d, Trace& trace)
{
    const auto offers = offered_buds(s);
    const Offer* offer = find_offer(offers, d.address);
    const std::string where = d.address.to_string();
    if (offer == nullptr) {
        const Node* n = s.t_partial ? find_node(*s.t_partial, d.address) : nullptr;
        if (n != nullptr && !n->is_bud())
            throw DecisionError(DecisionError::Kind::stale, "node at " + where + " is already executed");
        throw DecisionError(DecisionError::Kind::not_offered, "no offered bud at " + where);
    }
    const Production* chosen = nullptr;
    for (const auto& p : offer->productions)
        if (p.id == d.production || describe(p) == d.production)
            chosen = &p;
    if (chosen == nullptr)
        throw DecisionError(DecisionError::Kind::illegal_production,
                            "'" + d.production + "' is not a local production of " + offer->sort);
    s.t_partial = extend_bud(*s.t_partial, d.address, *chosen, d.status, s.agent_id());
    refresh_partial(s);
    emit(trace, s, "execute",
         {{"address", where}, {"sort", offer->sort}, {"production", chosen->id}, {"status", d.status},
          {"auto", false}});
    return auto_extend(std::move(s), trace);
}

AgentState protocol_execute(AgentState s, DecisionProvider& provider, Trace& trace)
{
    s = auto_extend(std::move(s), trace);
    int rejections = 0;
    for (auto offers = offered_buds(s); !offers.empty(); offers = offered_buds(s)) {
        auto decision = provider.decide(s, offers);
        if (!decision) {
            std::string pending;
            for (const auto& o : offers)
                pending += " " + o.sort + "@" + o.address.to_string();
            throw InvariantError("agent " + s.agent_id() + " left tasks pending:" + pending);
        }
        try {
            s = apply_decision(s, *decision, trace);
        } catch (const DecisionError& e) {
            provider.rejected(*decision, e.what());
            if (++rejections >= kMaxRejections)
                throw;
        }
    }
    return s;
}

AgentState protocol_expand_prune(AgentState s, Trace& trace)
{
    if (!s.t_global || !s.t_partial)
        return s;
    const LocalGmwf& local = s.local();
    MergeGuide guide = find_merge_guide(*s.t_global, *s.t_partial, local);
    Artifact maj = three_way_expand(*s.t_global, *s.t_partial, guide, local, s.agent_id());
    Artifact pruned = prune_upstairs(maj, *s.t_global);
    if (!conforms(pruned, s.config->model.gmwf))
        throw InvariantError("expansion of " + s.agent_id() + "'s replica does not conform: " + term(pruned.root));
    bool changed = pruned != *s.t_global;
    s.t_global = std::move(pruned);
    emit(trace, s, "expand_prune", {{"guide", guide.index}, {"changed", changed}, {"artifact", term(s.t_global->root)}});
    return s;
}

Diffusion protocol_diffuse(AgentState s, Trace& trace)
{
    Diffusion out;
    if (!s.t_global) {
        out.state = std::move(s);
        return out;
    }
    const auto& acc = s.config->accreditation;
    std::vector<std::string> forward;
    bool pending = false;
    std::set<DeweyAddress> still_requested;
    for (const auto& b : unlocked_buds(*s.t_global)) {
        if (b.creator != s.agent_id())
            continue;
        if (acc.execute.contains(b.sort)) {
            pending = true;
            auto writer = s.config->model.writer_of(b.sort);
            if (!writer)
                throw RoutingError("no agent writes " + b.sort);
            if (!s.requested.contains(b.address) &&
                std::find(forward.begin(), forward.end(), *writer) == forward.end())
                forward.push_back(*writer);
            still_requested.insert(b.address);
        } else if (s.config->writable.contains(b.sort)) {
            pending = true;
        } else {
            throw InvariantError("design flaw: " + s.agent_id() + " created unlocked bud " + b.sort + " at " +
                                 b.address.to_string() + " but neither writes nor delegates it");
        }
    }
    s.requested = std::move(still_requested);

    auto message = [&](MessageKind kind, const std::string& to) {
        Message m;
        m.kind = kind;
        m.case_id = s.case_id;
        m.sender = s.agent_id();
        m.recipient = to;
        m.artifact = *s.t_global;
        return m;
    };
    nlohmann::json detail = nlohmann::json::object();
    if (!forward.empty()) {
        for (const auto& to : forward)
            out.outgoing.push_back(message(MessageKind::request, to));
        detail["requests"] = forward;
    } else if (pending) {
        detail["waiting"] = true;
    } else if (!s.return_list.empty()) {
        for (const auto& to : s.return_list)
            out.outgoing.push_back(message(MessageKind::answer, to));
        detail["answers"] = s.return_list;
        s.return_list.clear();
    } else {
        s.terminated = true;
        detail["terminated"] = true;
        detail["closed"] = is_closed(*s.t_global);
    }
    emit(trace, s, "diffuse", std::move(detail));
    out.state = std::move(s);
    return out;
}

AgentState receive(AgentState s, Message msg, Trace& trace)
{
    enqueue(s, std::move(msg));
    s = protocol_merge(std::move(s), trace);
    s = protocol_replicate(std::move(s), trace);
    return auto_extend(std::move(s), trace);
}

Reaction settle(AgentState s, Trace trace)
{
    Reaction r;
    if (!offered_buds(s).empty()) {
        r.state = std::move(s);
        r.trace = std::move(trace);
        return r;
    }
    s = protocol_expand_prune(std::move(s), trace);
    auto d = protocol_diffuse(std::move(s), trace);
    r.state = std::move(d.state);
    r.outgoing = std::move(d.outgoing);
    r.trace = std::move(trace);
    return r;
}

Reaction handle_message(AgentState s, Message msg, DecisionProvider& provider)
{
    Trace trace;
    s = receive(std::move(s), std::move(msg), trace);
    s = protocol_execute(std::move(s), provider, trace);
    return settle(std::move(s), std::move(trace));
}

Reaction begin_case(AgentState s, std::string case_id, DecisionProvider& provider)
{
    Trace trace;
    s = open_case(std::move(s), std::move(case_id), trace);
    s = protocol_execute(std::move(s), provider, trace);
    return settle(std::move(s), std::move(trace));
}

}  // namespace wf
