#include "wf/consensus.hpp"
#include "wf/decisions.hpp"
#include "wf/engine.hpp"
#include "wf/errors.hpp"
#include "wf/event_socket.hpp"
#include "wf/http_api.hpp"
#include "wf/projection.hpp"
#include "wf/service.hpp"
#include "wf/simulator.hpp"
#include "wf/targets.hpp"
#include "wf/tcp_transport.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kBreach = 2;

volatile std::sig_atomic_t g_stop = 0;

nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw wf::ModelError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw wf::ModelError(path + ": " + e.what());
    }
}

wf::SortSet split_sorts(const std::string& text)
{
    wf::SortSet out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty())
            out.insert(item);
    return out;
}

int cmd_validate(const std::string& path)
{
    wf::Gmawfp raw = wf::load_model(path);
    auto violations = wf::validate(raw);
    std::erase_if(violations, [](const wf::Violation& v) { return v.rule == "axiom-visibility"; });
    if (violations.empty()) {
        for (const auto& v : wf::validate(wf::augment_axiom(raw)))
            violations.push_back(v);
    }
    for (const auto& v : violations)
        std::cout << nlohmann::json{{"rule", v.rule}, {"subject", v.subject}, {"message", v.message}}.dump() << "\n";
    if (!violations.empty())
        return kInvalid;
    std::cout << "valid\n";
    return kOk;
}

int cmd_targets(const std::string& path, bool augmented)
{
    wf::Gmawfp model = wf::load_model(path);
    if (augmented)
        model = wf::prepare_model(model);
    for (const auto& t : wf::enumerate_target_artifacts(model.gmwf))
        std::cout << wf::canonical(t) << "\n";
    return kOk;
}

int cmd_project(const std::string& path, const std::string& view)
{
    wf::Gmawfp model = wf::prepare_model(wf::load_model(path));
    wf::View v;
    bool actor = std::any_of(model.accreditations.begin(), model.accreditations.end(),
                             [&](const wf::Accreditation& a) { return a.actor == view; });
    v = actor ? model.accreditation_of(view).read : split_sorts(view);
    wf::LocalGmwf local = wf::project_gmwf(model.gmwf, v);
    nlohmann::json out = wf::to_json(local.gmwf);
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& p : local.gmwf.productions)
        listing.push_back(p.id + " : " + wf::describe(p));
    out["listing"] = listing;
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_run(const std::string& path, const std::string& script_path, std::uint64_t seed, const std::string& policy,
            std::size_t budget)
{
    wf::Gmawfp model = wf::prepare_model(wf::load_model(path));
    wf::DecisionScript script = wf::load_script(script_path);
    wf::SimulationOptions options;
    options.policy = wf::delivery_policy_from_string(policy);
    options.seed = seed;
    options.step_budget = budget;
    wf::SimulationResult r = wf::simulate(model, script, options);
    for (const auto& line : r.trace)
        std::cout << line.dump() << "\n";
    nlohmann::json summary = {{"messages", r.delivered.size()},
                              {"terminated", r.terminated},
                              {"quiescent", r.quiescent},
                              {"final", r.final_artifact ? wf::to_json(*r.final_artifact) : nlohmann::json(nullptr)}};
    if (r.failure)
        summary["failure"] = *r.failure;
    if (!r.monitors.clean())
        summary["monitors"] = {{"single_writer", r.monitors.single_writer},
                               {"read_leaks", r.monitors.read_leaks},
                               {"conformance", r.monitors.conformance}};
    std::cout << summary.dump() << "\n";
    bool ok = !r.failure && r.terminated && r.quiescent && r.monitors.clean();
    return ok ? kOk : kBreach;
}

int cmd_serve(const std::string& path, const std::string& agent, const std::string& deployment_path)
{
    wf::Gmawfp model = wf::prepare_model(wf::load_model(path));
    wf::Deployment deployment = wf::load_deployment(deployment_path);
    if (deployment.transport != "tcp")
        throw wf::ModelError("serve needs a tcp deployment");
    const wf::DeploymentAgent& self = deployment.agent(agent);

    std::unique_ptr<wf::TcpCarrier> carrier;
    wf::AgentService service(wf::configure(agent, model), [&](const wf::Message& m) { carrier->send(m); });
    carrier = std::make_unique<wf::TcpCarrier>(agent, deployment.directory(),
                                               [&](wf::Message m) { service.deliver(std::move(m)); });
    unsigned short port = carrier->start();
    std::cerr << agent << " transport on port " << port << "\n";

    wf::HttpApi api(service, self.token);
    wf::EventSocketServer events(service, self.token);
    if (!self.http.empty()) {
        wf::Endpoint e = wf::parse_endpoint(self.http);
        int http_port = api.start(e.host, e.port);
        unsigned short ws_port = events.start(e.host, static_cast<unsigned short>(http_port + 1));
        std::cerr << agent << " http on port " << http_port << ", events on port " << ws_port << "\n";
    }
    std::signal(SIGINT, [](int) { g_stop = 1; });
    std::signal(SIGTERM, [](int) { g_stop = 1; });
    while (!g_stop)
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    events.stop();
    api.stop();
    carrier->stop();
    return kOk;
}

int cmd_consensus(const std::string& grammar_path, const std::vector<std::string>& replicas, std::size_t depth)
{
    wf::Gmwf g = wf::gmwf_from_json(read_json(grammar_path));
    std::vector<wf::TreeAutomaton> automata;
    for (const auto& spec : replicas) {
        auto colon = spec.rfind(':');
        if (colon == std::string::npos)
            throw wf::ModelError("replica '" + spec + "' must be file:SORT,SORT");
        wf::View v = split_sorts(spec.substr(colon + 1));
        wf::Artifact replica = wf::artifact_from_json(read_json(spec.substr(0, colon)));
        automata.push_back(wf::automaton_from_replica(replica.root, v, g, wf::BracketMap::for_view(v)));
    }
    wf::TreeAutomaton product = wf::consensus_product(automata);
    auto trees = depth == 0 ? wf::generate_simplest_trees(product) : wf::generate_trees(product, depth);
    nlohmann::json out = {{"automaton", product.to_json()}, {"trees", nlohmann::json::array()}};
    for (const auto& t : trees)
        out["trees"].push_back({{"term", wf::term(t)}, {"tree", wf::to_json(t)}});
    std::cout << out.dump(2) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Decentralized artifact-centric workflow engine"};
    app.require_subcommand(1);

    std::string model;
    auto* validate = app.add_subcommand("validate", "Check a workflow model");
    validate->add_option("model", model, "Model file")->required()->check(CLI::ExistingFile);

    bool augmented = false;
    auto* targets = app.add_subcommand("targets", "List the target artifacts of a model");
    targets->add_option("model", model, "Model file")->required()->check(CLI::ExistingFile);
    targets->add_flag("--augmented", augmented, "Add the case axiom first");

    std::string view;
    auto* project = app.add_subcommand("project", "Print the local model of an actor or a sort list");
    project->add_option("--view", view, "Actor id or comma-separated sorts")->required();
    project->add_option("model", model, "Model file")->required()->check(CLI::ExistingFile);

    std::string script;
    std::uint64_t seed = 0;
    std::string policy = "fifo";
    std::size_t budget = 10000;
    auto* run = app.add_subcommand("run", "Simulate one case with scripted decisions");
    run->add_option("--script", script, "Decision script")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Seed for the random policy");
    run->add_option("--policy", policy, "fifo or random")->check(CLI::IsMember({"fifo", "random"}));
    run->add_option("--budget", budget, "Delivery step budget");
    run->add_option("model", model, "Model file")->required()->check(CLI::ExistingFile);

    std::string agent;
    std::string deployment;
    auto* serve = app.add_subcommand("serve", "Host one agent over TCP and HTTP");
    serve->add_option("--agent", agent, "Agent id")->required();
    serve->add_option("--deployment", deployment, "Deployment file")->required()->check(CLI::ExistingFile);
    serve->add_option("model", model, "Model file")->required()->check(CLI::ExistingFile);

    std::string grammar;
    std::vector<std::string> replicas;
    std::size_t depth = 0;
    auto* consensus = app.add_subcommand("consensus", "Reconcile partial replicas of a document");
    consensus->add_option("--grammar", grammar, "Grammar file")->required()->check(CLI::ExistingFile);
    consensus->add_option("--replica", replicas, "file:SORT,SORT")->required();
    consensus->add_option("--depth", depth, "Enumerate trees up to this height instead of the simplest ones");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate)
            return cmd_validate(model);
        if (*targets)
            return cmd_targets(model, augmented);
        if (*project)
            return cmd_project(model, view);
        if (*run)
            return cmd_run(model, script, seed, policy, budget);
        if (*serve)
            return cmd_serve(model, agent, deployment);
        if (*consensus)
            return cmd_consensus(grammar, replicas, depth);
    } catch (const wf::ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const wf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBreach;
    }
    return kOk;
}
