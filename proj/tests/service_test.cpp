#include "support.hpp"

#include "wf/event_socket.hpp"
#include "wf/http_api.hpp"
#include "wf/service.hpp"
#include "wf/simulator.hpp"

#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

#include <deque>
#include <set>

using namespace wf;
namespace wt = wf::testing;
using wt::peer_review;

namespace {

const std::vector<std::string> kActors{"EC", "AE", "R1", "R2"};

/// Four services wired through an in-memory queue.
class Bus {
public:
    Bus()
    {
        for (const auto& a : kActors)
            services.emplace(a, std::make_unique<AgentService>(configure(a, peer_review()),
                                                               [this](const Message& m) { queue.push_back(m); }));
    }

    AgentService& at(const std::string& id) { return *services.at(id); }

    void pump()
    {
        while (!queue.empty()) {
            Message m = queue.front();
            queue.pop_front();
            ++delivered;
            at(m.recipient).deliver(m);
        }
    }

    std::map<std::string, std::unique_ptr<AgentService>> services;
    std::deque<Message> queue;
    std::size_t delivered = 0;
};

/// Answers every offered bud the way the accept script does. Returns the number of decisions.
std::size_t drive(Bus& bus, const std::string& case_id)
{
    std::size_t decisions = 0;
    for (bool progress = true; progress;) {
        progress = false;
        bus.pump();
        for (const auto& agent : kActors) {
            auto& svc = bus.at(agent);
            if (!svc.state(case_id))
                continue;
            auto ws = svc.workspace(case_id);
            if (ws.at("unlocked_writable_buds").empty())
                continue;
            svc.execute(case_id, wt::accept_decision(agent, ws));
            ++decisions;
            progress = true;
        }
    }
    return decisions;
}

std::multiset<std::string> executions(const std::vector<nlohmann::json>& events)
{
    std::multiset<std::string> out;
    for (const auto& e : events)
        if (e.value("step", "") == "execute")
            out.insert(e.at("agent").get<std::string>() + ":" + e.at("detail").at("production").get<std::string>());
    return out;
}

}  // namespace

TEST(AgentService, AcceptCaseStepByStep)
{
    Bus bus;
    auto ws = bus.at("EC").start("paper-1");
    EXPECT_EQ(ws.at("phase"), "awaiting_decision");
    ASSERT_EQ(ws.at("unlocked_writable_buds").size(), 1u);
    EXPECT_EQ(ws.at("unlocked_writable_buds")[0].at("sort"), "A");
    EXPECT_EQ(ws.at("productions_by_sort").at("A").size(), 2u);
    std::size_t decisions = drive(bus, "paper-1");
    EXPECT_EQ(bus.delivered, 6u);
    auto ec = bus.at("EC").state("paper-1");
    ASSERT_TRUE(ec);
    EXPECT_TRUE(ec->terminated);
    EXPECT_TRUE(is_closed(*ec->t_global));
    EXPECT_EQ(bus.at("EC").cases()[0].at("phase"), "terminated");
    EXPECT_EQ(decisions, 11u);
}

TEST(AgentService, TraceMatchesScriptedRun)
{
    Bus bus;
    bus.at("EC").start("paper-1");
    drive(bus, "paper-1");
    std::vector<nlohmann::json> events;
    for (const auto& a : kActors)
        for (auto& e : bus.at(a).trace("paper-1"))
            events.push_back(e);
    SimulationResult sim = simulate(peer_review(), wt::accept_script());
    EXPECT_EQ(executions(events), executions(sim.trace));
    EXPECT_EQ(canonical(*bus.at("EC").state("paper-1")->t_global), canonical(*sim.final_artifact));
}

TEST(AgentService, WorkspaceShowsOnlyVisibleSorts)
{
    Bus bus;
    bus.at("EC").start("paper-1");
    for (bool progress = true; progress;) {
        progress = false;
        bus.pump();
        for (const auto& agent : kActors) {
            auto& svc = bus.at(agent);
            if (!svc.state("paper-1"))
                continue;
            auto ws = svc.workspace("paper-1");
            const auto& local = svc.state("paper-1")->local();
            for_each_node(artifact_from_json(ws.at("partial_replica")), [&](const DeweyAddress&, const Node& n) {
                EXPECT_TRUE(local.view.contains(n.sort) || local.is_synthesized(n.sort)) << agent << " " << n.sort;
            });
            for (const auto& [sort, list] : ws.at("productions_by_sort").items())
                for (const auto& p : list)
                    EXPECT_NE(local.gmwf.find_production(p.at("id").get<std::string>()), nullptr);
            if (ws.at("unlocked_writable_buds").empty())
                continue;
            svc.execute("paper-1", wt::accept_decision(agent, ws));
            progress = true;
        }
    }
    EXPECT_TRUE(bus.at("EC").state("paper-1")->terminated);
}

TEST(AgentService, Errors)
{
    Bus bus;
    EXPECT_THROW(bus.at("EC").workspace("nope"), NotFoundError);
    EXPECT_THROW(bus.at("EC").execute("nope", {}), NotFoundError);
    EXPECT_THROW(bus.at("AE").start("paper-1"), AccreditationError);
    bus.at("EC").start("paper-1");
    EXPECT_THROW(bus.at("EC").start("paper-1"), Error);
    EXPECT_EQ(bus.at("AE").cases().size(), 0u);
}

TEST(AgentService, ListenersReceiveEvents)
{
    Bus bus;
    std::vector<std::string> steps;
    auto id = bus.at("EC").subscribe([&](const nlohmann::json& e) { steps.push_back(e.at("step")); });
    bus.at("EC").start("paper-1");
    EXPECT_FALSE(steps.empty());
    EXPECT_EQ(steps.front(), "merge");
    bus.at("EC").unsubscribe(id);
    std::size_t seen = steps.size();
    bus.at("EC").execute("paper-1", {DeweyAddress::parse("1"), "P1", ""});
    EXPECT_EQ(steps.size(), seen);
}

class HttpApiTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        service = std::make_unique<AgentService>(configure("EC", peer_review()),
                                                 [this](const Message& m) { sent.push_back(m); });
        api = std::make_unique<HttpApi>(*service, "secret");
        port = api->start("127.0.0.1", 0);
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
        client->set_bearer_token_auth("secret");
    }

    void TearDown() override { api->stop(); }

    httplib::Result post(const std::string& path, const nlohmann::json& body)
    {
        return client->Post(path, body.dump(), "application/json");
    }

    std::unique_ptr<AgentService> service;
    std::unique_ptr<HttpApi> api;
    std::unique_ptr<httplib::Client> client;
    std::vector<Message> sent;
    int port = 0;
};

TEST_F(HttpApiTest, CaseLifecycle)
{
    auto created = post("/v1/agent/EC/cases", {{"case_id", "p1"}});
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    auto list = client->Get("/v1/agent/EC/cases");
    ASSERT_TRUE(list);
    EXPECT_EQ(list->status, 200);
    EXPECT_EQ(nlohmann::json::parse(list->body)[0].at("case_id"), "p1");
    auto ws = client->Get("/v1/agent/EC/cases/p1/workspace");
    ASSERT_TRUE(ws);
    auto body = nlohmann::json::parse(ws->body);
    EXPECT_EQ(body.at("unlocked_writable_buds")[0].at("address"), "1");
    auto done = post("/v1/agent/EC/cases/p1/execute", {{"address", "1"}, {"production_id", "P2"}, {"status", "ok"}});
    ASSERT_TRUE(done);
    EXPECT_EQ(done->status, 200);
    EXPECT_EQ(nlohmann::json::parse(done->body).at("phase"), "waiting");
    ASSERT_EQ(sent.size(), 1u);
    EXPECT_EQ(sent[0].recipient, "AE");
    auto trace = client->Get("/v1/agent/EC/cases/p1/trace");
    ASSERT_TRUE(trace);
    EXPECT_GT(nlohmann::json::parse(trace->body).size(), 3u);
}

TEST_F(HttpApiTest, ErrorCodes)
{
    httplib::Client anonymous("127.0.0.1", port);
    EXPECT_EQ(anonymous.Get("/v1/agent/EC/cases")->status, 401);
    EXPECT_EQ(client->Get("/v1/agent/AE/cases")->status, 404);
    EXPECT_EQ(client->Get("/v1/agent/EC/cases/none/workspace")->status, 404);
    ASSERT_EQ(post("/v1/agent/EC/cases", {{"case_id", "p1"}})->status, 201);
    EXPECT_EQ(post("/v1/agent/EC/cases", {{"case_id", "p1"}})->status, 409);
    EXPECT_EQ(post("/v1/agent/EC/cases/p1/execute", {{"address", "1"}, {"production_id", "P5"}})->status, 422);
    EXPECT_EQ(post("/v1/agent/EC/cases/p1/execute", {{"address", "1.1"}, {"production_id", "P7"}})->status, 422);
    EXPECT_EQ(post("/v1/agent/EC/cases/p1/execute", {{"address", "x.y"}, {"production_id", "P7"}})->status, 400);
    EXPECT_EQ(client->Post("/v1/agent/EC/cases/p1/execute", "{", "application/json")->status, 400);
    ASSERT_EQ(post("/v1/agent/EC/cases/p1/execute", {{"address", "1"}, {"production_id", "P1"}})->status, 200);
    auto stale = post("/v1/agent/EC/cases/p1/execute", {{"address", "1"}, {"production_id", "P1"}});
    EXPECT_EQ(stale->status, 409);
    EXPECT_EQ(nlohmann::json::parse(stale->body).at("error"), "stale");
}

TEST(HttpApi, InitiatorOnlyStartsCases)
{
    AgentService service(configure("AE", peer_review()), [](const Message&) {});
    HttpApi api(service, "");
    int port = api.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", port);
    auto res = client.Post("/v1/agent/AE/cases", R"({"case_id":"p1"})", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 403);
    api.stop();
}

TEST(EventSocket, StreamsTraceEvents)
{
    namespace beast = boost::beast;
    namespace websocket = beast::websocket;
    using boost::asio::ip::tcp;

    AgentService service(configure("EC", peer_review()), [](const Message&) {});
    EventSocketServer server(service, "secret");
    unsigned short port = server.start("127.0.0.1", 0);

    boost::asio::io_context io;
    websocket::stream<tcp::socket> ws(io);
    ws.next_layer().connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port));
    ws.handshake("127.0.0.1", "/v1/agent/EC/events?token=secret");
    service.start("p1");
    beast::flat_buffer buffer;
    ws.read(buffer);
    auto event = nlohmann::json::parse(beast::buffers_to_string(buffer.data()));
    EXPECT_EQ(event.at("case"), "p1");
    EXPECT_EQ(event.at("step"), "merge");
    ws.next_layer().close();
    server.stop();
}

TEST(EventSocket, RejectsWrongToken)
{
    namespace websocket = boost::beast::websocket;
    using boost::asio::ip::tcp;

    AgentService service(configure("EC", peer_review()), [](const Message&) {});
    EventSocketServer server(service, "secret");
    unsigned short port = server.start("127.0.0.1", 0);
    boost::asio::io_context io;
    websocket::stream<tcp::socket> ws(io);
    ws.next_layer().connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port));
    EXPECT_THROW(ws.handshake("127.0.0.1", "/v1/agent/EC/events?token=wrong"), boost::system::system_error);
    server.stop();
}
