#include "wf/http_api.hpp"

#include "wf/errors.hpp"

#include <thread>

#include <httplib.h>

namespace wf {

namespace {

void reply(httplib::Response& res, int code, const nlohmann::json& body)
{
    res.status = code;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int code, const std::string& kind, const std::string& what)
{
    reply(res, code, {{"error", kind}, {"message", what}});
}

std::string decision_error_name(DecisionError::Kind k)
{
    switch (k) {
    case DecisionError::Kind::stale:
        return "stale";
    case DecisionError::Kind::not_offered:
        return "not_offered";
    case DecisionError::Kind::illegal_production:
        return "illegal_production";
    default:
        return "rejected";
    }
}

}  // namespace

struct HttpApi::Impl {
    AgentService& service;
    std::string token;
    httplib::Server server;
    std::thread thread;

    Impl(AgentService& s, std::string t) : service(s), token(std::move(t)) {}

    // Returns false after writing the error response.
    bool admit(const httplib::Request& req, httplib::Response& res)
    {
        if (req.matches[1] != service.agent_id()) {
            fail(res, 404, "unknown_agent", "this service hosts " + service.agent_id());
            return false;
        }
        if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
            fail(res, 401, "unauthorized", "missing or wrong bearer token");
            return false;
        }
        return true;
    }

    template <typename Fn>
    void guarded(const httplib::Request& req, httplib::Response& res, Fn&& fn)
    {
        if (!admit(req, res))
            return;
        try {
            fn();
        } catch (const NotFoundError& e) {
            fail(res, 404, "not_found", e.what());
        } catch (const DecisionError& e) {
            int code = e.kind() == DecisionError::Kind::stale ? 409 : 422;
            fail(res, code, decision_error_name(e.kind()), e.what());
        } catch (const AccreditationError& e) {
            fail(res, 403, "forbidden", e.what());
        } catch (const AddressError& e) {
            fail(res, 400, "bad_address", e.what());
        } catch (const nlohmann::json::exception& e) {
            fail(res, 400, "bad_request", e.what());
        } catch (const Error& e) {
            fail(res, 409, "conflict", e.what());
        }
    }

    void routes()
    {
        server.Get(R"(/v1/agent/([^/]+)/cases)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] { reply(res, 200, service.cases()); });
        });
        server.Post(R"(/v1/agent/([^/]+)/cases)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(req, res, [&] {
                auto body = nlohmann::json::parse(req.body);
                reply(res, 201, service.start(body.at("case_id").get<std::string>()));
            });
        });
        server.Get(R"(/v1/agent/([^/]+)/cases/([^/]+)/workspace)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(req, res, [&] { reply(res, 200, service.workspace(req.matches[2])); });
                   });
        server.Get(R"(/v1/agent/([^/]+)/cases/([^/]+)/trace)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(req, res, [&] { reply(res, 200, service.trace(req.matches[2])); });
                   });
        server.Post(R"(/v1/agent/([^/]+)/cases/([^/]+)/execute)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(req, res, [&] {
                            auto body = nlohmann::json::parse(req.body);
                            Decision d;
                            d.address = DeweyAddress::parse(body.at("address").get<std::string>());
                            d.production = body.at("production_id").get<std::string>();
                            d.status = body.value("status", "");
                            reply(res, 200, service.execute(req.matches[2], d));
                        });
                    });
    }
};

HttpApi::HttpApi(AgentService& service, std::string token)
    : impl_(std::make_unique<Impl>(service, std::move(token)))
{
    impl_->routes();
}

HttpApi::~HttpApi()
{
    stop();
}

int HttpApi::start(const std::string& host, int port)
{
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw Error("cannot bind HTTP service to " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpApi::stop()
{
    if (!impl_ || !impl_->thread.joinable())
        return;
    impl_->server.stop();
    impl_->thread.join();
}

}  // namespace wf
