#pragma once

#include "wf/service.hpp"

#include <memory>
#include <string>

namespace wf {

/// WebSocket endpoint /v1/agent/{id}/events streaming the agent's trace events.
/// The token is accepted as a bearer header or a `token` query parameter.
class EventSocketServer {
public:
    EventSocketServer(AgentService& service, std::string token);
    ~EventSocketServer();

    EventSocketServer(const EventSocketServer&) = delete;
    EventSocketServer& operator=(const EventSocketServer&) = delete;

    /// Returns the bound port.
    unsigned short start(const std::string& host, unsigned short port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wf
