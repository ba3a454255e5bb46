#pragma once

#include "wf/message.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

struct DeploymentAgent {
    std::string id;
    std::string address;  ///< "host:port" of the message listener
    std::string http;     ///< "host:port" of the HTTP service, optional
    std::string token;    ///< bearer token, optional
};

struct Deployment {
    std::string transport = "tcp";  ///< "tcp" or "sim"
    std::vector<DeploymentAgent> agents;

    const DeploymentAgent& agent(const std::string& id) const;
    std::map<std::string, std::string> directory() const;
};

Deployment deployment_from_json(const nlohmann::json& doc);
Deployment load_deployment(const std::string& path);

struct Endpoint {
    std::string host;
    unsigned short port = 0;
};

Endpoint parse_endpoint(const std::string& text);

/// Length-prefixed JSON frames: 4-byte big-endian size, then the envelope.
std::string encode_frame(const Message& m);

/// At-least-once delivery over TCP with per-channel sequence numbers;
/// duplicates are dropped on receipt. Handlers run one at a time.
class TcpCarrier {
public:
    using Handler = std::function<void(Message)>;

    /// `directory` maps agent ids to "host:port". The own entry may use port 0.
    TcpCarrier(std::string self, std::map<std::string, std::string> directory, Handler on_message);
    ~TcpCarrier();

    TcpCarrier(const TcpCarrier&) = delete;
    TcpCarrier& operator=(const TcpCarrier&) = delete;

    /// Binds the listener; returns the bound port.
    unsigned short start();
    void stop();

    /// Assigns the channel sequence number and queues the message. Throws RoutingError.
    void send(Message m);
    void set_address(const std::string& agent, const std::string& address);

    std::size_t duplicates_dropped() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wf
