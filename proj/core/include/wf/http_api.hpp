#pragma once

#include "wf/service.hpp"

#include <memory>
#include <string>

namespace wf {

/// JSON routes under /v1/agent/{id}. Requests must carry
/// "Authorization: Bearer <token>" when a token is configured.
class HttpApi {
public:
    HttpApi(AgentService& service, std::string token);
    ~HttpApi();

    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    int start(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wf
