#include "wf/event_socket.hpp"

#include "wf/errors.hpp"

#include <condition_variable>
#include <deque>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace wf {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using asio::ip::tcp;

namespace {

struct Session {
    explicit Session(tcp::socket s) : ws(std::move(s)) {}

    websocket::stream<tcp::socket> ws;
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::string> pending;
    bool closing = false;
    std::thread thread;

    void push(std::string frame)
    {
        {
            std::lock_guard lock(mutex);
            pending.push_back(std::move(frame));
        }
        ready.notify_one();
    }

    void close()
    {
        {
            std::lock_guard lock(mutex);
            closing = true;
        }
        ready.notify_one();
        boost::system::error_code ec;
        beast::get_lowest_layer(ws).shutdown(tcp::socket::shutdown_both, ec);
    }
};

std::string query_token(std::string_view target)
{
    auto q = target.find("token=");
    if (q == std::string_view::npos)
        return {};
    auto value = target.substr(q + 6);
    return std::string(value.substr(0, value.find('&')));
}

}  // namespace

struct EventSocketServer::Impl {
    AgentService& service;
    std::string token;
    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::thread thread;
    std::mutex sessions_mutex;
    std::list<std::shared_ptr<Session>> sessions;

    Impl(AgentService& s, std::string t) : service(s), token(std::move(t)) {}

    void accept()
    {
        acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
            if (ec)
                return;
            auto session = std::make_shared<Session>(std::move(socket));
            {
                std::lock_guard lock(sessions_mutex);
                sessions.push_back(session);
            }
            session->thread = std::thread([this, session] { serve(*session); });
            accept();
        });
    }

    void serve(Session& s)
    {
        std::size_t subscription = 0;
        try {
            beast::flat_buffer buffer;
            http::request<http::string_body> req;
            http::read(s.ws.next_layer(), buffer, req);
            std::string target(req.target());
            std::string path = target.substr(0, target.find('?'));
            std::string expected = "/v1/agent/" + service.agent_id() + "/events";
            bool authorized = token.empty() || query_token(target) == token ||
                              std::string(req[http::field::authorization]) == "Bearer " + token;
            if (path != expected || !websocket::is_upgrade(req) || !authorized) {
                http::response<http::string_body> res{path != expected ? http::status::not_found
                                                                        : http::status::unauthorized,
                                                      req.version()};
                res.set(http::field::content_type, "application/json");
                res.body() = R"({"error":"rejected"})";
                res.prepare_payload();
                http::write(s.ws.next_layer(), res);
                return;
            }
            subscription = service.subscribe([&s](const nlohmann::json& e) { s.push(e.dump()); });
            s.ws.accept(req);
            s.ws.text(true);
            // TODO: read client frames so close handshakes complete before stop().
            for (;;) {
                std::unique_lock lock(s.mutex);
                s.ready.wait(lock, [&] { return s.closing || !s.pending.empty(); });
                if (s.closing)
                    break;
                std::string frame = std::move(s.pending.front());
                s.pending.pop_front();
                lock.unlock();
                s.ws.write(asio::buffer(frame));
            }
        } catch (const std::exception&) {
        }
        if (subscription != 0)
            service.unsubscribe(subscription);
    }
};

EventSocketServer::EventSocketServer(AgentService& service, std::string token)
    : impl_(std::make_unique<Impl>(service, std::move(token)))
{
}

EventSocketServer::~EventSocketServer()
{
    stop();
}

unsigned short EventSocketServer::start(const std::string& host, unsigned short port)
{
    tcp::endpoint where(asio::ip::make_address(host), port);
    impl_->acceptor.open(where.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(where);
    impl_->acceptor.listen();
    impl_->accept();
    impl_->thread = std::thread([this] { impl_->io.run(); });
    return impl_->acceptor.local_endpoint().port();
}

void EventSocketServer::stop()
{
    if (!impl_ || !impl_->thread.joinable())
        return;
    asio::post(impl_->io, [this] {
        boost::system::error_code ec;
        impl_->acceptor.close(ec);
    });
    impl_->io.stop();
    impl_->thread.join();
    std::list<std::shared_ptr<Session>> sessions;
    {
        std::lock_guard lock(impl_->sessions_mutex);
        sessions.swap(impl_->sessions);
    }
    for (auto& s : sessions) {
        s->close();
        if (s->thread.joinable())
            s->thread.join();
    }
}

}  // namespace wf
