#include "wf/tcp_transport.hpp"

#include "wf/errors.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <boost/asio.hpp>

namespace wf {

namespace asio = boost::asio;
using asio::ip::tcp;

const DeploymentAgent& Deployment::agent(const std::string& id) const
{
    for (const auto& a : agents)
        if (a.id == id)
            return a;
    throw RoutingError("agent '" + id + "' is not in the deployment");
}

std::map<std::string, std::string> Deployment::directory() const
{
    std::map<std::string, std::string> out;
    for (const auto& a : agents)
        out[a.id] = a.address;
    return out;
}

Deployment deployment_from_json(const nlohmann::json& doc)
{
    try {
        Deployment d;
        d.transport = doc.value("transport", "tcp");
        if (d.transport != "tcp" && d.transport != "sim")
            throw ModelError("unknown transport '" + d.transport + "'");
        for (const auto& a : doc.at("agents"))
            d.agents.push_back({a.at("id").get<std::string>(), a.value("address", ""), a.value("http", ""),
                                a.value("token", "")});
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed deployment: ") + e.what());
    }
}

Deployment load_deployment(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ModelError("cannot open " + path);
    try {
        return deployment_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(path + ": " + e.what());
    }
}

Endpoint parse_endpoint(const std::string& text)
{
    auto colon = text.rfind(':');
    if (colon == std::string::npos)
        throw ModelError("address '" + text + "' lacks a port");
    Endpoint e;
    e.host = text.substr(0, colon);
    if (e.host.empty())
        e.host = "127.0.0.1";
    try {
        int port = std::stoi(text.substr(colon + 1));
        if (port < 0 || port > 65535)
            throw std::out_of_range("port");
        e.port = static_cast<unsigned short>(port);
    } catch (const std::logic_error&) {
        throw ModelError("bad port in address '" + text + "'");
    }
    return e;
}

std::string encode_frame(const Message& m)
{
    std::string body = to_json(m).dump();
    auto n = static_cast<std::uint32_t>(body.size());
    std::string frame;
    frame.reserve(4 + body.size());
    frame.push_back(static_cast<char>((n >> 24) & 0xff));
    frame.push_back(static_cast<char>((n >> 16) & 0xff));
    frame.push_back(static_cast<char>((n >> 8) & 0xff));
    frame.push_back(static_cast<char>(n & 0xff));
    frame += body;
    return frame;
}

namespace {

constexpr std::uint32_t kMaxFrame = 64u << 20;
constexpr auto kRetryDelay = std::chrono::milliseconds(100);

}  // namespace

struct TcpCarrier::Impl {
    struct Outbound {
        std::string agent;
        std::shared_ptr<tcp::socket> socket;
        std::deque<std::string> frames;
        bool busy = false;
        std::unique_ptr<asio::steady_timer> timer;
    };

    struct Inbound : std::enable_shared_from_this<Inbound> {
        Impl* owner;
        tcp::socket socket;
        std::array<unsigned char, 4> header{};
        std::string body;

        Inbound(Impl* o, tcp::socket s) : owner(o), socket(std::move(s)) {}

        void read_header()
        {
            auto self = shared_from_this();
            asio::async_read(socket, asio::buffer(header), [self](boost::system::error_code ec, std::size_t) {
                if (ec)
                    return;
                std::uint32_t n = (std::uint32_t{self->header[0]} << 24) | (std::uint32_t{self->header[1]} << 16) |
                                  (std::uint32_t{self->header[2]} << 8) | std::uint32_t{self->header[3]};
                if (n > kMaxFrame)
                    return;
                self->body.assign(n, '\0');
                self->read_body();
            });
        }

        void read_body()
        {
            auto self = shared_from_this();
            asio::async_read(socket, asio::buffer(body), [self](boost::system::error_code ec, std::size_t) {
                if (ec)
                    return;
                self->owner->deliver(self->body);
                self->read_header();
            });
        }
    };

    std::string self;
    std::map<std::string, std::string> directory;
    Handler handler;
    asio::io_context io;
    std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
    tcp::acceptor acceptor{io};
    std::thread thread;
    std::map<std::string, Outbound> outbound;
    std::map<std::tuple<std::string, std::string>, std::uint64_t> next_seq;
    std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
    mutable std::mutex mutex;  // directory, next_seq, seen
    std::mutex handler_mutex;
    std::atomic<std::size_t> duplicates{0};
    bool running = false;

    void deliver(const std::string& body)
    {
        Message m;
        try {
            m = message_from_json(nlohmann::json::parse(body));
        } catch (const std::exception&) {
            return;
        }
        {
            std::lock_guard lock(mutex);
            if (m.seq != 0 && !seen.emplace(m.sender, m.case_id, m.seq).second) {
                ++duplicates;
                return;
            }
        }
        std::lock_guard lock(handler_mutex);
        handler(std::move(m));
    }

    void accept()
    {
        acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
            if (ec)
                return;
            std::make_shared<Inbound>(this, std::move(socket))->read_header();
            accept();
        });
    }

    // Runs on the io thread.
    void pump(Outbound& out)
    {
        if (out.busy || out.frames.empty())
            return;
        out.busy = true;
        if (!out.socket) {
            std::string address;
            {
                std::lock_guard lock(mutex);
                address = directory.at(out.agent);
            }
            Endpoint e;
            try {
                e = parse_endpoint(address);
            } catch (const ModelError&) {
                retry(out);
                return;
            }
            auto socket = std::make_shared<tcp::socket>(io);
            boost::system::error_code ec;
            auto where = asio::ip::make_address(e.host, ec);
            if (ec) {
                retry(out);
                return;
            }
            socket->async_connect(tcp::endpoint(where, e.port), [this, &out, socket](boost::system::error_code ec) {
                if (ec) {
                    retry(out);
                    return;
                }
                out.socket = socket;
                write(out);
            });
            return;
        }
        write(out);
    }

    void write(Outbound& out)
    {
        auto socket = out.socket;
        asio::async_write(*socket, asio::buffer(out.frames.front()),
                          [this, &out, socket](boost::system::error_code ec, std::size_t) {
                              if (ec) {
                                  out.socket.reset();
                                  retry(out);
                                  return;
                              }
                              out.frames.pop_front();
                              out.busy = false;
                              pump(out);
                          });
    }

    void retry(Outbound& out)
    {
        if (!running)
            return;
        out.timer = std::make_unique<asio::steady_timer>(io, kRetryDelay);
        out.timer->async_wait([this, &out](boost::system::error_code ec) {
            out.busy = false;
            if (!ec)
                pump(out);
        });
    }
};

TcpCarrier::TcpCarrier(std::string self, std::map<std::string, std::string> directory, Handler on_message)
    : impl_(std::make_unique<Impl>())
{
    impl_->self = std::move(self);
    impl_->directory = std::move(directory);
    impl_->handler = std::move(on_message);
}

TcpCarrier::~TcpCarrier()
{
    stop();
}

unsigned short TcpCarrier::start()
{
    auto it = impl_->directory.find(impl_->self);
    if (it == impl_->directory.end())
        throw RoutingError("agent '" + impl_->self + "' has no address");
    Endpoint e = parse_endpoint(it->second);
    tcp::endpoint where(asio::ip::make_address(e.host), e.port);
    impl_->acceptor.open(where.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(where);
    impl_->acceptor.listen();
    unsigned short port = impl_->acceptor.local_endpoint().port();
    {
        std::lock_guard lock(impl_->mutex);
        it->second = e.host + ":" + std::to_string(port);
    }
    impl_->running = true;
    impl_->work.emplace(impl_->io.get_executor());
    impl_->accept();
    impl_->thread = std::thread([this] { impl_->io.run(); });
    return port;
}

void TcpCarrier::stop()
{
    if (!impl_ || !impl_->thread.joinable())
        return;
    asio::post(impl_->io, [this] {
        impl_->running = false;
        boost::system::error_code ec;
        impl_->acceptor.close(ec);
    });
    impl_->work.reset();
    impl_->io.stop();
    impl_->thread.join();
}

void TcpCarrier::send(Message m)
{
    {
        std::lock_guard lock(impl_->mutex);
        if (!impl_->directory.contains(m.recipient))
            throw RoutingError("unknown recipient '" + m.recipient + "'");
        m.sender = impl_->self;
        m.seq = ++impl_->next_seq[{m.recipient, m.case_id}];
    }
    asio::post(impl_->io, [this, to = m.recipient, frame = encode_frame(m)]() mutable {
        auto& out = impl_->outbound[to];
        out.agent = to;
        out.frames.push_back(std::move(frame));
        impl_->pump(out);
    });
}

void TcpCarrier::set_address(const std::string& agent, const std::string& address)
{
    std::lock_guard lock(impl_->mutex);
    impl_->directory[agent] = address;
}

std::size_t TcpCarrier::duplicates_dropped() const
{
    return impl_->duplicates.load();
}

}  // namespace wf
