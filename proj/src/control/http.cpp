#include "swarm/common/error.hpp"
#include "swarm/control/api.hpp"

#include <httplib.h>

namespace swarm::control {

struct HttpServer::Impl {
    std::shared_ptr<ApiService> api;
    httplib::Server server;
    std::thread thread;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

Query query_of(const httplib::Request& req) {
    Query q;
    for (const auto& [k, v] : req.params) q[k] = v;
    return q;
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<ApiService> api) : impl_(std::make_unique<Impl>()) {
    impl_->api = std::move(api);
    auto& srv = impl_->server;
    auto* api_ptr = impl_->api.get();

    srv.Get("/api/stream", [api_ptr](const httplib::Request& req, httplib::Response& res) {
        auto log = api_ptr->log();
        std::uint64_t from = log->first_seq();
        std::string start;
        if (req.has_param("from")) start = req.get_param_value("from");
        else if (req.has_header("Last-Event-ID")) start = req.get_header_value("Last-Event-ID");
        if (!start.empty()) {
            try {
                std::size_t used = 0;
                from = std::stoull(start, &used);
                if (used != start.size()) throw std::invalid_argument(start);
                if (!req.has_param("from")) from += 1;
            } catch (const std::exception&) {
                reply(res, api_error(400, Errc::invalid_argument, "from must be a nonnegative integer"));
                return;
            }
        }
        auto next = std::make_shared<std::uint64_t>(from);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [log, next](std::size_t, httplib::DataSink& sink) {
            if (!log->wait_for(*next, std::chrono::milliseconds(200))) {
                if (log->closed() && *next >= log->next_seq()) {
                    sink.done();
                    return true;
                }
                return sink.is_writable();  // keep waiting
            }
            for (const auto& e : log->since(*next)) {
                const auto frame = sse_frame(e);
                if (!sink.write(frame.data(), frame.size())) return false;
                *next = e.at("seq").get<std::uint64_t>() + 1;
            }
            return true;
        });
    });
    auto handler = [api_ptr](const httplib::Request& req, httplib::Response& res) {
        reply(res, api_ptr->handle(req.method, req.path, query_of(req), req.body));
    };
    srv.Get(R"(/api/.*)", handler);
    srv.Post(R"(/api/.*)", handler);
    srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        reply(res, api_error(res.status, Errc::not_found, "no endpoint " + req.path));
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    auto& srv = impl_->server;
    const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(Errc::backend_failure, "cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    return bound;
}

void HttpServer::run(const std::string& host, int port) {
    if (!impl_->server.listen(host, port)) {
        throw Error(Errc::backend_failure, "cannot listen on " + host + ":" + std::to_string(port));
    }
}

void HttpServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace swarm::control
