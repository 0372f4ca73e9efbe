#include <strengthlab/gateway/service.hpp>

#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <strengthlab/canonical.hpp>
#include <strengthlab/errors.hpp>
#include <strengthlab/gateway/api.hpp>
#include <strengthlab/gateway/repository.hpp>

namespace strengthlab::gateway {

using nlohmann::json;

ServiceConfig ServiceConfig::from_env() {
    ServiceConfig c;
    if (const char* addr = std::getenv("STRENGTHLAB_ADDR"); addr && *addr) {
        const std::string a(addr);
        const auto colon = a.rfind(':');
        if (colon == std::string::npos) throw InvalidArgument("STRENGTHLAB_ADDR must be host:port");
        c.host = a.substr(0, colon);
        c.port = std::stoi(a.substr(colon + 1));
    }
    if (const char* store = std::getenv("STRENGTHLAB_STORE"); store && *store) c.store = store;
    if (const char* level = std::getenv("STRENGTHLAB_LOG"); level && *level) c.log_level = level;
    return c;
}

struct Service::Impl {
    ServiceConfig config;
    SessionRepository repo;
    httplib::Server server;
    std::thread worker;
    int port = -1;

    explicit Impl(ServiceConfig c) : config(std::move(c)), repo(config.store) {}

    void reply(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(canonical_dump(body), "application/json");
    }

    static json body_of(const httplib::Request& req) {
        return req.body.empty() ? json::object() : json::parse(req.body);
    }

    void route() {
        auto post = [this](const std::string& path, json (*fn)(const json&)) {
            server.Post(path, [this, fn](const httplib::Request& req, httplib::Response& res) {
                reply(res, 200, fn(body_of(req)));
            });
        };
        post("/compare/sensitivity", &sensitivity);
        post("/simulate/trials", &simulate_trials);
        post("/fiducial/demo", &fiducial_demo);
        post("/agent/run", &agent_run);

        server.Post("/compare/internal", [this](const httplib::Request& req, httplib::Response& res) {
            auto body = body_of(req);
            if (body.value("kind", std::string("internal")) != "internal")
                throw InvalidArgument("/compare/internal only runs internal comparisons");
            body["kind"] = "internal";
            reply(res, 200, compare(body));
        });
        server.Post("/compare/external", [this](const httplib::Request& req, httplib::Response& res) {
            auto body = body_of(req);
            if (!body.contains("kind")) body["kind"] = "external";
            if (body["kind"] == "internal") throw InvalidArgument("use /compare/internal for internal comparisons");
            reply(res, 200, compare(body));
        });

        server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, {{"status", "ok"}});
        });

        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 201, session_create(repo, body_of(req)));
        });
        server.Post("/sessions/import", [this](const httplib::Request& req, httplib::Response& res) {
            const auto r = repo.import_text(req.body, req.get_param_value("replace") == "true");
            reply(res, 201, {{"id", r.id}, {"version", r.version}});
        });
        const std::string id = "/sessions/([A-Za-z0-9_-]+)";
        server.Get(id, [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, session_get(repo, req.matches[1]));
        });
        server.Get(id + "/export", [this](const httplib::Request& req, httplib::Response& res) {
            res.status = 200;
            res.set_content(repo.export_text(req.matches[1]), "application/json");
        });
        server.Get(id + "/questions", [this](const httplib::Request& req, httplib::Response& res) {
            const auto batch = req.has_param("batch") ? std::stoul(req.get_param_value("batch")) : 0;
            reply(res, 200, session_questions(repo, req.matches[1], batch));
        });
        server.Post(id + "/answers", [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, session_answers(repo, req.matches[1], body_of(req)));
        });
        server.Post(id + "/candidates", [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, session_candidate(repo, req.matches[1], body_of(req)));
        });
        server.Get(id + "/frontier", [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, session_frontier(repo, req.matches[1]));
        });

        server.set_exception_handler([this](const httplib::Request& req, httplib::Response& res, std::exception_ptr e) {
            const auto err = describe_error(e);
            spdlog::warn("{} {} -> {} {}", req.method, req.path, err.status, err.body.value("message", ""));
            reply(res, err.status, err.body);
        });
        server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (!res.body.empty()) return;
            const std::string code = res.status == 404 ? "not_found" : "http_error";
            reply(res, res.status, {{"code", code}, {"message", req.method + " " + req.path}, {"detail", json::object()}});
        });
        server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
            spdlog::info("{} {} {}", req.method, req.path, res.status);
        });
        if (!config.cors_origin.empty()) {
            server.set_default_headers({{"Access-Control-Allow-Origin", config.cors_origin},
                                        {"Access-Control-Allow-Headers", "Content-Type"},
                                        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
            server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        }
    }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    spdlog::set_level(spdlog::level::from_str(impl_->config.log_level));
    impl_->route();
}

Service::~Service() { stop(); }

int Service::bind() {
    if (impl_->port >= 0) return impl_->port;
    const auto& c = impl_->config;
    if (c.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(c.host);
    } else if (impl_->server.bind_to_port(c.host, c.port)) {
        impl_->port = c.port;
    }
    if (impl_->port < 0) throw std::runtime_error("cannot bind " + c.host + ":" + std::to_string(c.port));
    return impl_->port;
}

void Service::listen() {
    const int port = bind();
    spdlog::info("serving on {}:{} with store {}", impl_->config.host, port, impl_->config.store.string());
    impl_->server.listen_after_bind();
}

int Service::start() {
    const int port = bind();
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace strengthlab::gateway
