#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace strengthlab::gateway {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path store = "sessions";
    std::string cors_origin;
    std::string log_level = "info";

    /// STRENGTHLAB_ADDR (host:port), STRENGTHLAB_STORE and STRENGTHLAB_LOG override
    /// the defaults.
    static ServiceConfig from_env();
};

class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the socket and returns the bound port; throws std::runtime_error when
    /// the address is unavailable.
    int bind();
    /// Serves until stop(); binds first if needed.
    void listen();
    /// listen() on a background thread; returns the bound port.
    int start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace strengthlab::gateway
