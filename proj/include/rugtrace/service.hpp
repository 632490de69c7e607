#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "rugtrace/app.hpp"

namespace httplib {
class Server;
}

namespace rugtrace::service {

using exporting::Json;

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::optional<std::string> idempotency_key;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

struct Options {
    std::filesystem::path data_dir;
    std::optional<std::filesystem::path> static_dir;
};

/// Environment variables read by `options_from_env` and `serve`.
inline constexpr const char* kDataDirEnv = "RUGTRACE_DATA_DIR";
inline constexpr const char* kBindEnv = "RUGTRACE_BIND";
inline constexpr const char* kDefaultBind = "127.0.0.1:8547";

/// Investigations live entirely under `data_dir`; in-memory state is a cache
/// of what the files already say, so a restarted service picks up where the
/// previous one stopped.
class Service {
public:
    explicit Service(Options options);
    ~Service();

    Response handle(const Request& request);
    /// Registers every route on `server`.
    void mount(httplib::Server& server);

    const Options& options() const { return options_; }

private:
    struct Entry;

    Response dispatch(const Request& request);
    Response create(const Request& request);
    Response get_summary(const std::string& id);
    Response get_document(const std::string& id, const std::string& which);
    Response get_graph(const std::string& id, const std::map<std::string, std::string>& query);
    Response get_report(const std::string& id, const std::map<std::string, std::string>& query);
    Response get_audit(const std::string& id);
    Response expand(const std::string& id, const Request& request);
    Response tag(const std::string& id, const Request& request);

    std::shared_ptr<Entry> entry(const std::string& id);
    std::filesystem::path dir_of(const std::string& id) const;

    Options options_;
    std::mutex entries_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;
    std::mutex create_mutex_;
    std::mutex idempotency_mutex_;
};

/// Data directory and bind address from the environment, with defaults.
Options options_from_env();
/// "host:port" split; throws ConfigError for malformed input.
std::pair<std::string, int> parse_bind(const std::string& bind);

/// Blocks serving HTTP until the process is stopped.
void serve(Service& service, const std::string& bind);

}  // namespace rugtrace::service
