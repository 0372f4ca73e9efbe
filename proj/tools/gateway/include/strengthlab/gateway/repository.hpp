#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <strengthlab/elicitation.hpp>

namespace strengthlab::gateway {

struct SessionRecord {
    std::string id;
    std::uint64_t version = 0;
    std::string created;
    std::string updated;
    ElicitationSession session;

    nlohmann::json to_json() const;
    static SessionRecord from_json(const nlohmann::json& doc);
};

/// One canonical JSON file per session under `root`. Mutations on one session are
/// serialized; different sessions proceed independently.
class SessionRepository {
public:
    explicit SessionRepository(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    SessionRecord create(SessionConfig config, Distribution initial);
    SessionRecord get(const std::string& id);

    /// Applies `change` to a copy of the session. On success the version is bumped
    /// and the file rewritten; on any throw nothing changes. A present
    /// `expected_version` must match the stored one (StaleVersion otherwise).
    SessionRecord update(const std::string& id, std::optional<std::uint64_t> expected_version,
                         const std::function<void(ElicitationSession&)>& change);

    std::string export_text(const std::string& id);
    /// Stores a record exactly as exported. Refuses an existing id unless `replace`.
    SessionRecord import_text(const std::string& text, bool replace = false);

    std::vector<std::string> list() const;

private:
    std::shared_ptr<std::mutex> lock_for(const std::string& id);
    std::filesystem::path file_of(const std::string& id) const;
    SessionRecord load(const std::string& id);
    void save(const SessionRecord& record);

    std::filesystem::path root_;
    mutable std::mutex registry_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

/// UTC, second resolution, ISO 8601.
std::string utc_now();

bool valid_session_id(const std::string& id);

}  // namespace strengthlab::gateway
