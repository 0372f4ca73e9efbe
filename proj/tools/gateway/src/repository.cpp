#include <strengthlab/gateway/repository.hpp>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <sstream>

#include <boost/uuid/uuid_generators.hpp>
#include <boost/uuid/uuid_io.hpp>
#include <nlohmann/json.hpp>

#include <strengthlab/canonical.hpp>
#include <strengthlab/errors.hpp>

namespace strengthlab::gateway {

namespace fs = std::filesystem;

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool valid_session_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    });
}

nlohmann::json SessionRecord::to_json() const {
    return {{"id", id}, {"version", version}, {"created", created}, {"updated", updated}, {"session", session.to_json()}};
}

SessionRecord SessionRecord::from_json(const nlohmann::json& doc) {
    SessionRecord r;
    r.id = doc.at("id").get<std::string>();
    if (!valid_session_id(r.id)) throw InvalidArgument("malformed session id '" + r.id + "'");
    r.version = doc.at("version").get<std::uint64_t>();
    r.created = doc.at("created").get<std::string>();
    r.updated = doc.at("updated").get<std::string>();
    r.session = ElicitationSession::from_json(doc.at("session"));
    if (r.session.id() != r.id) throw InvalidArgument("session document id does not match its record");
    return r;
}

SessionRepository::SessionRepository(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) throw StorageError("cannot use session store " + root_.string());
}

std::shared_ptr<std::mutex> SessionRepository::lock_for(const std::string& id) {
    std::lock_guard guard(registry_);
    auto& slot = locks_[id];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
}

fs::path SessionRepository::file_of(const std::string& id) const { return root_ / (id + ".json"); }

SessionRecord SessionRepository::load(const std::string& id) {
    if (!valid_session_id(id)) throw NotFound("no session '" + id + "'");
    std::ifstream in(file_of(id));
    if (!in) throw NotFound("no session '" + id + "'");
    std::stringstream text;
    text << in.rdbuf();
    return SessionRecord::from_json(nlohmann::json::parse(text.str()));
}

void SessionRepository::save(const SessionRecord& record) {
    const auto target = file_of(record.id);
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw StorageError("cannot write " + tmp.string());
        out << canonical_dump(record.to_json()) << '\n';
        if (!out) throw StorageError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw StorageError("cannot replace " + target.string() + ": " + ec.message());
}

SessionRecord SessionRepository::create(SessionConfig config, Distribution initial) {
    static thread_local boost::uuids::random_generator uuid;
    if (config.variable.empty()) config.variable = initial.variable();
    SessionRecord r;
    r.id = boost::uuids::to_string(uuid());
    r.version = 1;
    r.created = r.updated = utc_now();
    r.session = ElicitationSession::start(r.id, std::move(config), std::move(initial));
    auto lock = lock_for(r.id);
    std::lock_guard guard(*lock);
    save(r);
    return r;
}

SessionRecord SessionRepository::get(const std::string& id) {
    auto lock = lock_for(id);
    std::lock_guard guard(*lock);
    return load(id);
}

SessionRecord SessionRepository::update(const std::string& id, std::optional<std::uint64_t> expected_version,
                                        const std::function<void(ElicitationSession&)>& change) {
    auto lock = lock_for(id);
    std::lock_guard guard(*lock);
    auto r = load(id);
    if (expected_version && *expected_version != r.version) {
        throw StaleVersion("session " + id + " is at version " + std::to_string(r.version) + ", not " +
                           std::to_string(*expected_version));
    }
    auto next = r.session;
    change(next);
    r.session = std::move(next);
    ++r.version;
    r.updated = utc_now();
    save(r);
    return r;
}

std::string SessionRepository::export_text(const std::string& id) { return canonical_dump(get(id).to_json()); }

SessionRecord SessionRepository::import_text(const std::string& text, bool replace) {
    auto r = SessionRecord::from_json(nlohmann::json::parse(text));
    auto lock = lock_for(r.id);
    std::lock_guard guard(*lock);
    if (!replace && fs::exists(file_of(r.id))) throw StaleVersion("session " + r.id + " already exists");
    save(r);
    return r;
}

std::vector<std::string> SessionRepository::list() const {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root_)) {
        if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace strengthlab::gateway
