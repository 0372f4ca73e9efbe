#include <strengthlab/gateway/cli.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <strengthlab/canonical.hpp>
#include <strengthlab/errors.hpp>
#include <strengthlab/gateway/api.hpp>
#include <strengthlab/gateway/repository.hpp>
#include <strengthlab/gateway/service.hpp>

namespace strengthlab::gateway {

using nlohmann::json;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read " + path);
    std::stringstream text;
    text << in.rdbuf();
    return text.str();
}

json read_json(const std::string& path) { return json::parse(read_text(path)); }

std::vector<double> numbers(const std::string& text, char sep = ',') {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, sep)) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double x = std::stod(item, &used);
        if (used != item.size()) throw InvalidArgument("not a number: '" + item + "'");
        out.push_back(x);
    }
    return out;
}

std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

// wheel: "lo,hi;lo,hi"   urn: "1,2,5"
json event_doc(bool wheel, int urn, const std::string& spec) {
    if (wheel) {
        auto intervals = json::array();
        std::stringstream in(spec);
        std::string piece;
        while (std::getline(in, piece, ';')) {
            const auto ends = numbers(piece);
            if (ends.size() != 2) throw InvalidArgument("wheel event pieces are lo,hi pairs");
            intervals.push_back({ends[0], ends[1]});
        }
        return {{"kind", "continuous"}, {"intervals", intervals}};
    }
    std::vector<int> outcomes;
    for (double x : numbers(spec)) outcomes.push_back(static_cast<int>(x));
    return {{"kind", "discrete"}, {"k", urn}, {"outcomes", outcomes}};
}

void print_verdict(std::ostream& out, const json& v) {
    out << "kind       " << v.at("kind").get<std::string>() << '\n'
        << "lambda     " << v.at("lambda").get<double>() << '\n'
        << "relation   " << v.at("relation").get<std::string>() << '\n'
        << "coverage   " << v.at("coverage").get<double>() << " (" << v.at("derived") << '/' << v.at("required")
        << ")\n";
    for (const auto& note : v.at("notes")) out << "note       " << note.get<std::string>() << '\n';
}

struct Shared {
    bool as_json = false;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"strengthlab: analogical probability workbench"};
    app.require_subcommand(1);
    Shared shared;
    app.add_flag("--json", shared.as_json, "machine-readable output");

    auto emit = [&](const json& doc, const std::function<void()>& table) {
        if (shared.as_json) {
            out << canonical_dump(doc) << '\n';
        } else {
            table();
        }
    };

    // simulate
    auto* sim = app.add_subcommand("simulate", "repeated trials of an urn or wheel event");
    bool wheel = false;
    int urn = 0;
    std::string event_spec;
    std::uint64_t trials = 1000000, seed = 0;
    unsigned workers = 1;
    auto* wheel_flag = sim->add_flag("--wheel", wheel, "spin the unit wheel");
    sim->add_option("--urn", urn, "draw from an urn of k balls")->excludes(wheel_flag)->check(CLI::PositiveNumber);
    sim->add_option("--event", event_spec, "wheel: lo,hi[;lo,hi]  urn: i,j,...")->required();
    sim->add_option("-n,--trials", trials, "number of trials");
    sim->add_option("--seed", seed, "generator seed");
    sim->add_option("--workers", workers, "worker threads (results do not depend on it)");
    sim->add_flag("--json", shared.as_json, "machine-readable output");
    sim->callback([&] {
        if (!wheel && urn == 0) throw CLI::ValidationError("simulate", "choose --wheel or --urn K");
    });

    // compare
    auto* cmp = app.add_subcommand("compare", "strength verdict between two laws");
    std::string kind = "internal";
    std::vector<std::string> files;
    std::string judgments_path, probes_path, methods_a, methods_b, grid_spec, method = "direct";
    double lambda = -1.0;
    int cmp_urn = 0;
    bool scan = false;
    for (const char* k : {"internal", "external", "representativeness", "best-derivation", "reasoning-method"}) {
        cmp->add_flag_callback(std::string("--") + k, [&kind, k] { kind = k; }, std::string(k) + " comparison");
    }
    cmp->add_option("laws", files, "F.json [G.json]")->required()->expected(1, 2)->check(CLI::ExistingFile);
    cmp->add_option("--judgments", judgments_path, "judgment list")->check(CLI::ExistingFile);
    cmp->add_option("--lambda", lambda, "resolution");
    cmp->add_flag("--scan", scan, "sensitivity scan over a grid of resolutions");
    cmp->add_option("--grid", grid_spec, "comma-separated resolutions for --scan");
    cmp->add_option("--method", method, "method for internal comparisons");
    cmp->add_option("--methods-a", methods_a, "comma-separated methods for the first law");
    cmp->add_option("--methods-b", methods_b, "comma-separated methods for the second law");
    cmp->add_option("--urn", cmp_urn, "discrete reference set of k balls (default: wheel)");
    cmp->add_option("--probes", probes_path, "probe configuration")->check(CLI::ExistingFile);
    cmp->add_flag("--json", shared.as_json, "machine-readable output");

    // elicit-agent
    auto* agent = app.add_subcommand("elicit-agent", "run an elicitation session against a synthetic judge");
    std::string latent_path, start = "uniform";
    double band = 0.0, tv_tol = 0.02, agent_lambda = 0.5, step = 0.01;
    int max_accepts = 1000;
    agent->add_option("--latent", latent_path, "latent law of the judge")->required()->check(CLI::ExistingFile);
    agent->add_option("--start", start, "uniform or a distribution file");
    agent->add_option("--band", band, "indifference band of the judge");
    agent->add_option("--tv-tol", tv_tol, "total-variation tolerance for the final proposal");
    agent->add_option("--lambda", agent_lambda, "resolution");
    agent->add_option("--step", step, "hill-climb step");
    agent->add_option("--max-accepts", max_accepts, "accepted-move budget");
    agent->add_flag("--json", shared.as_json, "machine-readable output");

    // fiducial-demo
    auto* fid = app.add_subcommand("fiducial-demo", "fiducial law of a normal mean with known variance");
    int n = 25;
    double sigma = 2.0, xbar = 10.0, level = 0.95, mu_true = 0.0;
    std::string ladder = "10,1000,1000000";
    std::uint64_t replications = 0, fid_seed = 1;
    fid->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
    fid->add_option("--sigma", sigma, "known standard deviation");
    fid->add_option("--xbar", xbar, "observed sample mean");
    fid->add_option("--level", level, "interval level")->check(CLI::Range(0.0, 1.0));
    fid->add_option("--ladder", ladder, "prior variances as multiples of sigma^2");
    fid->add_option("--replications", replications, "coverage replications (0 skips)");
    auto* mu_opt = fid->add_option("--mu-true", mu_true, "true mean for the coverage check");
    fid->add_option("--seed", fid_seed, "coverage seed");
    fid->add_flag("--json", shared.as_json, "machine-readable output");

    // export / import
    auto* exp = app.add_subcommand("export", "print a stored session");
    std::string store_dir = "sessions", session_id, output;
    exp->add_option("--store", store_dir, "session store directory");
    exp->add_option("--id", session_id, "session id")->required();
    exp->add_option("-o,--output", output, "write to a file instead of stdout");
    auto* imp = app.add_subcommand("import", "store an exported session");
    std::string input;
    bool replace = false;
    imp->add_option("--store", store_dir, "session store directory");
    imp->add_option("file", input, "exported session")->required()->check(CLI::ExistingFile);
    imp->add_flag("--replace", replace, "overwrite an existing session with the same id");
    imp->add_flag("--json", shared.as_json, "machine-readable output");

    // serve
    auto* serve = app.add_subcommand("serve", "HTTP/JSON service");
    auto service = ServiceConfig::from_env();
    std::string addr;
    serve->add_option("--addr", addr, "host:port (env STRENGTHLAB_ADDR)");
    serve->add_option("--store", service.store, "session store directory (env STRENGTHLAB_STORE)");
    serve->add_option("--cors", service.cors_origin, "allowed CORS origin");
    serve->add_option("--log", service.log_level, "log level (env STRENGTHLAB_LOG)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            const json request = {{"event", event_doc(wheel, urn, event_spec)},
                                  {"n", trials},
                                  {"seed", seed},
                                  {"workers", workers}};
            const auto doc = simulate_trials(request);
            emit(doc, [&] {
                out << "experiment  " << doc.at("experiment").get<std::string>() << '\n'
                    << "trials      " << doc.at("n") << '\n'
                    << "count       " << doc.at("count") << '\n'
                    << "frequency   " << fixed(doc.at("freq").get<double>(), 6) << '\n'
                    << "probability " << fixed(doc.at("probability").get<double>(), 6) << '\n';
            });
        } else if (*cmp) {
            json request = {{"kind", kind}, {"f", read_json(files[0])}, {"method", method}};
            if (kind != "reasoning-method") {
                if (files.size() != 2) throw CLI::ValidationError("compare", "two laws are required");
                request["g"] = read_json(files[1]);
            }
            if (!methods_a.empty()) request["methods_a"] = words(methods_a);
            if (!methods_b.empty()) request["methods_b"] = words(methods_b);
            if (cmp_urn > 0) request["refset"] = {{"kind", "discrete"}, {"k", cmp_urn}};
            if (!probes_path.empty()) request["probes"] = read_json(probes_path);
            if (!judgments_path.empty()) {
                auto j = read_json(judgments_path);
                request["judgments"] = j.is_object() ? j.at("judgments") : j;
            }
            if (scan) {
                if (!grid_spec.empty()) request["grid"] = numbers(grid_spec);
                const auto doc = sensitivity(request);
                emit(doc, [&] {
                    for (const auto& row : doc.at("rows"))
                        out << fixed(row.at("lambda").get<double>(), 2) << "  " << row.at("relation").get<std::string>()
                            << '\n';
                    out << (doc.at("stable").get<bool>() ? "stable" : "verdict flips") << '\n';
                });
            } else {
                if (lambda < 0.0) throw CLI::ValidationError("compare", "--lambda is required without --scan");
                request["lambda"] = lambda;
                const auto doc = compare(request);
                emit(doc, [&] { print_verdict(out, doc); });
            }
        } else if (*agent) {
            json request = {{"latent", read_json(latent_path)}, {"band", band},         {"tv_tol", tv_tol},
                            {"lambda", agent_lambda},           {"step", step},         {"max_accepts", max_accepts}};
            request["start"] = start == "uniform" ? json("uniform") : read_json(start);
            const auto doc = agent_run(request);
            emit(doc, [&] {
                const auto& r = doc.at("report");
                out << "status     " << doc.at("status").get<std::string>() << '\n'
                    << "accepted   " << r.at("accepted") << " of " << r.at("proposed") << " proposals\n"
                    << "questions  " << r.at("questions") << '\n'
                    << "frontier   " << r.at("frontier_size") << '\n';
                if (doc.contains("tv")) {
                    out << "tv         " << fixed(doc.at("tv").get<double>(), 4)
                        << (doc.value("within_tolerance", false) ? "  (within tolerance)" : "  (outside tolerance)")
                        << '\n';
                }
                out << "final      " << r.at("final").dump() << '\n';
            });
        } else if (*fid) {
            json request = {{"n", n}, {"sigma", sigma}, {"xbar", xbar}, {"level", level}, {"ladder", numbers(ladder)},
                            {"replications", replications}, {"seed", fid_seed}};
            if (*mu_opt) request["mu_true"] = mu_true;
            const auto doc = fiducial_demo(request);
            emit(doc, [&] {
                const auto& f = doc.at("fiducial");
                out << "fiducial   normal(" << f.at("mean").get<double>() << ", " << f.at("var").get<double>() << ")\n"
                    << "interval   " << level * 100 << "%  (" << fixed(doc.at("interval")[0].get<double>(), 4) << ", "
                    << fixed(doc.at("interval")[1].get<double>(), 4) << ")\n";
                for (const auto& row : doc.at("ladder").at("rows")) {
                    out << "tau2 " << row.at("tau2").get<double>() << "  max cdf difference "
                        << row.at("max_cdf_difference").get<double>() << '\n';
                }
                if (doc.contains("coverage"))
                    out << "coverage   " << fixed(doc.at("coverage").at("coverage").get<double>(), 4) << '\n';
            });
        } else if (*exp) {
            SessionRepository repo(store_dir);
            const auto text = repo.export_text(session_id);
            if (output.empty()) {
                out << text << '\n';
            } else {
                std::ofstream file(output, std::ios::trunc);
                if (!(file << text << '\n')) throw StorageError("cannot write " + output);
            }
        } else if (*imp) {
            SessionRepository repo(store_dir);
            const auto r = repo.import_text(read_text(input), replace);
            emit({{"id", r.id}, {"version", r.version}}, [&] { out << r.id << '\n'; });
        } else if (*serve) {
            if (!addr.empty()) {
                const auto colon = addr.rfind(':');
                if (colon == std::string::npos) throw CLI::ValidationError("serve", "--addr must be host:port");
                service.host = addr.substr(0, colon);
                service.port = std::stoi(addr.substr(colon + 1));
            }
            Service svc(service);
            svc.listen();
        }
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return 2;
    } catch (...) {
        const auto reply = describe_error(std::current_exception());
        err << canonical_dump(reply.body) << '\n';
        return 1;
    }
    return 0;
}

}  // namespace strengthlab::gateway
