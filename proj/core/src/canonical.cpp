#include <strengthlab/canonical.hpp>

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>

namespace strengthlab {

namespace {

void write(const nlohmann::json& v, std::string& out) {
    switch (v.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& [key, item] : v.items()) {  // object_t is an ordered std::map
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(key).dump();
                out += ':';
                write(item, out);
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ',';
                write(v[i], out);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::number_float: {
            const double x = v.get<double>();
            if (!std::isfinite(x)) throw InvalidArgument("non-finite number has no JSON form");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out += buf;
            break;
        }
        default:
            out += v.dump();
    }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& doc) {
    std::string out;
    write(doc, out);
    return out;
}

std::string canonicalize(const std::string& text) { return canonical_dump(nlohmann::json::parse(text)); }

}  // namespace strengthlab
