#include "openpop/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "openpop/errors.hpp"
#include "openpop/numerics.hpp"

namespace openpop {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

namespace {

void escape_string(const std::string& s, std::string& out) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void dump(const nlohmann::json& j, std::string& out) {
    using value_t = nlohmann::json::value_t;
    switch (j.type()) {
        case value_t::null: out += "null"; return;
        case value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
        case value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            return;
        case value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            return;
        case value_t::number_float: {
            const double v = j.get<double>();
            if (std::isnan(v) || std::isinf(v)) {
                escape_string(format_double(v), out);
            } else {
                out += format_double(v);
            }
            return;
        }
        case value_t::string: escape_string(j.get<std::string>(), out); return;
        case value_t::array: {
            out.push_back('[');
            bool first = true;
            for (const auto& e : j) {
                if (!first) out.push_back(',');
                first = false;
                dump(e, out);
            }
            out.push_back(']');
            return;
        }
        case value_t::object: {
            // nlohmann::json objects iterate in key order already; keep an
            // explicit sort so ordered_json inputs canonicalize too.
            std::map<std::string, const nlohmann::json*> sorted;
            for (auto it = j.begin(); it != j.end(); ++it) {
                sorted[it.key()] = &it.value();
            }
            out.push_back('{');
            bool first = true;
            for (const auto& [k, v] : sorted) {
                if (!first) out.push_back(',');
                first = false;
                escape_string(k, out);
                out.push_back(':');
                dump(*v, out);
            }
            out.push_back('}');
            return;
        }
        default: out += "null"; return;
    }
}

} // namespace

std::string canonical_json(const nlohmann::json& j) {
    std::string out;
    out.reserve(1024);
    dump(j, out);
    out.push_back('\n');
    return out;
}

std::uint64_t config_fingerprint(const nlohmann::json& doc) {
    const std::string s = canonical_json(doc);
    return fnv1a(s.data(), s.size());
}

std::string to_hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path + ": cannot open for writing");
    out << content;
    if (!out) throw Error(path + ": write failed");
}

} // namespace openpop
