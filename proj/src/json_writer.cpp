#include "divprune/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace divprune {

namespace {

void write_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void write_value(std::string& out, const ordered_json& v, int indent, int depth) {
    const auto newline = [&](int level) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * level), ' ');
    };
    switch (v.type()) {
        case ordered_json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += ordered_json(key).dump();
                out += indent < 0 ? ":" : ": ";
                write_value(out, item, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case ordered_json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                write_value(out, item, indent, depth + 1);
            }
            newline(depth);
            out += ']';
            return;
        }
        case ordered_json::value_t::number_float:
            write_number(out, v.get<double>());
            return;
        default:
            out += v.dump();
            return;
    }
}

}  // namespace

std::string dump_json(const ordered_json& value, int indent) {
    std::string out;
    write_value(out, value, indent, 0);
    out += '\n';
    return out;
}

double number_or_infinity(const ordered_json& value) {
    return value.is_null() ? std::numeric_limits<double>::infinity() : value.get<double>();
}

}  // namespace divprune
