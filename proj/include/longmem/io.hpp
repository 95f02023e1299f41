#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "longmem/core.hpp"
#include "longmem/processes.hpp"

namespace longmem::io {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const char* where) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw Error(ErrorKind::ParseError, where, "not a number: '" + t + "'");
    return v;
}

/// One numeric column. A single non-numeric first line is taken as a header;
/// lines starting with '#' and blank lines are skipped.
inline std::vector<double> read_column(std::istream& in) {
    const char* where = "cli/read_csv";
    std::vector<double> out;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            out.push_back(parse_double(t, where));
        } catch (const Error&) {
            if (!first) throw Error(ErrorKind::ParseError, where, "line " + std::to_string(lineno) + ": '" + t + "' is not a number");
        }
        first = false;
    }
    if (out.empty()) throw Error(ErrorKind::ParseError, where, "no numeric values found");
    return out;
}

inline std::vector<double> read_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cli/read_csv", "cannot open '" + path + "'");
    return read_column(in);
}

/// Shortest round-trippable decimal text (at most 17 significant digits).
inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    return std::string(buf, ptr);
}

inline void write_column(std::ostream& os, std::span<const double> values, const std::string& header = "value",
                         const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) os << "# " << c << '\n';
    os << header << '\n';
    for (double v : values) os << format_double(v) << '\n';
}

// ---------------------------------------------------------------------------
// Inline process specs, e.g. "arfima:phi=0.8,d=0.4,theta=0.7"
// ---------------------------------------------------------------------------

inline ProcessSpec parse_spec(const std::string& text) {
    const char* where = "cli/parse_spec";
    const auto colon = text.find(':');
    const std::string family = trim(text.substr(0, colon));
    std::map<std::string, double> kv;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (trim(item).empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw Error(ErrorKind::ParseError, where, "expected key=value, got '" + item + "'");
            kv[trim(item.substr(0, eq))] = parse_double(item.substr(eq + 1), where);
        }
    }
    std::size_t used = 0;
    auto get = [&](const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (auto it = kv.find(key); it != kv.end()) {
            ++used;
            return it->second;
        }
        if (!fallback) throw Error(ErrorKind::ParseError, where, family + " spec needs '" + key + "'");
        return *fallback;
    };
    ProcessSpec spec;
    if (family == "fgn") {
        spec = FgnSpec{get("H")};
    } else if (family == "fbm") {
        spec = FbmSpec{get("H"), get("delta", 1.0)};
    } else if (family == "fou") {
        spec = FouSpec{{get("lambda1", 0.0), get("lambda2"), get("sigma", 1.0), get("H")}, get("T")};
    } else if (family == "ou") {
        spec = OuSpec{get("lambda"), get("sigma", 1.0), get("T")};
    } else if (family == "arma" || family == "ar" || family == "ma") {
        ArmaSpec s;
        for (int i = 1; kv.count("phi" + std::to_string(i)); ++i) s.ar.push_back(get("phi" + std::to_string(i)));
        for (int i = 1; kv.count("theta" + std::to_string(i)); ++i) s.ma.push_back(get("theta" + std::to_string(i)));
        if (s.ar.empty() && kv.count("phi")) s.ar.push_back(get("phi"));
        if (s.ma.empty() && kv.count("theta")) s.ma.push_back(get("theta"));
        spec = s;
    } else if (family == "arfima") {
        spec = ArfimaSpec{get("phi", 0.0), get("d"), get("theta", 0.0)};
    } else if (family == "larch101") {
        LarchSpec s;
        s.kind = LarchKind::Short101;
        s.alpha = get("alpha", 0.1);
        s.phi = get("phi", 0.1);
        s.theta = get("theta", 0.2);
        s.rescale = get("rescale", 0.0) != 0.0;
        spec = s;
    } else if (family == "larch0d0") {
        LarchSpec s;
        s.kind = LarchKind::Long0d0;
        s.alpha = get("alpha", 0.1);
        s.d = get("d");
        s.rescale = get("rescale", 0.0) != 0.0;
        spec = s;
    } else {
        throw Error(ErrorKind::ParseError, where, "unknown process family '" + family + "'");
    }
    if (used != kv.size()) throw Error(ErrorKind::ParseError, where, "unrecognized key in '" + text + "'");
    validate(spec);
    return spec;
}

}  // namespace longmem::io
