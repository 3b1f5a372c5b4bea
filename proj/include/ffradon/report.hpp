#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef FFRADON_BUILD_TAG
#define FFRADON_BUILD_TAG "v0-dev"
#endif

namespace ffradon {

/// One report record. json-lines is the primary format; csv is a flat
/// projection with the documented column order (config_hash and build are
/// appended after the fixed columns).
struct ReportRow {
    std::string cmd;
    std::uint32_t q = 0;
    int d = 0, k = 0;
    std::string p, r;
    std::string method;
    double value = 0;
    std::string witness;
    bool exhaustive = false;
    std::uint64_t seed = 0;
    double elapsed_ms = 0;
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& s) {
    bool needs = s.find_first_of(",\"\n") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

/// Collects rows and serializes them in insertion order, so output bytes do
/// not depend on the thread count used to compute them.
class ReportSink {
public:
    ReportSink(std::string config_hash, std::string build_tag)
        : config_hash_(std::move(config_hash)), build_tag_(std::move(build_tag)) {}

    void add(ReportRow row) { rows_.push_back(std::move(row)); }
    const std::vector<ReportRow>& rows() const { return rows_; }

    void write_json_lines(std::ostream& os) const {
        for (const auto& row : rows_) {
            nlohmann::ordered_json j;
            j["schema"] = "ffradon/1";
            j["cmd"] = row.cmd;
            j["q"] = row.q;
            j["d"] = row.d;
            j["k"] = row.k;
            j["p"] = row.p;
            j["r"] = row.r;
            j["method"] = row.method;
            j["value"] = row.value;
            j["witness"] = row.witness;
            j["exhaustive"] = row.exhaustive;
            j["seed"] = row.seed;
            j["elapsed_ms"] = row.elapsed_ms;
            j["config_hash"] = config_hash_;
            j["build"] = build_tag_;
            os << j.dump() << "\n";
        }
    }

    void write_csv(std::ostream& os) const {
        os << "schema,cmd,q,d,k,p,r,method,value,witness,exhaustive,seed,elapsed_ms,"
              "config_hash,build\n";
        for (const auto& row : rows_) {
            os << "ffradon/1," << csv_escape(row.cmd) << "," << row.q << "," << row.d << ","
               << row.k << "," << csv_escape(row.p) << "," << csv_escape(row.r) << ","
               << csv_escape(row.method) << "," << format_double(row.value) << ","
               << csv_escape(row.witness) << "," << (row.exhaustive ? "true" : "false") << ","
               << row.seed << "," << format_double(row.elapsed_ms) << "," << config_hash_ << ","
               << build_tag_ << "\n";
        }
    }

private:
    std::string config_hash_;
    std::string build_tag_;
    std::vector<ReportRow> rows_;
};

} // namespace ffradon
