#pragma once

// CSV rows and JSON summaries for study runs.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace qkin {

inline const char* kCsvHeader = "study,term,epsilon,t,value,stderr,limit_value,n_samples,seed,wall_time_s";
inline const char* kSummarySchema = "1";

struct ReportRow {
    std::string study;
    std::string term;
    double epsilon = 0.0;
    double t = 0.0;
    double value = 0.0;
    double std_error = 0.0;
    double limit_value = std::numeric_limits<double>::quiet_NaN();
    long long n_samples = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct StudySummary {
    std::string study;
    std::vector<Criterion> criteria;
    nlohmann::json extra = nlohmann::json::object();

    bool pass() const {
        for (const auto& c : criteria)
            if (!c.pass) return false;
        return true;
    }
};

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string csv_line(const ReportRow& r) {
    std::ostringstream os;
    os << r.study << ',' << r.term << ',' << format_double(r.epsilon) << ',' << format_double(r.t) << ','
       << format_double(r.value) << ',' << format_double(r.std_error) << ',' << format_double(r.limit_value) << ','
       << r.n_samples << ',' << r.seed << ',' << format_double(r.wall_time_s);
    return os.str();
}

inline void write_csv(const std::vector<ReportRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << kCsvHeader << '\n';
    for (const auto& r : rows) os << csv_line(r) << '\n';
    if (!os) throw IoError("write failed for " + path);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::vector<ReportRow> read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read " + path);
    std::string line;
    std::getline(is, line);
    if (line != kCsvHeader) throw IoError("unexpected CSV header in " + path);
    std::vector<ReportRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 10) throw IoError("malformed CSV row in " + path);
        ReportRow r;
        r.study = f[0];
        r.term = f[1];
        r.epsilon = std::stod(f[2]);
        r.t = std::stod(f[3]);
        r.value = std::stod(f[4]);
        r.std_error = std::stod(f[5]);
        r.limit_value = std::stod(f[6]);
        r.n_samples = std::stoll(f[7]);
        r.seed = std::stoull(f[8]);
        r.wall_time_s = std::stod(f[9]);
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json summary_json(const StudySummary& s) {
    nlohmann::json j;
    j["schema"] = kSummarySchema;
    j["study"] = s.study;
    j["pass"] = s.pass();
    j["criteria"] = nlohmann::json::array();
    for (const auto& c : s.criteria) j["criteria"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    if (!s.extra.empty()) j["extra"] = s.extra;
    return j;
}

inline void write_summary(const StudySummary& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << summary_json(s).dump(2) << '\n';
}

// <prefix>.csv and <prefix>.json
inline void emit_report(const std::vector<ReportRow>& rows, const StudySummary& s, const std::string& prefix) {
    write_csv(rows, prefix + ".csv");
    write_summary(s, prefix + ".json");
}

}  // namespace qkin
