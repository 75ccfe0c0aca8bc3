#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lotmatch/config.hpp"
#include "lotmatch/market.hpp"

namespace lotmatch {

/// One student-round decision. Mirrors the CSV schema:
///   session,round,group,student_id,neighborhood_school,type_label,u1..um,lottery_rank,rol
/// plus optional assigned,payoff. student_id is 1-based; schools are letter labels;
/// '-' stands for "no neighborhood school" / "unmatched"; rol entries are separated
/// by '|'. Unplayed world logs leave rol empty.
struct DecisionRow {
    int session = 1;
    int round = 1;
    int group = 1;
    int student_id = 1;  // 1-based
    int neighborhood_school = kNoSchool;
    std::string type_label;
    std::vector<int> utilities;
    int lottery_rank = 0;
    Rol rol;
    std::optional<int> assigned;  // kUnmatched for a recorded non-admission
    std::optional<int> payoff;
};

struct DecisionLog {
    int schools = 0;
    bool has_outcomes = false;  // assigned,payoff columns present
    std::vector<DecisionRow> rows;
};

namespace detail {

inline std::string rol_to_string(const Rol& rol, int schools) {
    std::string out;
    for (std::size_t k = 0; k < rol.size(); ++k) {
        if (k) out += '|';
        if (rol[k] < 0 || rol[k] >= schools) throw std::invalid_argument("rol entry out of range");
        out += school_label(rol[k]);
    }
    return out;
}

inline Rol rol_from_string(const std::string& s, int schools) {
    Rol rol;
    if (s.empty()) return rol;
    for (const auto& part : split(s, '|')) rol.push_back(school_from_label(part, schools));
    return rol;
}

}  // namespace detail

inline std::string log_header(int schools, bool has_outcomes) {
    std::string h = "session,round,group,student_id,neighborhood_school,type_label";
    for (int s = 1; s <= schools; ++s) h += ",u" + std::to_string(s);
    h += ",lottery_rank,rol";
    if (has_outcomes) h += ",assigned,payoff";
    return h;
}

/// Canonical CSV bytes: header, then rows sorted by (session, round, group, student),
/// LF line endings. Output for a fixed config+seed is reproducible bit for bit.
inline void write_log(const DecisionLog& log, std::ostream& out) {
    out << log_header(log.schools, log.has_outcomes) << "\n";
    for (const auto& r : log.rows) {
        out << r.session << ',' << r.round << ',' << r.group << ',' << r.student_id << ','
            << (r.neighborhood_school == kNoSchool ? "-" : school_label(r.neighborhood_school))
            << ',' << r.type_label;
        for (int u : r.utilities) out << ',' << u;
        out << ',' << r.lottery_rank << ',' << detail::rol_to_string(r.rol, log.schools);
        if (log.has_outcomes) {
            out << ',';
            if (r.assigned) out << (*r.assigned == kUnmatched ? "-" : school_label(*r.assigned));
            out << ',';
            if (r.payoff) out << *r.payoff;
        }
        out << "\n";
    }
}

inline std::string log_to_string(const DecisionLog& log) {
    std::ostringstream out;
    write_log(log, out);
    return out.str();
}

inline void save_log(const DecisionLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // keep LF endings everywhere
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    write_log(log, out);
}

inline DecisionLog parse_log(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("empty decision log");
    if (!header.empty() && header.back() == '\r') header.pop_back();

    DecisionLog log;
    int schools = 0;
    while (true) {
        std::string probe = log_header(schools + 1, false);
        std::string probe_out = log_header(schools + 1, true);
        if (header == probe) {
            log.schools = schools + 1;
            log.has_outcomes = false;
            break;
        }
        if (header == probe_out) {
            log.schools = schools + 1;
            log.has_outcomes = true;
            break;
        }
        if (++schools > 26) throw std::invalid_argument("unrecognized decision log header");
    }

    const int expected = 8 + log.schools + (log.has_outcomes ? 2 : 0);
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split(line, ',');
        if (static_cast<int>(fields.size()) != expected)
            throw std::invalid_argument("log line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(expected) + " fields, got " +
                                        std::to_string(fields.size()));
        DecisionRow r;
        int f = 0;
        try {
            r.session = std::stoi(fields[f++]);
            r.round = std::stoi(fields[f++]);
            r.group = std::stoi(fields[f++]);
            r.student_id = std::stoi(fields[f++]);
            const std::string& nb = fields[f++];
            r.neighborhood_school = nb == "-" ? kNoSchool : school_from_label(nb, log.schools);
            r.type_label = fields[f++];
            for (int s = 0; s < log.schools; ++s) r.utilities.push_back(std::stoi(fields[f++]));
            r.lottery_rank = std::stoi(fields[f++]);
            r.rol = detail::rol_from_string(fields[f++], log.schools);
            if (log.has_outcomes) {
                const std::string& a = fields[f++];
                if (!a.empty())
                    r.assigned = a == "-" ? kUnmatched : school_from_label(a, log.schools);
                const std::string& p = fields[f++];
                if (!p.empty()) r.payoff = std::stoi(p);
            }
        } catch (const std::exception& e) {
            throw std::invalid_argument("log line " + std::to_string(lineno) + ": " + e.what());
        }
        log.rows.push_back(std::move(r));
    }
    return log;
}

inline DecisionLog load_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open log file '" + path + "'");
    return parse_log(in);
}

}  // namespace lotmatch
