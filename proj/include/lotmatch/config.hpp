#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lotmatch/info.hpp"
#include "lotmatch/market.hpp"

namespace lotmatch {

// Key/value configuration text with [section] headers, '#' comments, and one
// "key = value" per line. Section and key order is preserved; duplicate sections
// are allowed (each [type <label>] describes one utility type).
struct ConfigFile {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;

        const std::string* find(const std::string& key) const {
            for (const auto& [k, v] : entries)
                if (k == key) return &v;
            return nullptr;
        }
        std::string require(const std::string& key) const {
            const std::string* v = find(key);
            if (!v) throw std::invalid_argument("missing key '" + key + "' in [" + name + "]");
            return *v;
        }
        std::string get(const std::string& key, const std::string& fallback) const {
            const std::string* v = find(key);
            return v ? *v : fallback;
        }
    };
    std::vector<Section> sections;

    const Section* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    const Section& require(const std::string& name) const {
        const Section* s = find(name);
        if (!s) throw std::invalid_argument("missing [" + name + "] section");
        return *s;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

}  // namespace detail

inline ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            cfg.sections.push_back({detail::trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos || cfg.sections.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value' inside a section");
        cfg.sections.back().entries.emplace_back(detail::trim(line.substr(0, eq)),
                                                 detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline std::string school_label(int s) { return std::string(1, static_cast<char>('A' + s)); }

inline int school_from_label(const std::string& label, int schools) {
    if (label.size() == 1 && label[0] >= 'A' && label[0] < 'A' + schools) return label[0] - 'A';
    throw std::invalid_argument("unknown school label '" + label + "'");
}

/// Reads a [market] section plus its [type <label>] sections.
///
///   [market]
///   students = 6
///   capacities = 2,2,2
///   rol_limit = 1
///   neighborhoods = 1:A,2:B,3:C        # 1-based student id : school label
///   # utility_ranges = 81-100,61-80,41-60,21-40   # instead of [type ...] sections
///
///   [type v]
///   prob = 2/3
///   utilities = 90,40,20
inline Market market_from_config(const ConfigFile& cfg) {
    const auto& sec = cfg.require("market");
    Market mkt;
    mkt.n = std::stoi(sec.require("students"));
    for (const auto& c : detail::split(sec.require("capacities"), ','))
        mkt.capacity.push_back(std::stoi(c));
    mkt.rol_limit = std::stoi(sec.get("rol_limit", "1"));
    mkt.neighborhood.assign(mkt.n, kNoSchool);
    if (const std::string* nb = sec.find("neighborhoods"); nb && !nb->empty()) {
        for (const auto& pair : detail::split(*nb, ',')) {
            auto colon = pair.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("neighborhoods expects 'id:School' pairs");
            int student = std::stoi(pair.substr(0, colon)) - 1;
            if (student < 0 || student >= mkt.n)
                throw std::invalid_argument("neighborhood student id out of range");
            mkt.neighborhood[student] =
                school_from_label(detail::trim(pair.substr(colon + 1)), mkt.schools());
        }
    }
    if (const std::string* ranges = sec.find("utility_ranges"); ranges && !ranges->empty()) {
        for (const auto& r : detail::split(*ranges, ',')) {
            auto dash = r.find('-');
            if (dash == std::string::npos)
                throw std::invalid_argument("utility_ranges expects 'lo-hi' entries");
            mkt.utility_ranges.emplace_back(std::stoi(r.substr(0, dash)),
                                            std::stoi(r.substr(dash + 1)));
        }
    }
    for (const auto& section : cfg.sections) {
        if (section.name.rfind("type ", 0) != 0) continue;
        UtilityType t;
        t.label = detail::trim(section.name.substr(5));
        t.prob = parse_rational(section.require("prob"));
        for (const auto& u : detail::split(section.require("utilities"), ','))
            t.utilities.push_back(std::stoi(u));
        mkt.types.push_back(std::move(t));
    }
    mkt.validate();
    return mkt;
}

/// One run of the experiment protocol: how many sessions to simulate, the
/// per-session shape, the seed, and what rule fills in the decisions.
struct SessionConfig {
    std::optional<Treatment> treatment;  // the five main treatments
    bool robustness = false;             // the 16-student, 4-school environment
    Policy policy = Policy::Cover;       // used when robustness = true
    int rol_limit = 1;                   // used when robustness = true
    int sessions = 1;
    int participants = 12;
    int group_size = 6;
    int rounds = 20;
    std::uint64_t seed = 0;
    std::string strategy = "equilibrium";  // equilibrium | none | naive-best |
                                           // neighborhood-first | quartile

    void validate() const {
        if (!robustness && !treatment)
            throw std::invalid_argument("session needs a treatment or robustness = true");
        if (sessions < 1 || rounds < 1) throw std::invalid_argument("sessions and rounds >= 1");
        if (group_size < 1 || participants % group_size != 0)
            throw std::invalid_argument("participants must divide into equal groups");
    }
};

/// The 16-student, 4-school draw-based environment: four seats per school, no
/// school-A neighborhood, two residents for each of B, C and D, uniform integer
/// payoff draws per school band.
inline Market robustness_market(int rol_limit) {
    Market mkt;
    mkt.n = 16;
    mkt.capacity = {4, 4, 4, 4};
    mkt.neighborhood.assign(16, kNoSchool);
    mkt.neighborhood[0] = mkt.neighborhood[1] = 1;  // IDs 1,2 -> B
    mkt.neighborhood[2] = mkt.neighborhood[3] = 2;  // IDs 3,4 -> C
    mkt.neighborhood[4] = mkt.neighborhood[5] = 3;  // IDs 5,6 -> D
    mkt.rol_limit = rol_limit;
    mkt.utility_ranges = {{81, 100}, {61, 80}, {41, 60}, {21, 40}};
    mkt.validate();
    return mkt;
}

inline Market session_market(const SessionConfig& cfg) {
    if (cfg.robustness) return robustness_market(cfg.rol_limit);
    return treatment_market(*cfg.treatment);
}

inline Policy session_policy(const SessionConfig& cfg) {
    return cfg.robustness ? cfg.policy : treatment_policy(*cfg.treatment);
}

inline SessionConfig session_from_config(const ConfigFile& cfg) {
    const auto& sec = cfg.require("session");
    SessionConfig sc;
    sc.robustness = sec.get("robustness", "false") == "true";
    if (const std::string* t = sec.find("treatment"); t && !t->empty())
        sc.treatment = parse_treatment(*t);
    if (sc.robustness) {
        sc.policy = parse_policy(sec.get("policy", "Reveal"));
        sc.rol_limit = std::stoi(sec.get("rol_limit", "1"));
        sc.participants = std::stoi(sec.get("participants", "16"));
        sc.group_size = std::stoi(sec.get("group_size", "16"));
    } else {
        sc.participants = std::stoi(sec.get("participants", "12"));
        sc.group_size = std::stoi(sec.get("group_size", "6"));
    }
    sc.sessions = std::stoi(sec.get("sessions", "1"));
    sc.rounds = std::stoi(sec.get("rounds", "20"));
    sc.seed = std::stoull(sec.get("seed", "0"));
    sc.strategy = sec.get("strategy", "equilibrium");
    sc.validate();
    return sc;
}

}  // namespace lotmatch
