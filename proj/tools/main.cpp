#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "lotmatch/lotmatch.hpp"

using nlohmann::json;
using namespace lotmatch;

namespace {

std::string role_name(int role) { return role == kNoSchool ? "-" : school_label(role); }

std::string pct(const Rational& r) { return to_decimal_string(r * 100); }

json cell_json(const Market& market, const GroupOutcome& cell) {
    json j;
    j["match_rate"] = to_fraction_string(cell.match_rate);
    j["match_rate_pct_2dp"] = pct(cell.match_rate);
    j["expected_payoff"] = to_fraction_string(cell.expected_payoff);
    j["expected_payoff_2dp"] = to_decimal_string(cell.expected_payoff);
    json dist;
    for (int s = 0; s < market.schools(); ++s) {
        dist[school_label(s)] = to_fraction_string(cell.assignment[s]);
    }
    dist["unmatched"] = to_fraction_string(cell.assignment.back());
    j["assignment"] = dist;
    if (cell.observations) j["observations"] = cell.observations;
    return j;
}

void cell_csv(std::ostream& out, const Market& market, const std::string& group,
              const GroupOutcome& cell) {
    out << group << ",match_rate," << to_fraction_string(cell.match_rate) << "," << pct(cell.match_rate)
        << "\n";
    out << group << ",expected_payoff," << to_fraction_string(cell.expected_payoff) << ","
        << to_decimal_string(cell.expected_payoff) << "\n";
    for (int s = 0; s < market.schools(); ++s)
        out << group << ",P(" << school_label(s) << ")," << to_fraction_string(cell.assignment[s])
            << "," << pct(cell.assignment[s]) << "\n";
    out << group << ",P(unmatched)," << to_fraction_string(cell.assignment.back()) << ","
        << pct(cell.assignment.back()) << "\n";
}

std::string type_name(const Market& market, int t) {
    if (t < 0 || t >= static_cast<int>(market.types.size())) return "rand";
    return market.types[t].label;
}

void render_stats(std::ostream& out, const Market& market, const OutcomeStats& stats,
                  const std::string& format) {
    if (format == "json") {
        json j;
        if (stats.mc) {
            j["mode"] = "montecarlo";
            j["seed"] = stats.mc->seed;
            j["reps"] = stats.mc->reps;
        } else {
            j["mode"] = "exact";
        }
        j["aggregate"] = cell_json(market, stats.aggregate);
        for (const auto& [role, cell] : stats.by_role)
            j["by_role"][role_name(role)] = cell_json(market, cell);
        for (const auto& [t, cell] : stats.by_type)
            j["by_type"][type_name(market, t)] = cell_json(market, cell);
        for (const auto& [key, cell] : stats.by_role_type)
            j["by_role_type"][role_name(key.first) + "|" + type_name(market, key.second)] =
                cell_json(market, cell);
        if (!stats.expected_vacancies.empty()) {
            json v;
            for (int s = 0; s < market.schools(); ++s)
                v[school_label(s)] = to_fraction_string(stats.expected_vacancies[s]);
            j["expected_vacancies"] = v;
        }
        out << j.dump(2) << "\n";
        return;
    }
    if (stats.mc)
        out << "# mode=montecarlo seed=" << stats.mc->seed << " reps=" << stats.mc->reps << "\n";
    out << "group,metric,exact,value_2dp\n";
    cell_csv(out, market, "aggregate", stats.aggregate);
    for (const auto& [t, cell] : stats.by_type)
        cell_csv(out, market, "type:" + type_name(market, t), cell);
    for (const auto& [role, cell] : stats.by_role) cell_csv(out, market, "role:" + role_name(role), cell);
    for (const auto& [key, cell] : stats.by_role_type)
        cell_csv(out, market,
                 "role:" + role_name(key.first) + "|type:" + type_name(market, key.second), cell);
    for (std::size_t s = 0; s < stats.expected_vacancies.size(); ++s)
        out << "aggregate,vacancies(" << school_label(static_cast<int>(s)) << "),"
            << to_fraction_string(stats.expected_vacancies[s]) << ","
            << to_decimal_string(stats.expected_vacancies[s]) << "\n";
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << content;
}

Lottery parse_lottery_arg(const std::string& arg, int n) {
    Lottery lottery;
    for (const auto& part : detail::split(arg, ',')) lottery.push_back(std::stoi(part));
    if (static_cast<int>(lottery.size()) != n)
        throw std::invalid_argument("lottery needs one rank per student");
    return lottery;
}

std::vector<Rational> parse_rational_list(const std::string& arg) {
    std::vector<Rational> out;
    for (const auto& part : detail::split(arg, ',')) out.push_back(parse_rational(part));
    return out;
}

std::string rol_text(const Rol& rol) {
    std::string s;
    for (std::size_t k = 0; k < rol.size(); ++k) {
        if (k) s += "|";
        s += school_label(rol[k]);
    }
    return s;
}

int cmd_simulate(const std::string& config_path, const std::string& log_path,
                 const std::string& stats_path, const std::string& format) {
    auto cfg = session_from_config(load_config(config_path));
    Market market = session_market(cfg);
    DecisionLog log = generate_sessions(cfg);
    save_log(log, log_path);
    std::cout << "wrote " << log.rows.size() << " rows to " << log_path << " (seed " << cfg.seed
              << ")\n";
    if (log.has_outcomes) {
        ReplayResult rr = replay(market, log);
        std::ostringstream out;
        render_stats(out, market, rr.realized, format);
        if (!stats_path.empty()) {
            write_or_print(stats_path, out.str());
            if (stats_path != "-") std::cout << "wrote stats to " << stats_path << "\n";
        }
        std::cout << "realized match rate " << pct(rr.realized.aggregate.match_rate)
                  << "%, mean payoff " << to_decimal_string(rr.realized.aggregate.expected_payoff)
                  << "\n";
    } else {
        std::cout << "world log only (no strategy); replay after filling in decisions\n";
    }
    return 0;
}

int cmd_verify(const std::string& treatment_arg, const std::string& market_path,
               const std::string& profile_name, bool as_json) {
    Market market;
    StrategyProfile profile;
    std::string label;
    if (!treatment_arg.empty()) {
        Treatment t = parse_treatment(treatment_arg);
        market = treatment_market(t);
        profile = equilibrium_table(t);
        label = treatment_arg;
    } else {
        market = market_from_config(load_config(market_path));
        if (profile_name == "rank-block") {
            profile.policy = Policy::Reveal;
            Market copy = market;
            profile.act = [copy](int, const InfoSet& info) -> Rol {
                return {rank_block_school(copy, info.own_rank.value())};
            };
        } else if (profile_name == "cutoff") {
            profile = cutoff_profile(market);
        } else {
            throw std::invalid_argument("profile must be 'rank-block' or 'cutoff'");
        }
        label = profile_name + "@" + market_path;
    }
    DeviationReport report = verify_bne(market, profile.policy, profile);
    auto violations = report.violations();
    if (as_json) {
        json j;
        j["profile"] = label;
        j["is_bne"] = report.is_bne;
        j["classes_checked"] = report.entries.size();
        j["max_gain"] = to_fraction_string(report.max_gain);
        json v = json::array();
        for (const auto* e : violations) {
            json one;
            one["student_id"] = e->student + 1;
            one["role"] = role_name(e->role);
            one["type"] = market.types[e->type_index].label;
            if (e->info.own_rank) one["own_rank"] = *e->info.own_rank;
            one["prescribed"] = rol_text(e->response.prescribed);
            one["best"] = rol_text(e->response.best);
            one["gain"] = to_fraction_string(e->response.gain);
            v.push_back(one);
        }
        j["violations"] = v;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << label << ": " << (report.is_bne ? "BNE (all gains <= 0)" : "NOT a BNE")
                  << ", " << report.entries.size() << " classes checked, max gain "
                  << to_fraction_string(report.max_gain) << "\n";
        for (const auto* e : violations)
            std::cout << "  student " << e->student + 1 << " (role " << role_name(e->role)
                      << ", type " << market.types[e->type_index].label
                      << (e->info.own_rank ? ", rank " + std::to_string(*e->info.own_rank) : "")
                      << "): prescribed " << rol_text(e->response.prescribed) << " ("
                      << to_fraction_string(e->response.prescribed_value) << "), better "
                      << rol_text(e->response.best) << " ("
                      << to_fraction_string(e->response.best_value) << "), gain "
                      << to_fraction_string(e->response.gain) << "\n";
    }
    return report.is_bne ? 0 : 1;
}

int cmd_stats(const std::string& treatment_arg, const std::string& format, long long mc_reps,
              std::uint64_t seed, const std::string& out_path) {
    Treatment t = parse_treatment(treatment_arg);
    Market market = treatment_market(t);
    StatsMode mode = ExactMode{};
    if (mc_reps > 0) mode = MonteCarloMode{seed, mc_reps};
    OutcomeStats stats = exante_stats(market, treatment_policy(t), equilibrium_table(t), mode);
    std::ostringstream out;
    render_stats(out, market, stats, format);
    write_or_print(out_path, out.str());
    return 0;
}

int cmd_replay(const std::string& log_path, const std::string& treatment_arg, bool robustness,
               int rol_limit, const std::string& market_path, const std::string& format,
               const std::string& out_path) {
    Market market;
    if (!treatment_arg.empty())
        market = treatment_market(parse_treatment(treatment_arg));
    else if (robustness)
        market = robustness_market(rol_limit);
    else if (!market_path.empty())
        market = market_from_config(load_config(market_path));
    else
        throw std::invalid_argument("replay needs --treatment, --robustness or --market");
    DecisionLog log = load_log(log_path);
    ReplayResult rr = replay(market, log);
    std::cout << rr.groups_replayed << " group-rounds replayed, " << rr.disagreements.size()
              << " disagreement(s)\n";
    for (const auto& d : rr.disagreements) std::cout << "  " << d << "\n";
    std::ostringstream out;
    render_stats(out, market, rr.realized, format);
    write_or_print(out_path, out.str());
    return rr.clean() ? 0 : 1;
}

int cmd_aad(const std::string& log_path, const std::string& treatment_arg, bool exclude_rank5,
            const std::string& format) {
    Treatment t = parse_treatment(treatment_arg);
    Market market = treatment_market(t);
    AadOptions options;
    options.exclude_no_neighborhood_rank5 = exclude_rank5;
    AadReport report = compute_aad(t, load_log(log_path), options);
    if (format == "json") {
        json j;
        j["treatment"] = treatment_arg;
        j["rank5_excluded"] = report.rank5_excluded;
        j["overall"] = {{"rows", report.overall.rows},
                        {"deviations", report.overall.deviations},
                        {"rate", to_fraction_string(report.overall.rate())},
                        {"rate_pct_2dp", pct(report.overall.rate())}};
        json cells = json::array();
        for (const auto& [key, cell] : report.by_role_type)
            cells.push_back({{"role", role_name(key.first)},
                             {"type", market.types[key.second].label},
                             {"rows", cell.rows},
                             {"deviations", cell.deviations},
                             {"rate_pct_2dp", pct(cell.rate())}});
        for (const auto& [key, cell] : report.by_role_rank)
            cells.push_back({{"role", role_name(key.first)},
                             {"own_rank", key.second},
                             {"rows", cell.rows},
                             {"deviations", cell.deviations},
                             {"rate_pct_2dp", pct(cell.rate())}});
        j["cells"] = cells;
        j["unreachable_rows"] = report.unreachable;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "cell,rows,deviations,rate_pct_2dp\n";
        std::cout << "overall," << report.overall.rows << "," << report.overall.deviations << ","
                  << pct(report.overall.rate()) << "\n";
        for (const auto& [key, cell] : report.by_role_type)
            std::cout << "role:" << role_name(key.first) << "|type:" << market.types[key.second].label
                      << "," << cell.rows << "," << cell.deviations << "," << pct(cell.rate())
                      << "\n";
        for (const auto& [key, cell] : report.by_role_rank)
            std::cout << "role:" << role_name(key.first) << "|rank:" << key.second << ","
                      << cell.rows << "," << cell.deviations << "," << pct(cell.rate()) << "\n";
        for (const auto& u : report.unreachable) std::cout << "# excluded " << u << "\n";
    }
    return 0;
}

int cmd_cutoffs(const std::string& treatment_arg, const std::string& market_path,
                const std::string& lottery_arg, bool continuum, const std::string& caps_arg,
                const std::string& masses_arg, bool as_json) {
    if (continuum) {
        auto caps = parse_rational_list(caps_arg);
        auto masses = masses_arg.empty()
                          ? std::vector<Rational>(caps.size(), Rational(0))
                          : parse_rational_list(masses_arg);
        auto cut = continuum_cutoffs(caps, masses);
        if (as_json) {
            json j = json::array();
            for (std::size_t k = 0; k < cut.size(); ++k)
                j.push_back({{"school", school_label(static_cast<int>(k))},
                             {"cutoff", to_fraction_string(cut[k])},
                             {"cutoff_2dp", to_decimal_string(cut[k])}});
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "school,cutoff,cutoff_2dp\n";
            for (std::size_t k = 0; k < cut.size(); ++k)
                std::cout << school_label(static_cast<int>(k)) << ","
                          << to_fraction_string(cut[k]) << "," << to_decimal_string(cut[k]) << "\n";
        }
        return 0;
    }
    Market market = !treatment_arg.empty()
                        ? treatment_market(parse_treatment(treatment_arg))
                        : market_from_config(load_config(market_path));
    Lottery lottery = parse_lottery_arg(lottery_arg, market.n);
    Cutoffs cutoffs = solve_cutoffs_revealmore(market, lottery);
    if (as_json) {
        json j;
        json c = json::array();
        for (int k = 0; k < market.schools(); ++k)
            c.push_back({{"school", school_label(k)}, {"cutoff_rank", cutoffs.ranks[k]}});
        j["cutoffs"] = c;
        json a = json::array();
        for (int i = 0; i < market.n; ++i)
            a.push_back({{"student_id", i + 1},
                         {"lottery_rank", lottery[i]},
                         {"achievable", school_label(achievable_school(market, lottery, cutoffs, i))}});
        j["achievable"] = a;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "school,cutoff_rank\n";
        for (int k = 0; k < market.schools(); ++k)
            std::cout << school_label(k) << "," << cutoffs.ranks[k] << "\n";
        std::cout << "student_id,lottery_rank,achievable\n";
        for (int i = 0; i < market.n; ++i)
            std::cout << i + 1 << "," << lottery[i] << ","
                      << school_label(achievable_school(market, lottery, cutoffs, i)) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained deferred acceptance with lottery disclosure policies"};
    app.require_subcommand(1);

    std::string config_path, log_path = "decisions.csv", stats_path, format = "csv";
    auto* simulate = app.add_subcommand("simulate", "generate synthetic sessions from a config");
    simulate->add_option("--config", config_path, "session config file")->required();
    simulate->add_option("--log", log_path, "output decision-log CSV");
    simulate->add_option("--stats", stats_path, "also write realized stats here ('-' = stdout)");
    simulate->add_option("--format", format, "stats format: csv or json");

    std::string treatment_arg, market_path, profile_name = "rank-block";
    bool as_json = false;
    auto* verify = app.add_subcommand("verify-equilibrium",
                                      "exhaustively check a profile for profitable deviations");
    verify->add_option("--treatment", treatment_arg, "one of the five treatment labels");
    verify->add_option("--market", market_path, "market config file (with --profile)");
    verify->add_option("--profile", profile_name, "rank-block or cutoff (for --market)");
    verify->add_flag("--json", as_json, "JSON output");

    std::string stats_treatment, stats_format = "csv", stats_out;
    long long mc_reps = 0;
    std::uint64_t mc_seed = 0;
    auto* stats = app.add_subcommand("stats", "equilibrium predictions for a treatment");
    stats->add_option("--treatment", stats_treatment)->required();
    stats->add_option("--format", stats_format, "csv or json");
    stats->add_option("--mc", mc_reps, "Monte Carlo replications (default: exact)");
    stats->add_option("--seed", mc_seed, "Monte Carlo seed");
    stats->add_option("--out", stats_out, "output path (default stdout)");

    std::string replay_log, replay_treatment, replay_market, replay_format = "csv", replay_out;
    bool replay_robustness = false;
    int replay_rol = 1;
    auto* rep = app.add_subcommand("replay", "re-run the mechanism over a decision log");
    rep->add_option("--log", replay_log)->required();
    rep->add_option("--treatment", replay_treatment);
    rep->add_flag("--robustness", replay_robustness, "16-student draw-based environment");
    rep->add_option("--rol-limit", replay_rol, "list length for --robustness (1 or 2)");
    rep->add_option("--market", replay_market, "market config file");
    rep->add_option("--format", replay_format, "csv or json");
    rep->add_option("--out", replay_out, "output path (default stdout)");

    std::string aad_log, aad_treatment, aad_format = "csv";
    bool aad_exclude = false;
    auto* aad = app.add_subcommand("aad", "deviations from the treatment's equilibrium table");
    aad->add_option("--log", aad_log)->required();
    aad->add_option("--treatment", aad_treatment)->required();
    aad->add_flag("--exclude-rank5", aad_exclude,
                  "drop no-neighborhood students with lottery rank 5");
    aad->add_option("--format", aad_format, "csv or json");

    std::string cut_treatment, cut_market, cut_lottery, cut_caps, cut_masses;
    bool cut_continuum = false, cut_json = false;
    auto* cut = app.add_subcommand("cutoffs", "admission cutoffs for a drawn lottery");
    cut->add_option("--treatment", cut_treatment);
    cut->add_option("--market", cut_market, "market config file");
    cut->add_option("--lottery", cut_lottery, "comma-separated ranks, one per student id");
    cut->add_flag("--continuum", cut_continuum, "evaluate the large-market formula instead");
    cut->add_option("--capacities", cut_caps, "continuum capacity masses, e.g. 1/3,1/3,1/3");
    cut->add_option("--masses", cut_masses, "continuum neighborhood masses, e.g. 1/6,1/6,1/6");
    cut->add_flag("--json", cut_json, "JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, log_path, stats_path, format);
        if (verify->parsed())
            return cmd_verify(treatment_arg, market_path, profile_name, as_json);
        if (stats->parsed())
            return cmd_stats(stats_treatment, stats_format, mc_reps, mc_seed, stats_out);
        if (rep->parsed())
            return cmd_replay(replay_log, replay_treatment, replay_robustness, replay_rol,
                              replay_market, replay_format, replay_out);
        if (aad->parsed()) return cmd_aad(aad_log, aad_treatment, aad_exclude, aad_format);
        if (cut->parsed())
            return cmd_cutoffs(cut_treatment, cut_market, cut_lottery, cut_continuum, cut_caps,
                               cut_masses, cut_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
