#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "marlsim/common.hpp"
#include "marlsim/eval.hpp"
#include "marlsim/marl.hpp"
#include "marlsim/version.hpp"

namespace {

using namespace marlsim;

Scenario resolve_scenario(const std::string& spec) {
    if (spec == "toyctf") return builtin_toyctf();
    if (spec == "tiny") return builtin_tiny();
    std::ifstream in(spec, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + spec + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return load_scenario(text.str());
}

InvalidActionMode resolve_mode(const std::string& name, double penalty) {
    if (name == "penalty") return InvalidActionMode::penalty_mode(penalty);
    if (name == "passthrough") return InvalidActionMode::pass_through();
    if (name == "zero") return InvalidActionMode::zero_reward();
    throw ConfigError("unknown invalid-mode '" + name +
                      "' (expected penalty, passthrough, zero)");
}

struct TrainArgs {
    std::string scenario = "toyctf";
    std::string red = "none";
    std::string blue = "none";
    std::int64_t timesteps = 300000;
    int episode_len = 2000;
    std::string invalid_mode = "zero";
    double invalid_penalty = -1.0;
    double availability = 0.6;
    double availability_penalty = -5000.0;
    bool no_reset = false;
    bool stop_on_ownership = false;
    std::uint64_t seed = 0;
    std::string out = ".";
};

int run_train(const TrainArgs& a) {
    TrainConfig cfg;
    cfg.scenario = resolve_scenario(a.scenario);
    cfg.scenario_name = a.scenario;
    cfg.total_timesteps = a.timesteps;
    cfg.max_episode_len = a.episode_len;
    cfg.availability_threshold = a.availability;
    cfg.availability_penalty = a.availability_penalty;
    cfg.invalid_mode = resolve_mode(a.invalid_mode, a.invalid_penalty);
    cfg.no_reset = a.no_reset;
    cfg.stop_on_full_ownership = a.stop_on_ownership;
    cfg.red_algo = algo_from_string(a.red);
    cfg.blue_algo = algo_from_string(a.blue);
    cfg.seed = a.seed;

    std::filesystem::create_directories(a.out);
    if (algo_learnable(cfg.red_algo))
        cfg.red_checkpoint = a.out + "/red_" + algo_name(cfg.red_algo) + ".ckpt";
    if (algo_learnable(cfg.blue_algo))
        cfg.blue_checkpoint = a.out + "/blue_" + algo_name(cfg.blue_algo) + ".ckpt";

    const TrainResult result = train(cfg);
    write_curve_csv(a.out + "/curve.csv", result.curve);
    write_manifest(a.out + "/manifest.json", cfg);

    const auto& last = result.curve.episodes;
    double red_total = 0.0, blue_total = 0.0;
    for (const auto& e : last) {
        red_total += e.red_reward;
        blue_total += e.blue_reward;
    }
    std::printf("trained %s vs %s: %lld timesteps, %zu episodes\n", algo_name(cfg.red_algo),
                algo_name(cfg.blue_algo), static_cast<long long>(cfg.total_timesteps),
                last.size());
    if (!last.empty()) {
        std::printf("mean episode reward: red %.10g, blue %.10g\n",
                    red_total / static_cast<double>(last.size()),
                    blue_total / static_cast<double>(last.size()));
    }
    if (!cfg.red_checkpoint.empty()) std::printf("red checkpoint: %s\n", cfg.red_checkpoint.c_str());
    if (!cfg.blue_checkpoint.empty())
        std::printf("blue checkpoint: %s\n", cfg.blue_checkpoint.c_str());
    std::printf("curve: %s/curve.csv\nmanifest: %s/manifest.json\n", a.out.c_str(),
                a.out.c_str());
    return 0;
}

struct EvalArgs {
    std::string scenario = "toyctf";
    std::string red = "basic";
    std::string blue = "none";
    int episodes = 25;
    int episode_len = 2000;
    std::string invalid_mode = "zero";
    double invalid_penalty = -1.0;
    double availability = 0.6;
    double availability_penalty = -5000.0;
    bool no_reset = false;
    bool stop_on_ownership = false;
    std::uint64_t seed = 0;
    std::string out = ".";
    std::string format = "csv";
    bool parallel = false;
};

int run_eval(const EvalArgs& a) {
    if (a.format != "csv" && a.format != "json")
        throw ConfigError("unknown format '" + a.format + "' (expected csv or json)");
    EvalConfig cfg;
    cfg.scenario = resolve_scenario(a.scenario);
    cfg.scenario_name = a.scenario;
    cfg.red_source = a.red;
    cfg.blue_source = a.blue;
    cfg.episodes = a.episodes;
    cfg.max_episode_len = a.episode_len;
    cfg.availability_threshold = a.availability;
    cfg.availability_penalty = a.availability_penalty;
    cfg.invalid_mode = resolve_mode(a.invalid_mode, a.invalid_penalty);
    cfg.no_reset = a.no_reset;
    cfg.stop_on_full_ownership = a.stop_on_ownership;
    cfg.seed = a.seed;
    cfg.parallel = a.parallel;

    const EvalReport report = evaluate(cfg);
    std::filesystem::create_directories(a.out);
    write_report_files(a.out, report);
    if (a.format == "json")
        std::fputs(report_json(report).c_str(), stdout);
    else
        std::fputs(report_csv(report).c_str(), stdout);
    return 0;
}

int run_scenario_validate(const std::string& path) {
    const Scenario s = resolve_scenario(path);
    std::printf("OK: %d nodes, %d credentials, %d ports, %d vulnerabilities\n", s.node_count(),
                s.credential_count(), s.port_count(), s.vuln_count());
    return 0;
}

int run_scenario_show(const std::string& spec) {
    const Scenario s = resolve_scenario(spec);
    std::fputs(serialize_scenario(s).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyber-battle simulator: red/blue training and evaluation"};
    app.set_version_flag("--version", std::string(marlsim::kToolVersion));
    app.require_subcommand(1);

    TrainArgs ta;
    CLI::App* trainc = app.add_subcommand("train", "train agents and export the curve");
    trainc->add_option("--scenario", ta.scenario, "scenario: toyctf, tiny, or a JSON file path");
    trainc->add_option("--red", ta.red, "red algorithm: none, basic, tabular_q, a2c, ppo");
    trainc->add_option("--blue", ta.blue, "blue algorithm: none, basic, tabular_q, a2c, ppo");
    trainc->add_option("--timesteps", ta.timesteps, "total environment timesteps");
    trainc->add_option("--episode-len", ta.episode_len, "maximum episode length");
    trainc->add_option("--invalid-mode", ta.invalid_mode,
                       "invalid attacker action handling: penalty, passthrough, zero");
    trainc->add_option("--invalid-penalty", ta.invalid_penalty,
                       "penalty amount for --invalid-mode penalty");
    trainc->add_option("--availability", ta.availability, "availability threshold");
    trainc->add_option("--availability-penalty", ta.availability_penalty,
                       "reward added to blue on an availability violation");
    trainc->add_flag("--no-reset", ta.no_reset,
                     "availability violations penalize without ending the episode");
    trainc->add_flag("--stop-on-ownership", ta.stop_on_ownership,
                     "end episodes once red owns every node");
    trainc->add_option("--seed", ta.seed, "base RNG seed");
    trainc->add_option("--out", ta.out, "output directory");

    EvalArgs ea;
    CLI::App* evalc = app.add_subcommand("eval", "evaluate a matchup without learning");
    evalc->add_option("--scenario", ea.scenario, "scenario: toyctf, tiny, or a JSON file path");
    evalc->add_option("--red", ea.red, "red source: checkpoint path, basic, or none");
    evalc->add_option("--blue", ea.blue, "blue source: checkpoint path, basic, or none");
    evalc->add_option("--episodes", ea.episodes, "episode count");
    evalc->add_option("--episode-len", ea.episode_len, "maximum episode length");
    evalc->add_option("--invalid-mode", ea.invalid_mode,
                      "invalid attacker action handling: penalty, passthrough, zero");
    evalc->add_option("--invalid-penalty", ea.invalid_penalty,
                      "penalty amount for --invalid-mode penalty");
    evalc->add_option("--availability", ea.availability, "availability threshold");
    evalc->add_option("--availability-penalty", ea.availability_penalty,
                      "reward added to blue on an availability violation");
    evalc->add_flag("--no-reset", ea.no_reset,
                    "availability violations penalize without ending the episode");
    evalc->add_flag("--stop-on-ownership", ea.stop_on_ownership,
                    "end episodes once red owns every node");
    evalc->add_option("--seed", ea.seed, "base RNG seed");
    evalc->add_option("--out", ea.out, "output directory for report.csv/report.json");
    evalc->add_option("--format", ea.format, "stdout format: csv or json");
    evalc->add_flag("--parallel", ea.parallel, "run episodes in parallel");

    CLI::App* scen = app.add_subcommand("scenario", "scenario utilities");
    scen->require_subcommand(1);
    std::string validate_path, show_spec;
    CLI::App* vsub = scen->add_subcommand("validate", "check a scenario file");
    vsub->add_option("path", validate_path, "scenario JSON file")->required();
    CLI::App* ssub = scen->add_subcommand("show", "print a scenario as JSON");
    ssub->add_option("path", show_spec, "scenario: toyctf, tiny, or a JSON file path")
        ->required();

    try {
        app.parse(argc, argv);
        if (*trainc) return run_train(ta);
        if (*evalc) return run_eval(ea);
        if (*vsub) return run_scenario_validate(validate_path);
        if (*ssub) return run_scenario_show(show_spec);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const marlsim::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const marlsim::CorruptFile& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const marlsim::VersionMismatch& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
