#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "marlsim/common.hpp"
#include "marlsim/scenario.hpp"
#include "marlsim/simcore.hpp"
#include "marlsim/wrappers.hpp"

using namespace marlsim;

namespace {
constexpr int kSsh = 1;  // tiny global port order: HTTPS=0, SSH=1
constexpr int kScanLogs = 3;

std::shared_ptr<BattleEnv> make_tiny(EnvConfig cfg = {}) {
    static const Scenario sc = builtin_tiny();
    return std::make_shared<BattleEnv>(sc, cfg);
}

std::vector<int> random_vector(std::mt19937_64& rng, const std::vector<int>& dims) {
    std::vector<int> v(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i)
        v[i] = static_cast<int>(uniform_below(rng, dims[i]));
    return v;
}

// A scenario whose attacker can never act: one owned node, no vulns, no creds.
Scenario stranded_scenario() {
    Scenario s;
    NodeSpec n;
    n.id = "X";
    n.initially_owned = true;
    n.reimagable = false;
    n.services.push_back({"SSH", true, {}});
    s.nodes.push_back(std::move(n));
    s.start_node = "X";
    s.max_nodes = 1;
    s.max_credentials = 0;
    validate_scenario(s);
    return s;
}
}  // namespace

TEST_CASE("flat action space dimensions") {
    const Scenario tiny = builtin_tiny();
    const Scenario ctf = builtin_toyctf();
    FlatActionSpace ts(tiny), cs(ctf);
    CHECK(ts.attacker_dims() == std::vector<int>{3, 3, 3, 4, 2, 2});
    CHECK(ts.defender_dims() == std::vector<int>{5, 3, 2, 2});
    CHECK(ts.attacker_flat_count() == 432);
    CHECK(ts.defender_flat_count() == 60);
    CHECK(cs.attacker_dims() == std::vector<int>{3, 12, 12, 16, 5, 10});
    CHECK(cs.defender_dims() == std::vector<int>{5, 12, 5, 2});
    CHECK(cs.attacker_flat_count() == 3LL * 12 * 12 * 16 * 5 * 10);
    CHECK(cs.defender_flat_count() == 600);
}

TEST_CASE("encode canonicalizes and decode round-trips") {
    FlatActionSpace sp(builtin_tiny());

    const AttackerAction local = AttackerAction::local(2, 3);
    CHECK(sp.encode(local) == std::vector<int>{0, 2, 0, 3, 0, 0});
    CHECK(sp.decode_attacker(sp.encode(local)) == local);
    // Unused components are ignored on decode: many encodings, one action.
    CHECK(sp.decode_attacker(std::vector<int>{0, 2, 1, 3, 1, 1}) == local);

    const AttackerAction remote = AttackerAction::remote(0, 1, 2);
    CHECK(sp.encode(remote) == std::vector<int>{1, 0, 1, 2, 0, 0});
    CHECK(sp.decode_attacker(sp.encode(remote)) == remote);

    const AttackerAction connect = AttackerAction::connect(0, 1, 1, 0);
    CHECK(sp.encode(connect) == std::vector<int>{2, 0, 1, 0, 1, 0});
    CHECK(sp.decode_attacker(sp.encode(connect)) == connect);

    const DefenderAction block = DefenderAction::block(1, 1, Direction::Outgoing);
    CHECK(sp.encode(block) == std::vector<int>{1, 1, 1, 1});
    CHECK(sp.decode_defender(sp.encode(block)) == block);
    const DefenderAction reimage = DefenderAction::reimage(2);
    CHECK(sp.encode(reimage) == std::vector<int>{0, 2, 0, 0});
    CHECK(sp.decode_defender(sp.encode(reimage)) == reimage);

    // Round-trip every currently valid structured action on both builtins.
    for (const Scenario& sc : {builtin_tiny(), builtin_toyctf()}) {
        FlatActionSpace space(sc);
        EnvState st = EnvState::reset(sc, 17);
        for (const AttackerAction& a : st.valid_attacker_actions())
            CHECK(space.decode_attacker(space.encode(a)) == a);
        for (const DefenderAction& d : st.valid_defender_actions())
            CHECK(space.decode_defender(space.encode(d)) == d);
    }
}

TEST_CASE("decode rejects out-of-range components and bad lengths") {
    FlatActionSpace sp(builtin_tiny());
    using doctest::Contains;
    CHECK_THROWS_WITH_AS(sp.decode_attacker(std::vector<int>{0, 5, 0, 0, 0, 0}),
                         Contains("source"), OutOfRange);
    CHECK_THROWS_WITH_AS(sp.decode_attacker(std::vector<int>{3, 0, 0, 0, 0, 0}),
                         Contains("action_type"), OutOfRange);
    CHECK_THROWS_WITH_AS(sp.decode_attacker(std::vector<int>{0, 0, 0, -1, 0, 0}),
                         Contains("vulnerability"), OutOfRange);
    CHECK_THROWS_WITH_AS(sp.decode_attacker(std::vector<int>{0, 0, 0}),
                         Contains("length"), OutOfRange);
    CHECK_THROWS_WITH_AS(sp.decode_defender(std::vector<int>{5, 0, 0, 0}),
                         Contains("action_type"), OutOfRange);
    CHECK_THROWS_WITH_AS(sp.decode_defender(std::vector<int>{0, 0, 0, 2}),
                         Contains("direction"), OutOfRange);
    CHECK_THROWS_WITH_AS(sp.decode_defender(std::vector<int>{0, 0, 0, 0, 0}),
                         Contains("length"), OutOfRange);
    CHECK_THROWS_AS(sp.encode(AttackerAction::local(7, 0)), OutOfRange);
    CHECK_THROWS_AS(sp.encode(DefenderAction::reimage(-1)), OutOfRange);
}

TEST_CASE("observation vectors have the documented shape and content") {
    const Scenario tiny = builtin_tiny();
    const Scenario ctf = builtin_toyctf();
    CHECK(AttackerObservation::vector_length(tiny) == 5 + kPropertyWidth + 2);
    CHECK(AttackerObservation::vector_length(ctf) == 5 + kPropertyWidth + 10);
    CHECK(DefenderObservation::vector_length(tiny) == 3 + 3 * 3 * 2);
    CHECK(DefenderObservation::vector_length(ctf) == 12 + 3 * 12 * 5);

    auto env = make_tiny();
    const auto red_obs = env->attacker_observation().pack();
    REQUIRE(static_cast<int>(red_obs.size()) == AttackerObservation::vector_length(tiny));
    CHECK(red_obs[0] == 0.0);  // nothing discovered on the last step yet
    CHECK(red_obs[3] == 1.0);  // the foothold is discovered
    CHECK(red_obs[4] == 1.0);  // ... and owned

    const auto blue_obs = env->defender_observation().pack();
    REQUIRE(static_cast<int>(blue_obs.size()) == DefenderObservation::vector_length(tiny));
    CHECK(blue_obs[0] == 1.0);   // start node infected
    CHECK(blue_obs[1] == 0.0);
    CHECK(blue_obs[2] == 0.0);

    // After the first discovery the attacker's last-step counters light up.
    FlatActionSpace sp(tiny);
    const auto step = env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
    CHECK(step.observation[0] == 1.0);  // newly discovered
    CHECK(step.observation[3] == 2.0);
}

TEST_CASE("invalid-mode shaping at a state where every valid action pays +4") {
    // Fresh tiny reset: the only valid attacker actions are A's two local
    // exploits, each worth bonus 5 - cost 1 = +4. Redirection therefore has
    // a known raw payoff no matter which action the RNG picks.
    FlatActionSpace sp(builtin_tiny());
    const std::vector<int> invalid = sp.encode(AttackerAction::remote(0, 1, 2));

    EnvConfig penalty_cfg;
    penalty_cfg.invalid_mode = InvalidActionMode::penalty_mode(-1.0);
    auto env = make_tiny(penalty_cfg);
    WrappedStep r = env->attacker_step(invalid);
    CHECK(r.was_invalid);
    CHECK(r.shaped_reward == -1.0);
    CHECK(env->attacker_invalid_count() == 1);
    // The redirected action really executed.
    CHECK((env->state().discovered(1) || env->state().credential_cached(0)));

    EnvConfig pass_cfg;
    pass_cfg.invalid_mode = InvalidActionMode::pass_through();
    env = make_tiny(pass_cfg);
    r = env->attacker_step(invalid);
    CHECK(r.was_invalid);
    CHECK(r.shaped_reward == 4.0);

    EnvConfig zero_cfg;
    zero_cfg.invalid_mode = InvalidActionMode::zero_reward();
    env = make_tiny(zero_cfg);
    r = env->attacker_step(invalid);
    CHECK(r.was_invalid);
    CHECK(r.shaped_reward == 0.0);

    // Valid actions pass their raw reward through in every mode.
    for (EnvConfig cfg : {penalty_cfg, pass_cfg, zero_cfg}) {
        env = make_tiny(cfg);
        r = env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
        CHECK_FALSE(r.was_invalid);
        CHECK(r.shaped_reward == 4.0);
        CHECK(env->attacker_invalid_count() == 0);
    }

    CHECK_THROWS_AS(InvalidActionMode::penalty_mode(0.0), ConfigError);
    CHECK_THROWS_AS(InvalidActionMode::penalty_mode(2.0), ConfigError);
}

TEST_CASE("redirection picks uniformly among the valid actions") {
    // One invalid step per fresh env; at that state the two candidates are
    // distinguishable by their side effects.
    FlatActionSpace sp(builtin_tiny());
    const std::vector<int> invalid = sp.encode(AttackerAction::remote(0, 1, 2));
    int scans = 0, dumps = 0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) {
        EnvConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(i);
        auto env = make_tiny(cfg);
        env->attacker_step(invalid);
        if (env->state().discovered(1)) ++scans;
        if (env->state().credential_cached(0)) ++dumps;
    }
    CHECK(scans + dumps == trials);
    // ~8.9 sigma band around the fair-coin mean.
    CHECK(scans > 800);
    CHECK(scans < 1200);
}

TEST_CASE("an attacker with no valid action redirects to a no-op") {
    const Scenario stranded = stranded_scenario();
    for (auto mode : {InvalidActionMode::penalty_mode(-1.0), InvalidActionMode::pass_through(),
                      InvalidActionMode::zero_reward()}) {
        EnvConfig cfg;
        cfg.invalid_mode = mode;
        BattleEnv env(stranded, cfg);
        const std::uint64_t before = env.state().state_hash();
        FlatActionSpace sp(stranded);
        const WrappedStep r = env.attacker_step(sp.encode(AttackerAction::local(0, 0)));
        CHECK(r.was_invalid);
        CHECK(env.state().state_hash() == before);
        const double expect = mode.kind == InvalidActionMode::Kind::Penalty ? -1.0 : 0.0;
        CHECK(r.shaped_reward == expect);
    }
}

TEST_CASE("defender reward mirrors the attacker's shaped reward") {
    EnvConfig cfg;
    cfg.invalid_mode = InvalidActionMode::penalty_mode(-1.0);
    cfg.seed = 1234;
    auto env = make_tiny(cfg);
    FlatActionSpace sp(builtin_tiny());
    std::mt19937_64 rng(555);
    int mirrored = 0;
    for (int t = 0; t < 300 && !env->episode_done(); ++t) {
        const auto red = random_vector(rng, sp.attacker_dims());
        const WrappedStep rr = env->attacker_step(red);
        // Pick a valid defender action that cannot take availability below
        // the threshold: toggle a firewall rule.
        DefenderAction safe{};
        bool found = false;
        for (const DefenderAction& d : env->state().valid_defender_actions())
            if (d.type == DefenderAction::Type::BlockTraffic ||
                d.type == DefenderAction::Type::AllowTraffic) {
                safe = d;
                found = true;
                break;
            }
        REQUIRE(found);
        const WrappedStep br = env->defender_step(sp.encode(safe));
        CHECK_FALSE(br.was_invalid);
        CHECK(br.shaped_reward == -rr.shaped_reward);
        ++mirrored;
        env->tick_and_advance();
    }
    CHECK(mirrored > 100);

    // An invalid defender action earns the flat invalid penalty instead.
    auto env2 = make_tiny();
    env2->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
    const WrappedStep bad = env2->defender_step(sp.encode(DefenderAction::reimage(0)));
    CHECK(bad.was_invalid);
    CHECK(bad.shaped_reward == -1.0);
    CHECK(env2->defender_invalid_count() == 1);
}

TEST_CASE("availability violations fire once, end the episode, and re-arm") {
    const Scenario tiny = builtin_tiny();
    FlatActionSpace sp(tiny);
    // Threshold 0.7: a single reimage (availability 2/3) violates.
    EnvConfig cfg;
    cfg.availability_threshold = 0.7;

    SUBCASE("reset mode terminates on the violation") {
        auto env = std::make_shared<BattleEnv>(tiny, cfg);
        const WrappedStep rr = env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
        REQUIRE(rr.shaped_reward == 4.0);
        const WrappedStep br = env->defender_step(sp.encode(DefenderAction::reimage(1)));
        CHECK_FALSE(br.was_invalid);
        CHECK(br.shaped_reward == -4.0 - 5000.0);
        CHECK(br.terminal);
        CHECK(env->episode_done());
        CHECK(env->availability_violations() == 1);
    }

    SUBCASE("no-reset mode penalizes once and re-arms after recovery") {
        cfg.no_reset = true;
        auto env = std::make_shared<BattleEnv>(tiny, cfg);
        env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
        WrappedStep br = env->defender_step(sp.encode(DefenderAction::reimage(1)));
        CHECK(br.shaped_reward == -4.0 - 5000.0);
        CHECK_FALSE(br.terminal);
        CHECK_FALSE(env->episode_done());
        env->tick_and_advance();

        // Stays below threshold for the rest of the countdown: no new fine.
        for (int i = 1; i < kReimageDuration; ++i) {
            const WrappedStep rr =
                env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
            REQUIRE(rr.shaped_reward == -1.0);  // bonus exhausted, cost only
            br = env->defender_step(sp.encode(DefenderAction::reimage(0)));  // invalid no-op
            CHECK(br.was_invalid);
            CHECK(br.shaped_reward == -1.0);  // just the invalid penalty
            env->tick_and_advance();
        }
        CHECK(env->state().reimage_countdown(1) == 0);
        CHECK(env->state().availability() == 1.0);
        CHECK(env->availability_violations() == 1);

        // A defender step at full availability re-arms the fine.
        env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
        br = env->defender_step(sp.encode(DefenderAction::block(1, 0, Direction::Outgoing)));
        CHECK(br.shaped_reward == 1.0);  // plain mirror, no fine
        env->tick_and_advance();

        env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
        br = env->defender_step(sp.encode(DefenderAction::reimage(2)));
        CHECK(br.shaped_reward == -(-1.0) - 5000.0);
        CHECK(env->availability_violations() == 2);
        CHECK_FALSE(env->episode_done());
    }
}

TEST_CASE("wrapper resets are coordinated through the generation counter") {
    auto run = [](bool red_first) {
        auto env = make_tiny();
        AttackerWrapper red(env);
        DefenderWrapper blue(env);
        CHECK(env->real_reset_count() == 1);  // construction counts as the first reset

        // First reset pair only synchronizes with the constructed episode.
        if (red_first) { red.reset(); blue.reset(); }
        else           { blue.reset(); red.reset(); }
        CHECK(env->real_reset_count() == 1);

        FlatActionSpace sp(env->scenario());
        red.step(sp.encode(AttackerAction::local(0, kScanLogs)));
        CHECK(env->state().discovered(1));

        // Second reset pair performs exactly one underlying reset.
        if (red_first) { red.reset(); blue.reset(); }
        else           { blue.reset(); red.reset(); }
        CHECK(env->real_reset_count() == 2);
        CHECK_FALSE(env->state().discovered(1));
        CHECK(env->timestep() == 0);

        // And a third, driving home that order never double-resets.
        red.reset();
        blue.reset();
        CHECK(env->real_reset_count() == 3);
    };
    run(true);
    run(false);
}

TEST_CASE("episodes end at the configured horizon") {
    EnvConfig cfg;
    cfg.max_episode_len = 5;
    auto env = make_tiny(cfg);
    FlatActionSpace sp(builtin_tiny());
    for (int t = 0; t < 5; ++t) {
        CHECK_FALSE(env->episode_done());
        env->attacker_step(sp.encode(AttackerAction::local(0, kScanLogs)));
        const DefenderAction d = t % 2 == 0 ? DefenderAction::block(1, 0, Direction::Outgoing)
                                            : DefenderAction::allow(1, 0, Direction::Outgoing);
        env->defender_step(sp.encode(d));
        env->tick_and_advance();
    }
    CHECK(env->episode_done());
    CHECK(env->timestep() == 5);
}

TEST_CASE("full ownership optionally ends the episode") {
    FlatActionSpace sp(builtin_tiny());
    auto conquer = [&](BattleEnv& env) {
        WrappedStep last;
        for (const AttackerAction& a : {
                 AttackerAction::local(0, 3), AttackerAction::local(0, 0),
                 AttackerAction::remote(0, 1, 2),
                 AttackerAction::connect(0, 1, 1, 0), AttackerAction::local(1, 1),
                 AttackerAction::connect(1, 2, 1, 1)})
            last = env.attacker_step(sp.encode(a));
        return last;
    };

    EnvConfig stop_cfg;
    stop_cfg.stop_on_full_ownership = true;
    auto env = make_tiny(stop_cfg);
    WrappedStep last = conquer(*env);
    CHECK(env->state().all_nodes_owned());
    CHECK(last.terminal);
    CHECK(env->episode_done());

    env = make_tiny();  // default: keep playing
    last = conquer(*env);
    CHECK(env->state().all_nodes_owned());
    CHECK_FALSE(last.terminal);
    CHECK_FALSE(env->episode_done());
}

TEST_CASE("config validation") {
    const Scenario tiny = builtin_tiny();
    EnvConfig bad;
    bad.availability_threshold = 1.5;
    CHECK_THROWS_AS(BattleEnv(tiny, bad), ConfigError);
    bad = {};
    bad.max_episode_len = 0;
    CHECK_THROWS_AS(BattleEnv(tiny, bad), ConfigError);
    bad = {};
    bad.invalid_mode.kind = InvalidActionMode::Kind::Penalty;
    bad.invalid_mode.penalty = 0.5;
    CHECK_THROWS_AS(BattleEnv(tiny, bad), ConfigError);
}

TEST_CASE("fuzzed in-range actions never abort") {
    std::mt19937_64 rng(31337);
    for (const Scenario& sc : {builtin_tiny(), builtin_toyctf()}) {
        EnvConfig cfg;
        cfg.invalid_mode = InvalidActionMode::penalty_mode(-1.0);
        cfg.max_episode_len = 100;
        auto env = std::make_shared<BattleEnv>(sc, cfg);
        AttackerWrapper red(env);
        DefenderWrapper blue(env);
        red.reset();
        blue.reset();
        FlatActionSpace sp(sc);
        for (int i = 0; i < 10000; ++i) {
            const WrappedStep rr = red.step(random_vector(rng, sp.attacker_dims()));
            CHECK(std::isfinite(rr.shaped_reward));
            const WrappedStep br = blue.step(random_vector(rng, sp.defender_dims()));
            CHECK(std::isfinite(br.shaped_reward));
            env->tick_and_advance();
            if (env->episode_done()) {
                red.reset();
                blue.reset();
            }
        }
    }
}
