#include <random>
#include <string>
#include <variant>
#include <vector>

#include "doctest.h"
#include "reactree/decision.hpp"
#include "reactree/errors.hpp"
#include "reactree/types.hpp"

using namespace reactree;

namespace {

const SkillGrammar kHousehold = SkillGrammar::household();
const std::vector<ControlFlowType> kAllFlows = {
    ControlFlowType::Sequence, ControlFlowType::Fallback, ControlFlowType::Parallel};

AgentDecision parse_ok(const std::string& line, const SkillGrammar& grammar = kHousehold,
                       bool expand_allowed = true) {
    auto outcome = parse_decision(line, grammar, expand_allowed);
    REQUIRE(std::holds_alternative<AgentDecision>(outcome));
    return std::get<AgentDecision>(outcome);
}

std::string parse_rejected(const std::string& line, const SkillGrammar& grammar = kHousehold,
                           bool expand_allowed = true) {
    auto outcome = parse_decision(line, grammar, expand_allowed);
    REQUIRE(std::holds_alternative<ParseRejection>(outcome));
    return std::get<ParseRejection>(outcome).reason;
}

}  // namespace

TEST_CASE("skill grammars expose the documented action lists") {
    const auto household = SkillGrammar::household().prompt_actions();
    CHECK(household == std::vector<std::string>{"go to", "pick up", "put down", "open", "close",
                                                "turn on", "recall location of", "done",
                                                "failure"});

    const auto extended = SkillGrammar::extended(false).prompt_actions();
    CHECK(extended == std::vector<std::string>{"go to", "pick up", "put down", "slice", "open",
                                               "close", "turn on", "turn off", "done",
                                               "failure"});
}

TEST_CASE("enum names round-trip") {
    for (const auto s : {NodeStatus::Running, NodeStatus::Success, NodeStatus::Failure}) {
        CHECK(status_from_string(to_string(s)) == s);
    }
    for (const auto f : kAllFlows) CHECK(flow_from_string(to_string(f)) == f);
    for (const auto m : {Mode::ReAcTree, Mode::React}) CHECK(mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(flow_from_string("loop"), ConfigError);
    CHECK_THROWS_AS(mode_from_string("tree"), ConfigError);
    CHECK_THROWS_AS(status_from_string("success"), ConfigError);
}

TEST_CASE("thoughts, acts, and terminals parse") {
    CHECK(parse_ok("Think: check the fridge") == AgentDecision{ThinkDecision{"check the fridge"}});
    CHECK(parse_ok("  Think:   padded   ") == AgentDecision{ThinkDecision{"padded"}});
    CHECK(parse_ok("Act: go to kitchen 1") == AgentDecision{ActDecision{"go to kitchen 1"}});
    CHECK(parse_ok("Act: recall location of wine") ==
          AgentDecision{ActDecision{"recall location of wine"}});
    CHECK(parse_ok("Act: done") == AgentDecision{DoneDecision{}});
    CHECK(parse_ok("Act: failure") == AgentDecision{DeclareFailureDecision{}});
}

TEST_CASE("expansion payloads parse with either quote style") {
    const AgentDecision expected{
        ExpandDecision{ControlFlowType::Sequence, {"find the wine", "pour the wine"}}};
    CHECK(parse_ok("Expand: {'control_flow': 'sequence', 'conditions': 'find the wine, "
                   "pour the wine'}") == expected);
    CHECK(parse_ok("Expand: {\"control_flow\": \"sequence\", \"conditions\": \"find the wine, "
                   "pour the wine\"}") == expected);
    CHECK(parse_ok("Expand: { 'conditions' : 'find the wine,pour the wine' , "
                   "'control_flow' : 'sequence' }") == expected);
}

TEST_CASE("malformed lines are rejected with a reason") {
    CHECK(parse_rejected("Think:") == "empty thought");
    CHECK(parse_rejected("Act: dance the tango") ==
          "unknown action verb in 'dance the tango'");
    CHECK(parse_rejected("Act: go to") == "action 'go to' is missing a target");
    CHECK(parse_rejected("Observe: the room") == "unrecognized decision 'Observe: the room'");
    CHECK(parse_rejected("") == "unrecognized decision ''");

    CHECK(parse_rejected("Expand: {'control_flow': 'sequence', 'conditions': 'x'}", kHousehold,
                         false) == "expansion is not available here");
    CHECK(parse_rejected("Expand: not a dict") == "expansion payload must be a braced dict");
    CHECK(parse_rejected("Expand: {'control_flow': 'loop', 'conditions': 'x'}") ==
          "unknown control flow 'loop'");
    CHECK(parse_rejected("Expand: {'control_flow': 'sequence'}") ==
          "expansion payload needs control_flow and conditions");
    CHECK(parse_rejected("Expand: {'control_flow': 'sequence', 'conditions': ' , '}") ==
          "expansion has no subgoals");
    CHECK(parse_rejected("Expand: {'control_flow': 'sequence', 'mood': 'calm', "
                         "'conditions': 'x'}") == "unexpected expansion key 'mood'");
    CHECK(parse_rejected("Expand: {'control_flow': 'sequence', 'conditions': 'x',}") ==
          "expansion payload ends with a dangling comma");
    CHECK(parse_rejected("Expand: {'control_flow': 'sequence' 'conditions': 'x'}") ==
          "expansion payload has trailing characters");
}

TEST_CASE("recall is only a verb when the grammar enables it") {
    const auto without = SkillGrammar::household(false);
    CHECK(parse_rejected("Act: recall location of wine", without) ==
          "unknown action verb in 'recall location of wine'");
    CHECK(parse_ok("Act: recall location of wine", SkillGrammar::household(true)) ==
          AgentDecision{ActDecision{"recall location of wine"}});
}

TEST_CASE("split_command picks the longest matching verb") {
    std::string verb;
    std::string argument;
    const auto extended = SkillGrammar::extended();

    REQUIRE(split_command("turn off tv 1", extended, verb, argument));
    CHECK(verb == "turn off");
    CHECK(argument == "tv 1");

    REQUIRE(split_command("recall location of juice", extended, verb, argument));
    CHECK(verb == "recall location of");
    CHECK(argument == "juice");

    REQUIRE(split_command("open", kHousehold, verb, argument));
    CHECK(verb == "open");
    CHECK(argument.empty());

    CHECK_FALSE(split_command("turn off tv 1", kHousehold, verb, argument));
    CHECK_FALSE(split_command("turning on stove 1", kHousehold, verb, argument));
}

TEST_CASE("canonical rendering round-trips through the parser") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> words = {"wine",  "fridge", "check", "table",
                                            "shelf", "first",  "now"};
    const std::vector<std::string> verbs = kHousehold.prompt_actions();
    auto word = [&] { return words[rng() % words.size()]; };

    for (int i = 0; i < 500; ++i) {
        AgentDecision decision;
        switch (rng() % 5) {
            case 0:
                decision = ThinkDecision{word() + " " + word() + " " + word()};
                break;
            case 1:
                decision = ActDecision{verbs[rng() % 6] + " " + word() + " 1"};
                break;
            case 2: {
                ExpandDecision e;
                e.flow = static_cast<ControlFlowType>(rng() % 3);
                const auto n = 1 + rng() % 4;
                for (std::uint64_t k = 0; k < n; ++k) e.subgoals.push_back(word() + " " + word());
                decision = e;
                break;
            }
            case 3:
                decision = DoneDecision{};
                break;
            default:
                decision = DeclareFailureDecision{};
                break;
        }
        const auto line = render_decision(decision);
        CAPTURE(line);
        CHECK(parse_ok(line) == decision);
    }
}
