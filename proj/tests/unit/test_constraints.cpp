#include <doctest.h>

#include "error_checks.hpp"
#include "oracles.hpp"
#include "pcf/constraints.hpp"

using namespace pcf;

namespace {

SparkSpace cafe_space() {
  return build_space(std::map<std::string, std::vector<std::string>>{
      {"skills", {"espresso", "latte_art", "pastry", "cashier"}},
      {"personalities", {"helpful", "generous", "stingy"}},
      {"approaches", {"methodical", "improvising", "obstructive"}},
      {"resources", {"full", "basic", "empty"}},
      {"knowledge", {"novice", "expert"}}});
}

AgentConfig config(std::string s, std::string p, std::string a, std::string r, std::string k) {
  return {{std::move(s), std::move(p), std::move(a), std::move(r), std::move(k)}, {}};
}

const Atom kHelpful{Dim::Personalities, "helpful"};
const Atom kObstructive{Dim::Approaches, "obstructive"};

}  // namespace

TEST_CASE("exclusion flags the helpful/obstructive contradiction") {
  const auto s = cafe_space();
  ConstraintSet cs(s);
  cs.add_exclusion(kHelpful, kObstructive);
  const auto bad = validate_config(config("espresso", "helpful", "obstructive", "full", "novice"), cs);
  CHECK_FALSE(bad.valid());
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].kind == Violation::Kind::Exclusion);
  CHECK(validate_config(config("espresso", "helpful", "methodical", "full", "novice"), cs).valid());
  CHECK(count_valid(s, cs) == 192);
}

TEST_CASE("constraint construction errors") {
  const auto s = cafe_space();
  ConstraintSet cs(s);
  CHECK_ERROR_CODE(cs.add_exclusion(kHelpful, kHelpful), ErrorCode::SelfExclusion);
  CHECK_ERROR_CODE(cs.add_exclusion(kHelpful, Atom{Dim::Approaches, "lazy"}), ErrorCode::UnknownAtom);
  CHECK_ERROR_CODE(cs.add_requirement(Atom{Dim::Knowledge, "guru"}, kHelpful), ErrorCode::UnknownAtom);
  CHECK_ERROR_CODE(cs.restrict_context("rush", Dim::Resources, {"infinite"}), ErrorCode::UnknownAtom);
  cs.add_exclusion(kHelpful, kObstructive);
  cs.add_exclusion(kObstructive, kHelpful);
  CHECK(cs.exclusions().size() == 1);
}

TEST_CASE("requirements are material implications") {
  const auto s = cafe_space();
  ConstraintSet cs(s);
  cs.add_requirement({Dim::Skills, "latte_art"}, {Dim::Knowledge, "expert"});
  CHECK_FALSE(validate_config(config("latte_art", "helpful", "methodical", "full", "novice"), cs).valid());
  CHECK(validate_config(config("latte_art", "helpful", "methodical", "full", "expert"), cs).valid());
  CHECK(validate_config(config("pastry", "helpful", "methodical", "full", "novice"), cs).valid());
  // 216 minus the 27 latte_art/novice configurations
  CHECK(count_valid(s, cs) == 189);
}

TEST_CASE("cyclic requirements pin both atoms together") {
  const auto s = cafe_space();
  ConstraintSet cs(s);
  const Atom a{Dim::Skills, "pastry"};
  const Atom b{Dim::Resources, "full"};
  cs.add_requirement(a, b).add_requirement(b, a);
  CHECK(count_valid(s, cs) == pcf::testing::brute_force_count(s, cs, std::nullopt));
}

TEST_CASE("context restrictions") {
  const auto s = cafe_space();
  ConstraintSet cs(s);
  cs.restrict_context("rush_hour", Dim::Approaches, {"methodical", "improvising"});
  const auto c = config("espresso", "stingy", "obstructive", "empty", "novice");
  CHECK(validate_config(c, cs).valid());
  const auto r = validate_config(c, cs, "rush_hour");
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].kind == Violation::Kind::Context);
  CHECK(count_valid(s, cs, "rush_hour") == 144);
  CHECK(count_valid(s, cs) == 216);
  CHECK_ERROR_CODE(validate_config(c, cs, "brunch"), ErrorCode::UnknownContext);
  CHECK_ERROR_CODE(count_valid(s, cs, "brunch"), ErrorCode::UnknownContext);
  CHECK_ERROR_CODE(validate_config(config("tea", "stingy", "obstructive", "empty", "novice"), cs),
                   ErrorCode::UnknownTrait);
}

TEST_CASE("empty constraints leave the space intact") {
  const auto s = cafe_space();
  ConstraintSet cs(s);
  CHECK(cs.empty());
  CHECK(count_valid(s, cs) == 216);
  std::size_t n = 0;
  for (const auto& c : filter_space(s, cs)) {
    (void)c;
    ++n;
  }
  CHECK(n == 216);
}

TEST_CASE("filter_space refuses constraints bound to another space") {
  const auto other = pcf::testing::space_of_sizes({2, 2, 2, 2, 2});
  ConstraintSet cs(cafe_space());
  CHECK_ERROR_CODE(filter_space(other, cs), ErrorCode::SpaceMismatch);
}

TEST_CASE("parse_constraints") {
  const auto s = cafe_space();
  const auto cs = parse_constraints(s, R"({
    "exclusions": [[["personalities","helpful"],["approaches","obstructive"]],
                   [["personalities","generous"],["personalities","stingy"]]],
    "requirements": [{"if": ["skills","latte_art"], "then": ["knowledge","expert"]}],
    "contexts": {"rush": {"resources": ["full","basic"]}}})");
  CHECK(cs.exclusions().size() == 2);
  CHECK(cs.requirements().size() == 1);
  CHECK(cs.has_context("rush"));
  CHECK(count_valid(s, cs, "rush") == pcf::testing::brute_force_count(s, cs, "rush"));
  CHECK_ERROR_CODE(parse_constraints(s, R"({"rules": []})"), ErrorCode::SchemaError);
  CHECK_ERROR_CODE(parse_constraints(s, R"({"exclusions": [[["mood","x"],["skills","pastry"]]]})"),
                   ErrorCode::UnknownAtom);
}

TEST_CASE("property: count_valid, filter_space and brute force agree") {
  pcf::testing::Rng rng(2024);
  for (int round = 0; round < 60; ++round) {
    const auto s = pcf::testing::random_space(rng, 3000);
    const auto cs = pcf::testing::random_constraints(rng, s);
    std::vector<std::optional<std::string>> contexts{std::nullopt};
    for (const auto& [name, _] : cs.contexts()) contexts.push_back(name);
    for (const auto& ctx : contexts) {
      const std::optional<std::string_view> view = ctx ? std::optional<std::string_view>(*ctx) : std::nullopt;
      const auto oracle = pcf::testing::brute_force_count(s, cs, ctx);
      std::uint64_t filtered = 0;
      for (const auto& c : filter_space(s, cs, view)) {
        CHECK(pcf::testing::brute_force_ok(c.traits, cs, ctx));
        CHECK(validate_config(c, cs, view).valid());
        ++filtered;
      }
      CHECK(filtered == oracle);
      CHECK(count_valid(s, cs, view) == oracle);
    }
  }
}

TEST_CASE("property: every rejected configuration reports a violation") {
  pcf::testing::Rng rng(7);
  for (int round = 0; round < 20; ++round) {
    const auto s = pcf::testing::random_space(rng, 500);
    const auto cs = pcf::testing::random_constraints(rng, s);
    for (const auto& c : enumerate(s)) {
      CHECK(validate_config(c, cs).valid() == pcf::testing::brute_force_ok(c.traits, cs, std::nullopt));
    }
  }
}
