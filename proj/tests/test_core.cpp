#include <gtest/gtest.h>

#include "legoabsa/core.hpp"
#include "legoabsa/text.hpp"
#include "support/generators.hpp"

using namespace legoabsa;

namespace {

SentimentTuple triple(std::string a, std::string o, Polarity p) {
  SentimentTuple t;
  t.aspect = std::move(a);
  t.opinion = std::move(o);
  t.polarity = p;
  return t;
}

Record record(std::string text, std::vector<SentimentTuple> gold) {
  return {"r1", std::move(text), std::move(gold), Split::train};
}

}  // namespace

TEST(Polarity, ParsesWordsAndAliases) {
  EXPECT_EQ(parse_polarity("positive"), Polarity::positive);
  EXPECT_EQ(parse_polarity("NEG"), Polarity::negative);
  EXPECT_EQ(parse_polarity("neu"), Polarity::neutral);
  EXPECT_EQ(parse_polarity("Neutral"), Polarity::neutral);
  EXPECT_EQ(to_string(Polarity::negative), "negative");
}

TEST(Polarity, RejectsOtherStrings) {
  for (const char* bad : {"", "good", "POSITIVE!", "conflict", "po s"}) {
    try {
      parse_polarity(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code, ErrorCode::InvalidValue);
    }
  }
}

TEST(ElementKind, CanonicalOrder) {
  EXPECT_LT(ElementKind::aspect, ElementKind::opinion);
  EXPECT_LT(ElementKind::opinion, ElementKind::category);
  EXPECT_LT(ElementKind::category, ElementKind::polarity);
  EXPECT_EQ(parse_element_kind("category"), ElementKind::category);
}

TEST(TaskSignature, RegistryEntries) {
  using K = ElementKind;
  const std::map<std::string, std::vector<K>> expected = {
      {"ATE", {K::aspect}},
      {"OTE", {K::opinion}},
      {"ACD", {K::category}},
      {"AOPE", {K::aspect, K::opinion}},
      {"UABSA", {K::aspect, K::polarity}},
      {"ACSA", {K::category, K::polarity}},
      {"ASTE", {K::aspect, K::opinion, K::polarity}},
      {"TASD", {K::aspect, K::category, K::polarity}},
      {"ACOS", {K::aspect, K::opinion, K::category, K::polarity}},
  };
  ASSERT_EQ(task_registry().size(), expected.size());
  for (const auto& [name, kinds] : expected) {
    EXPECT_EQ(signature_by_name(name).kinds(), kinds) << name;
  }
}

TEST(TaskSignature, TierFollowsArityForEveryRegistryEntry) {
  for (const auto& s : task_registry()) {
    Tier want = s.arity() == 1 ? Tier::single : s.arity() == 2 ? Tier::basic : Tier::advance;
    EXPECT_EQ(s.tier(), want) << s.name();
  }
}

TEST(TaskSignature, SortsAndDeduplicatesKinds) {
  TaskSignature s("custom", {ElementKind::polarity, ElementKind::aspect, ElementKind::polarity});
  EXPECT_EQ(s.kinds(), (std::vector<ElementKind>{ElementKind::aspect, ElementKind::polarity}));
  EXPECT_EQ(s.slot_of(ElementKind::polarity), 1u);
  EXPECT_FALSE(s.slot_of(ElementKind::opinion).has_value());
}

TEST(TaskSignature, EmptyKindsRejected) {
  EXPECT_THROW(TaskSignature("x", {}), Error);
}

TEST(TaskSignature, UnknownNameThrows) {
  try {
    signature_by_name("ASQP");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, ErrorCode::UnknownSignature);
  }
}

TEST(Project, AsteToAope) {
  auto t = triple("Pizza", "enak", Polarity::positive);
  SentimentTuple want;
  want.aspect = "Pizza";
  want.opinion = "enak";
  EXPECT_EQ(project(t, signature_by_name("AOPE")), want);
}

TEST(Project, IdentityOnOwnSignature) {
  auto t = triple("Pizza", "enak", Polarity::positive);
  EXPECT_EQ(project(t, signature_by_name("ASTE")), t);
}

TEST(Project, ImplicitAspectToUabsa) {
  SentimentTuple want;
  want.aspect = "NULL";
  want.polarity = Polarity::positive;
  EXPECT_EQ(project(triple("NULL", "bagus", Polarity::positive), signature_by_name("UABSA")), want);
}

TEST(Project, MissingElement) {
  try {
    project(triple("a", "b", Polarity::neutral), signature_by_name("ACSA"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, ErrorCode::MissingElement);
  }
}

TEST(Project, IdempotentOverRandomTuples) {
  testkit::Generator gen(11);
  const auto acos = signature_by_name("ACOS");
  for (int i = 0; i < 2000; ++i) {
    auto toks = gen.tokens(3, 8);
    auto t = gen.tuple_for(acos, toks);
    for (const auto& s : task_registry()) {
      auto once = project(t, s);
      EXPECT_EQ(project(once, s), once);
      EXPECT_TRUE(s.matches(once));
    }
  }
}

TEST(Dedup, KeepsFirstOccurrenceOrder) {
  auto a = triple("a", "x", Polarity::positive);
  auto b = triple("b", "y", Polarity::negative);
  EXPECT_EQ(dedup_tuples({a, b, a, b, a}), (std::vector<SentimentTuple>{a, b}));
}

TEST(ValidateRecord, ImplicitAspectIsValid) {
  EXPECT_TRUE(validate_record(record("bagus dan bersih .", {triple("NULL", "bagus", Polarity::positive)}))
                  .empty());
}

TEST(ValidateRecord, AspectNotInText) {
  auto v = validate_record(record("bagus dan bersih .", {triple("kolam", "bagus", Polarity::positive)}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "aspect-not-in-text");
  EXPECT_EQ(v[0].tuple_index, 0u);
  EXPECT_EQ(to_string(v[0]), "aspect-not-in-text @0 (aspect)");
}

TEST(ValidateRecord, NullOpinionForbidden) {
  auto v = validate_record(record("bagus dan bersih .", {triple("NULL", "NULL", Polarity::positive)}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "NULL-only-valid-for-aspect");
  EXPECT_EQ(v[0].field, "opinion");
}

TEST(ValidateRecord, GroundingCollapsesWhitespace) {
  EXPECT_TRUE(
      validate_record(record("smoking   areanya ada", {triple("smoking areanya", "ada", Polarity::positive)}))
          .empty());
}

TEST(ValidateRecord, EmptyTupleAndEmptyField) {
  auto v = validate_record(record("x", {SentimentTuple{}, triple(" ", "x", Polarity::neutral)}));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].rule, "empty-tuple");
  EXPECT_EQ(v[1].rule, "empty-field");
  EXPECT_EQ(v[1].tuple_index, 1u);
}

TEST(Split, Aliases) {
  EXPECT_EQ(parse_split("dev"), Split::validation);
  EXPECT_EQ(parse_split("val"), Split::validation);
  EXPECT_EQ(parse_split("test"), Split::test);
  EXPECT_THROW(parse_split("holdout"), Error);
}

TEST(TupleToString, RendersPresentFieldsInOrder) {
  EXPECT_EQ(to_string(triple("Pizza", "enak", Polarity::positive)), "(Pizza, enak, positive)");
}

TEST(Text, WhitespaceHelpers) {
  EXPECT_EQ(text::collapse_whitespace("  a \t b\n c  "), "a b c");
  EXPECT_EQ(text::split_whitespace(" pizza  nya enak "),
            (std::vector<std::string>{"pizza", "nya", "enak"}));
  EXPECT_EQ(text::split("a;;b", ";").size(), 3u);
}

TEST(Text, EditDistanceCountsCodePoints) {
  EXPECT_EQ(text::edit_distance("smoking areaanya", "smoking areanya"), 1u);
  EXPECT_EQ(text::edit_distance("", "abc"), 3u);
  EXPECT_EQ(text::edit_distance("kafé", "kafe"), 1u);
  EXPECT_EQ(text::length_in_code_points("kafé"), 4u);
}

TEST(Text, FoldCaseIsAsciiOnly) {
  EXPECT_EQ(text::fold_case("Pizza ÉCLAIR"), "pizza Éclair");
}
