#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "legoabsa/eval.hpp"
#include "legoabsa/json_io.hpp"
#include "support/generators.hpp"
#include "support/reference_matcher.hpp"

using namespace legoabsa;

namespace {

SentimentTuple triple(std::string a, std::string o, Polarity p) {
  SentimentTuple t;
  t.aspect = std::move(a);
  t.opinion = std::move(o);
  t.polarity = p;
  return t;
}

SentimentTuple term(std::string a) {
  SentimentTuple t;
  t.aspect = std::move(a);
  return t;
}

TaskInstance instance(std::string id, std::vector<SentimentTuple> gold) {
  TaskInstance i;
  i.record_id = std::move(id);
  i.text = "x";
  i.task = "ATE";
  i.signature = signature_by_name("ATE");
  i.format = AnswerFormat::gas_extraction;
  i.gold_tuples = std::move(gold);
  i.gold_answer = encode_gas(i.gold_tuples, *i.signature);
  return i;
}

}  // namespace

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize(triple("  Pizza ", "enak", Polarity::positive)), triple("pizza", "enak", Polarity::positive));
  EXPECT_EQ(canonicalize(triple("NULL", "bagus", Polarity::positive)), triple("NULL", "bagus", Polarity::positive));
  EXPECT_EQ(canonicalize(triple("smoking  areaanya", "ada", Polarity::positive)),
            triple("smoking areaanya", "ada", Polarity::positive));
  EXPECT_EQ(canonicalize(triple("Pizza", "enak", Polarity::positive), {false}),
            triple("Pizza", "enak", Polarity::positive));
}

TEST(MatchSets, HandComputed) {
  auto c = match_sets({term("a"), term("b"), term("c")}, {term("a"), term("b"), term("d")});
  EXPECT_EQ(c, (MatchCounts{2, 1, 1}));
  auto s = scores_from_counts(c);
  EXPECT_DOUBLE_EQ(s.precision, 200.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 200.0 / 3.0);
  EXPECT_NEAR(s.f1, 200.0 / 3.0, 1e-12);
}

TEST(MatchSets, TypoEarnsNoCredit) {
  auto c = match_sets({triple("smoking areanya", "ada", Polarity::positive)},
                      {triple("smoking areaanya", "ada", Polarity::positive)});
  EXPECT_EQ(c, (MatchCounts{0, 1, 1}));
}

TEST(MatchSets, EmptyBothSides) {
  EXPECT_EQ(match_sets({}, {}), (MatchCounts{0, 0, 0}));
  EXPECT_DOUBLE_EQ(scores_from_counts({}).f1, 100.0);
}

TEST(MatchSets, MixedKindsRejected) {
  try {
    match_sets({term("a")}, {triple("a", "b", Polarity::positive)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, ErrorCode::SignatureMismatch);
  }
}

TEST(Scores, DegenerateRules) {
  auto s = scores_from_counts({0, 0, 5});
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(scores_from_counts({0, 3, 0}).f1, 0.0);
}

TEST(EvaluateTask, MicroAggregation) {
  // (tp, fp, fn) = (1, 0, 1) and (1, 1, 0)
  std::vector<TaskInstance> inst = {instance("r1", {term("a"), term("b")}), instance("r2", {term("c")})};
  std::vector<std::string> outs = {"(a)", "(c); (z)"};
  auto report = evaluate_task(inst, outs, AnswerFormat::gas_extraction);
  const auto& t = report.per_task.at("ATE");
  EXPECT_EQ(t.counts, (MatchCounts{2, 1, 1}));
  EXPECT_EQ(format_fixed2(t.scores.precision), "66.67");
  EXPECT_EQ(format_fixed2(t.scores.recall), "66.67");
  EXPECT_EQ(format_fixed2(t.scores.f1), "66.67");
  ASSERT_EQ(report.per_record.size(), 2u);
  EXPECT_EQ(report.per_record[1].false_positives, std::vector<SentimentTuple>{term("z")});
}

TEST(EvaluateTask, OracleOutputsScoreFull) {
  std::vector<TaskInstance> inst = {instance("r1", {term("a"), term("b")}), instance("r2", {})};
  std::vector<std::string> outs;
  for (const auto& i : inst) outs.push_back(i.gold_answer);
  EXPECT_DOUBLE_EQ(evaluate_task(inst, outs, AnswerFormat::gas_extraction).per_task.at("ATE").scores.f1, 100.0);
}

TEST(EvaluateTask, AllEmptyOutputs) {
  std::vector<TaskInstance> inst = {instance("r1", {term("a"), term("b")}), instance("r2", {term("c")})};
  auto t = evaluate_task(inst, {"", ""}, AnswerFormat::gas_extraction).per_task.at("ATE");
  EXPECT_EQ(t.counts, (MatchCounts{0, 0, 3}));
  EXPECT_EQ(t.scores.precision, 0.0);
  EXPECT_EQ(t.scores.recall, 0.0);
  EXPECT_EQ(t.scores.f1, 0.0);
}

TEST(EvaluateTask, LengthMismatchAndWarnings) {
  std::vector<TaskInstance> inst = {instance("r1", {term("a")})};
  try {
    evaluate_task(inst, {}, AnswerFormat::gas_extraction);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, ErrorCode::LengthMismatch);
  }
  auto r = evaluate_task(inst, {"(a); broken"}, AnswerFormat::gas_extraction);
  EXPECT_EQ(r.per_task.at("ATE").decode_warnings, 1u);
  EXPECT_EQ(r.per_task.at("ATE").dropped_segments, 1u);
  EXPECT_THROW(evaluate_task(inst, {"(a); broken"}, AnswerFormat::gas_extraction, {DecodeMode::strict, {}, true}),
               Error);
}

TEST(EvaluateTask, SkipsSupplementaryInstances) {
  TaskInstance pos;
  pos.record_id = "pos-1";
  pos.task = "pos_tagging";
  auto r = evaluate_task({pos, instance("r1", {term("a")})}, {"saya_PRON", "(a)"}, AnswerFormat::gas_extraction);
  EXPECT_EQ(r.skipped_instances, 1u);
  EXPECT_EQ(r.per_task.size(), 1u);
}

TEST(EvalReport, JsonRoundTripAndTable) {
  std::vector<TaskInstance> inst = {instance("r1", {term("a"), term("b")}), instance("r2", {term("c")})};
  auto report = evaluate_task(inst, {"(a)", "(c); (z)"}, AnswerFormat::gas_extraction);
  auto back = eval_report_from_json(to_json(report));
  EXPECT_EQ(to_json(back), to_json(report));
  EXPECT_EQ(render_table(report),
            "                ATE\n"
            "precision     66.67\n"
            "recall        66.67\n"
            "f1            66.67\n");
}

// ---- properties ----

TEST(EvalProperty, MatchesBruteForceReference) {
  testkit::Generator gen(424242);
  for (int i = 0; i < 3000; ++i) {
    const auto& sig = gen.signature();
    auto toks = gen.tokens(2, 6);
    auto gold = gen.tuples_for(sig, toks, 5);
    auto pred = gen.tuples_for(sig, toks, 5);
    // Reuse some gold tuples, with case and spacing noise, so hits occur.
    for (const auto& g : gold) {
      if (gen.chance(0.5)) {
        auto t = g;
        if (t.aspect && *t.aspect != "NULL" && gen.chance(0.5)) *t.aspect = " " + *t.aspect + "  ";
        if (t.opinion && gen.chance(0.3)) std::transform(t.opinion->begin(), t.opinion->end(), t.opinion->begin(), ::toupper);
        pred.push_back(t);
      }
    }
    auto got = match_sets(gold, pred);
    auto want = reference::match(gold, pred);
    ASSERT_EQ(got, (MatchCounts{want.tp, want.fp, want.fn}));
    EXPECT_NEAR(scores_from_counts(got).f1, reference::f1_percent(want), 1e-9);
  }
}

TEST(EvalProperty, SymmetryPermutationDuplicates) {
  testkit::Generator gen(7);
  for (int i = 0; i < 1000; ++i) {
    const auto& sig = gen.signature();
    auto toks = gen.tokens(2, 5);
    auto gold = gen.tuples_for(sig, toks, 5);
    auto pred = gen.tuples_for(sig, toks, 5);
    if (!gold.empty() && gen.chance(0.5)) pred.push_back(gold[0]);
    auto c = match_sets(gold, pred);
    auto swapped = match_sets(pred, gold);
    EXPECT_EQ(swapped, (MatchCounts{c.tp, c.fn, c.fp}));
    auto g2 = gold;
    auto p2 = pred;
    std::shuffle(g2.begin(), g2.end(), gen.engine());
    std::shuffle(p2.begin(), p2.end(), gen.engine());
    if (!p2.empty()) p2.push_back(p2[gen.below(p2.size())]);
    EXPECT_EQ(match_sets(g2, p2), c);
  }
}

TEST(EvalProperty, MonotoneInCorrectAndIncorrectPredictions) {
  testkit::Generator gen(17);
  const auto sig = signature_by_name("ASTE");
  for (int i = 0; i < 1000; ++i) {
    auto toks = gen.tokens(3, 8);
    auto gold = gen.tuples_for(sig, toks, 6);
    auto pred = gen.tuples_for(sig, toks, 4);
    double base = scores_from_counts(match_sets(gold, pred)).f1;
    if (!gold.empty()) {
      auto more = pred;
      more.push_back(gold[gen.below(gold.size())]);
      EXPECT_GE(scores_from_counts(match_sets(gold, more)).f1, base - 1e-9);
    }
    auto wrong = pred;
    wrong.push_back(triple("zzz-" + std::to_string(i), "qqq", Polarity::neutral));
    EXPECT_LE(scores_from_counts(match_sets(gold, wrong)).f1, base + 1e-9);
  }
}

TEST(EvalProperty, RecordOrderDoesNotChangeReport) {
  testkit::Generator gen(33);
  std::vector<TaskInstance> inst;
  std::vector<std::string> outs;
  for (int i = 0; i < 50; ++i) {
    auto toks = gen.tokens(2, 5);
    std::vector<SentimentTuple> gold;
    for (std::size_t k = 0; k < gen.below(4); ++k) gold.push_back(term(gen.span_of(toks)));
    inst.push_back(instance("r" + std::to_string(i), gold));
    std::vector<SentimentTuple> pred;
    for (std::size_t k = 0; k < gen.below(4); ++k) pred.push_back(term(gen.span_of(toks)));
    outs.push_back(encode_gas(pred, signature_by_name("ATE")));
  }
  auto a = evaluate_task(inst, outs, AnswerFormat::gas_extraction).per_task.at("ATE").counts;
  std::vector<std::size_t> order(inst.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen.engine());
  std::vector<TaskInstance> inst2;
  std::vector<std::string> outs2;
  for (auto k : order) {
    inst2.push_back(inst[k]);
    outs2.push_back(outs[k]);
  }
  EXPECT_EQ(evaluate_task(inst2, outs2, AnswerFormat::gas_extraction).per_task.at("ATE").counts, a);
}
