#include <gtest/gtest.h>

#include "legoabsa/codecs.hpp"
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

const TaskSignature& aste() {
  static const TaskSignature s = signature_by_name("ASTE");
  return s;
}

std::vector<SentimentTuple> fig1() {
  return {triple("Pizza", "enak", Polarity::positive),
          triple("waiter", "cemberut terus", Polarity::negative)};
}

ErrorCode strict_error(AnswerFormat f, const std::string& answer, const TaskSignature& sig,
                       const std::string& text = "") {
  try {
    decode(f, answer, sig, text, DecodeMode::strict);
  } catch (const Error& e) {
    return e.code;
  }
  ADD_FAILURE() << "no error for '" << answer << "'";
  return ErrorCode::InvalidValue;
}

}  // namespace

// ---- GAS ----

TEST(Gas, EncodeFigureOne) {
  EXPECT_EQ(encode_gas(fig1(), aste()), "(Pizza, enak, positive); (waiter, cemberut terus, negative)");
}

TEST(Gas, EncodeEmptyAndImplicit) {
  EXPECT_EQ(encode_gas({}, aste()), "");
  EXPECT_EQ(encode_gas({triple("NULL", "bagus", Polarity::positive)}, aste()), "(NULL, bagus, positive)");
}

TEST(Gas, EncodeSignatureMismatch) {
  try {
    encode_gas({triple("a", "b", Polarity::positive)}, signature_by_name("AOPE"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, ErrorCode::SignatureMismatch);
  }
}

TEST(Gas, DecodeFigureOne) {
  auto out = decode_gas("(Pizza, enak, positive); (waiter, cemberut terus, negative)", aste(),
                        DecodeMode::strict);
  EXPECT_EQ(out.tuples, fig1());
  EXPECT_TRUE(out.warnings.empty());
}

TEST(Gas, DecodeEmpty) {
  EXPECT_EQ(decode_gas("", aste(), DecodeMode::strict), DecodeOutcome{});
  EXPECT_EQ(decode_gas("   ", aste(), DecodeMode::lenient), DecodeOutcome{});
}

TEST(Gas, LenientDropsBrokenSegment) {
  auto out = decode_gas("(lift, tanpa, negative); (broken", aste(), DecodeMode::lenient);
  EXPECT_EQ(out.tuples, (std::vector<SentimentTuple>{triple("lift", "tanpa", Polarity::negative)}));
  EXPECT_EQ(out.dropped_segments, (std::vector<std::string>{"(broken"}));
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Gas, StrictReportsPosition) {
  try {
    decode_gas("(lift, tanpa, negative); (broken", aste(), DecodeMode::strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, ErrorCode::MalformedSegment);
    EXPECT_EQ(e.position, 25u);
  }
}

TEST(Gas, RightAnchoredSplitKeepsCommasInTerms) {
  auto out = decode_gas("(teko air , meja, kotor, negative)", aste(), DecodeMode::strict);
  EXPECT_EQ(out.tuples, (std::vector<SentimentTuple>{triple("teko air , meja", "kotor", Polarity::negative)}));
}

TEST(Gas, CategoryPeeledFromRight) {
  auto tasd = signature_by_name("TASD");
  SentimentTuple t;
  t.aspect = "kamar , mandi";
  t.category = "ROOM#CLEANLINESS";
  t.polarity = Polarity::negative;
  auto out = decode_gas("(kamar , mandi, ROOM#CLEANLINESS, negative)", tasd, DecodeMode::strict);
  EXPECT_EQ(out.tuples, std::vector<SentimentTuple>{t});
}

TEST(Gas, UnknownPolarityAndNullOpinion) {
  EXPECT_EQ(strict_error(AnswerFormat::gas_extraction, "(a, b, great)", aste()), ErrorCode::MalformedSegment);
  EXPECT_EQ(strict_error(AnswerFormat::gas_extraction, "(a, NULL, positive)", aste()),
            ErrorCode::MalformedSegment);
  EXPECT_EQ(strict_error(AnswerFormat::gas_extraction, "(a positive)", aste()), ErrorCode::MalformedSegment);
}

TEST(Gas, SeparatorCount) {
  testkit::Generator gen(3);
  for (int i = 0; i < 500; ++i) {
    auto toks = gen.tokens(2, 10);
    auto xs = gen.tuples_for(aste(), toks, 6);
    auto s = encode_gas(xs, aste());
    std::size_t seps = 0;
    for (std::size_t p = s.find("; "); p != std::string::npos; p = s.find("; ", p + 1)) ++seps;
    EXPECT_EQ(seps, xs.empty() ? 0 : xs.size() - 1);
  }
}

// ---- LEGO ----

TEST(Lego, EncodeFigureOneTriplet) {
  EXPECT_EQ(encode_lego({triple("Pizza", "enak", Polarity::positive)}, aste()),
            "<extra_id_0> Pizza <extra_id_1> enak <extra_id_2> positive");
}

TEST(Lego, SlotsRestartPerTuple) {
  EXPECT_EQ(encode_lego(fig1(), aste()),
            "<extra_id_0> Pizza <extra_id_1> enak <extra_id_2> positive ; "
            "<extra_id_0> waiter <extra_id_1> cemberut terus <extra_id_2> negative");
}

TEST(Lego, EmptyMarker) {
  EXPECT_EQ(encode_lego({}, aste()), "<extra_id_0> none");
  EXPECT_EQ(decode_lego("<extra_id_0> none", aste(), DecodeMode::strict), DecodeOutcome{});
}

TEST(Lego, LenientMissingSlot) {
  auto out = decode_lego("<extra_id_0> wifi nya <extra_id_2> negative", aste(), DecodeMode::lenient);
  EXPECT_TRUE(out.tuples.empty());
  EXPECT_EQ(out.warnings, (std::vector<std::string>{"missing slot 1"}));
  EXPECT_EQ(out.dropped_segments,
            (std::vector<std::string>{"<extra_id_0> wifi nya <extra_id_2> negative"}));
}

TEST(Lego, StrictErrors) {
  EXPECT_EQ(strict_error(AnswerFormat::lego_sentinel, "<extra_id_0> a <extra_id_2> positive", aste()),
            ErrorCode::SlotOrderViolation);
  EXPECT_EQ(strict_error(AnswerFormat::lego_sentinel, "<extra_id_1> enak <extra_id_0> a <extra_id_2> positive",
                         aste()),
            ErrorCode::SlotOrderViolation);
  EXPECT_EQ(strict_error(AnswerFormat::lego_sentinel, "<extra_id_0> a <extra_id_1> b <extra_id_7> positive",
                         aste()),
            ErrorCode::UnknownSentinel);
  EXPECT_EQ(strict_error(AnswerFormat::lego_sentinel, "<extra_id_x> a", aste()), ErrorCode::UnknownSentinel);
  EXPECT_EQ(strict_error(AnswerFormat::lego_sentinel, "", aste()), ErrorCode::MalformedSegment);
}

TEST(Lego, LenientEmptyAnswerWarns) {
  auto out = decode_lego("", aste(), DecodeMode::lenient);
  EXPECT_TRUE(out.tuples.empty());
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Lego, KeepsGoodTuplesAroundBadOnes) {
  auto out = decode_lego(
      "<extra_id_0> Pizza <extra_id_1> enak <extra_id_2> positive ; garbage ; "
      "<extra_id_0> waiter <extra_id_1> cemberut terus <extra_id_2> negative",
      aste(), DecodeMode::lenient);
  EXPECT_EQ(out.tuples, fig1());
  EXPECT_EQ(out.dropped_segments, (std::vector<std::string>{"garbage"}));
}

// ---- BARTABSA ----

TEST(Bartabsa, EncodeTokenIndices) {
  EXPECT_EQ(encode_bartabsa({triple("pizza nya", "enak", Polarity::positive)}, aste(), "pizza nya enak"),
            "0,1,2,2,positive");
}

TEST(Bartabsa, ImplicitAspect) {
  EXPECT_EQ(encode_bartabsa({triple("NULL", "bagus", Polarity::positive)}, aste(), "bagus ."),
            "-1,-1,0,0,positive");
  auto out = decode_bartabsa("-1,-1,0,0,positive", aste(), "bagus .", DecodeMode::strict);
  EXPECT_EQ(out.tuples, (std::vector<SentimentTuple>{triple("NULL", "bagus", Polarity::positive)}));
}

TEST(Bartabsa, LenientOutOfRange) {
  auto out = decode_bartabsa("9,9,0,0,positive", aste(), "bagus .", DecodeMode::lenient);
  EXPECT_TRUE(out.tuples.empty());
  EXPECT_EQ(out.warnings, (std::vector<std::string>{"index 9 out of range"}));
  EXPECT_EQ(out.dropped_segments.size(), 1u);
}

TEST(Bartabsa, StrictErrors) {
  EXPECT_EQ(strict_error(AnswerFormat::bartabsa_index, "9,9,0,0,positive", aste(), "bagus ."),
            ErrorCode::IndexOutOfRange);
  EXPECT_EQ(strict_error(AnswerFormat::bartabsa_index, "0,0,positive", aste(), "bagus ."),
            ErrorCode::ArityMismatch);
  EXPECT_EQ(strict_error(AnswerFormat::bartabsa_index, "1,0,0,0,positive", aste(), "bagus ."),
            ErrorCode::IndexOutOfRange);
}

TEST(Bartabsa, TermNotTokenAligned) {
  try {
    encode_bartabsa({triple("pizz", "enak", Polarity::positive)}, aste(), "pizza nya enak");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, ErrorCode::TermNotTokenAligned);
  }
}

TEST(Bartabsa, PolarityAndCategoryAsWords) {
  auto tasd = signature_by_name("TASD");
  SentimentTuple t;
  t.aspect = "kamar";
  t.category = "ROOM#CLEANLINESS";
  t.polarity = Polarity::neutral;
  auto s = encode_bartabsa({t}, tasd, "kamar nya biasa");
  EXPECT_EQ(s, "0,0,ROOM#CLEANLINESS,neutral");
  EXPECT_EQ(decode_bartabsa(s, tasd, "kamar nya biasa", DecodeMode::strict).tuples,
            std::vector<SentimentTuple>{t});
}

// ---- properties ----

TEST(CodecProperty, RoundTripAllFormats) {
  testkit::Generator gen(20260601);
  for (auto format : kAllFormats) {
    for (int i = 0; i < 3000; ++i) {
      const auto& sig = gen.signature();
      auto toks = gen.tokens(1, 12);
      std::string source = testkit::Generator::join(toks, 0, toks.size());
      auto xs = gen.tuples_for(sig, toks, 5);
      auto encoded = encode(format, xs, sig, source);
      auto out = decode(format, encoded, sig, source, DecodeMode::strict);
      ASSERT_EQ(out.tuples, xs) << to_string(format) << " " << sig.name() << ": " << encoded;
      ASSERT_TRUE(out.warnings.empty());
    }
  }
}

TEST(CodecProperty, LenientDecodersAreTotal) {
  testkit::Generator gen(99);
  for (int i = 0; i < 20000; ++i) {
    const auto& sig = gen.signature();
    auto toks = gen.tokens(1, 6);
    std::string source = testkit::Generator::join(toks, 0, toks.size());
    std::string input = i % 2 ? gen.fuzz_bytes(48)
                              : gen.mutate(encode(kAllFormats[i % 3], gen.tuples_for(sig, toks, 3), sig, source));
    for (auto format : kAllFormats) {
      EXPECT_NO_THROW(decode(format, input, sig, source, DecodeMode::lenient));
    }
  }
}

TEST(CodecProperty, LenientRecoversEveryWellFormedSegment) {
  testkit::Generator gen(5);
  for (int i = 0; i < 1000; ++i) {
    auto toks = gen.tokens(2, 8);
    auto xs = gen.tuples_for(aste(), toks, 4);
    if (xs.empty()) continue;
    auto answer = encode_gas(xs, aste()) + "; (junk";
    auto out = decode_gas(answer, aste(), DecodeMode::lenient);
    EXPECT_EQ(out.tuples, xs);
    EXPECT_EQ(out.dropped_segments.size(), 1u);
  }
}
