#include <gtest/gtest.h>

#include "rvw/dsl.hpp"
#include "support.hpp"

using namespace rvw;

namespace {

DescriptionDoc fixture(const std::string& name) {
  return parse(rvw_test::slurp("fixtures/" + name));
}

struct Caught {
  ErrorCode code;
  std::size_t line, column;
};

Caught parse_error(const std::string& src) {
  try {
    parse(src);
  } catch (const Error& e) {
    return {e.code(), e.line(), e.column()};
  }
  ADD_FAILURE() << "parsed without error:\n" << src;
  return {ErrorCode::io_error, 0, 0};
}

// Random expression over a small operator set.
std::string random_expr(rvw_test::Gen& g, int depth) {
  static const std::vector<std::string> leaves{"x", "a", "b", "c", "2", "0.5"};
  if (depth == 0 || g.coin(0.3)) return g.pick(leaves);
  switch (g.range(0, 5)) {
    case 0: return random_expr(g, depth - 1) + " + " + random_expr(g, depth - 1);
    case 1: return "(" + random_expr(g, depth - 1) + ") - " + random_expr(g, depth - 1);
    case 2: return random_expr(g, depth - 1) + " * " + random_expr(g, depth - 1);
    case 3: return "(" + random_expr(g, depth - 1) + ") / (" + random_expr(g, depth - 1) + ")";
    case 4: return "sqrt(" + random_expr(g, depth - 1) + ")";
    default: return "exp(" + random_expr(g, depth - 1) + ") ^ 2";
  }
}

// Parameters are exactly the variables the body uses, input first.
std::string random_equation(rvw_test::Gen& g) {
  const auto body = "x * " + random_expr(g, 3);
  std::string params = "x";
  for (const char* v : {"a", "b", "c"})
    if (body.find(v) != std::string::npos) params += std::string(", ") + v;
  return "F(" + params + ") = " + body;
}

std::string random_layer(rvw_test::Gen& g) {
  switch (g.range(0, 5)) {
    case 0: return "Conv(" + std::to_string(g.range(1, 7)) + ", " + std::to_string(g.range(1, 512)) + ", " + std::to_string(g.range(1, 2)) + ")";
    case 1: return "ReLU";
    case 2: return "MaxPool(3x3, 2)";
    case 3: return "Dropout(0.5)";
    case 4: return "FC(" + std::to_string(g.range(10, 1000)) + ")";
    default: return "skip(ReLU -> Conv(3x3, 64))";
  }
}

std::string random_doc(rvw_test::Gen& g) {
  static const std::vector<std::string> words{"scale", "crop", "mean", "flip", "0.1", "batch"};
  std::string s = "model M" + std::to_string(g.range(0, 99)) + "\n";
  const auto sections = g.range(0, 3);
  bool eq_used = false;
  for (std::uint64_t i = 0; i < sections; ++i) {
    s += "section S" + std::to_string(i) + (g.coin(0.2) ? " @inherit(Base)" : "") + "\n";
    const auto items = g.range(0, 3);
    for (std::uint64_t j = 0; j < items; ++j) {
      switch (g.range(0, 2)) {
        case 0: {
          s += "  text";
          for (auto w = g.range(1, 5); w > 0; --w) s += " " + g.pick(words);
          s += "\n";
          break;
        }
        case 1:
          if (!eq_used) {
            s += "  eq " + random_equation(g) + "\n";
            eq_used = true;
            break;
          }
          [[fallthrough]];
        default: {
          s += "  forward " + random_layer(g);
          for (auto n = g.range(0, 4); n > 0; --n) {
            s += " -> " + random_layer(g);
            if (g.coin(0.2)) s += " x " + std::to_string(g.range(1, 4));
          }
          s += "\n";
        }
      }
    }
  }
  return s;
}

}  // namespace

TEST(Dsl, ResnetFixtureStructure) {
  const auto doc = fixture("resnet152.rvw");
  EXPECT_EQ(doc.model_name, "ResNet-152");
  ASSERT_TRUE(doc.baseline_ref.has_value());
  EXPECT_EQ(*doc.baseline_ref, "AlexNet");
  ASSERT_EQ(doc.sections.size(), 7u);
  EXPECT_EQ(doc.sections[0].kind(), SectionKind::mixed);
  EXPECT_EQ(doc.sections[1].kind(), SectionKind::architecture);
  EXPECT_EQ(doc.sections[4].kind(), SectionKind::english);

  const auto spec = doc.architecture();
  ASSERT_EQ(spec.definitions.size(), 2u);
  EXPECT_EQ(spec.definitions[1].required_params(), 1u);
  ASSERT_TRUE(spec.forward_pass.has_value());
  const auto& chain = std::get<Chain>(spec.forward_pass->v);
  ASSERT_EQ(chain.items.size(), 9u);
  EXPECT_EQ(to_source(chain.items[4]), "Block(4k, 2) x 36");
  EXPECT_EQ(to_source(chain.items[1]), "MaxPooling(3x3, 2)");
}

TEST(Dsl, UnicodeAndAsciiEquationsAgree) {
  const auto uni = parse("section A\n  eq BN(x) = b + g · (x − μ) / √(σ² + 0.01)\n");
  const auto ascii = fixture("batchnorm.rvw");
  const auto& a = std::get<EquationItem>(uni.sections[0].items[0]);
  const auto& b = std::get<EquationItem>(ascii.sections[0].items[0]);
  EXPECT_EQ(a.graph, b.graph);
}

TEST(Dsl, BatchNormEquationMatchesFixtureGraph) {
  const auto doc = fixture("batchnorm.rvw");
  const auto& eq = std::get<EquationItem>(doc.sections[0].items[0]);
  const auto hand = graph_from_json(
      nlohmann::json::parse(rvw_test::slurp("fixtures/batchnorm.graph.json")));
  EXPECT_EQ(eq.graph, canonicalize(hand));
  EXPECT_EQ(eq.params, std::vector<std::string>{"x"});
}

TEST(Dsl, EmptyInputGivesEmptyDoc) {
  EXPECT_EQ(parse(""), DescriptionDoc{});
  EXPECT_EQ(parse("# only a comment\n\n"), DescriptionDoc{});
}

TEST(Dsl, ItemBeforeSectionIsRejected) {
  const auto c = parse_error("text hello world\n");
  EXPECT_EQ(c.code, ErrorCode::syntax_error);
  EXPECT_EQ(c.line, 1u);
}

TEST(Dsl, UnknownSymbolReportsPosition) {
  const auto c = parse_error("section A\n  forward ReLU -> Foo\n");
  EXPECT_EQ(c.code, ErrorCode::unknown_symbol);
  EXPECT_EQ(c.line, 2u);
  EXPECT_EQ(c.column, 19u);
}

TEST(Dsl, ForwardReferenceReportsPosition) {
  const auto c = parse_error(
      "section A\n  forward Block(2) -> ReLU\n  def Block(k) = Conv(1, k)\n");
  EXPECT_EQ(c.code, ErrorCode::forward_reference);
  EXPECT_EQ(c.line, 2u);
  EXPECT_EQ(c.column, 11u);
}

TEST(Dsl, SyntaxErrors) {
  auto c = parse_error("section A\n  eq f(x) = x +\n");
  EXPECT_EQ(c.code, ErrorCode::syntax_error);
  EXPECT_EQ(c.line, 2u);

  c = parse_error("section A\n  frobnicate\n");
  EXPECT_EQ(c.code, ErrorCode::syntax_error);

  c = parse_error("section A\nsection A\n");
  EXPECT_EQ(c.code, ErrorCode::syntax_error);
  EXPECT_EQ(c.line, 2u);

  c = parse_error("section A\n  forward ReLU x 0\n");
  EXPECT_EQ(c.code, ErrorCode::syntax_error);

  c = parse_error("section A\n  forward concat(ReLU)\n");
  EXPECT_EQ(c.code, ErrorCode::syntax_error);

  c = parse_error("section A\n  def B(k = 1, s) = Conv(1, k, s)\n");
  EXPECT_EQ(c.code, ErrorCode::syntax_error);
}

TEST(Dsl, UnknownEquationOperator) {
  const auto c = parse_error("section A\n  eq f(x) = BatchNorm(x)\n");
  EXPECT_EQ(c.code, ErrorCode::unknown_symbol);
  EXPECT_EQ(c.column, 13u);
}

TEST(Dsl, EquationsBecomeLayersAndOperators) {
  const auto doc = parse(
      "section A\n  eq g(x) = x * x\n  eq h(y) = g(y) + 1\n  forward g -> ReLU\n");
  const auto& h = std::get<EquationItem>(doc.sections[0].items[1]);
  bool calls_g = false;
  for (const auto& v : h.graph.vertices)
    if (const auto* op = std::get_if<Operator>(&v.kind)) calls_g |= op->symbol == "g";
  EXPECT_TRUE(calls_g);
}

TEST(Dsl, ReplicateOneNormalizes) {
  EXPECT_EQ(parse("section A\n  forward ReLU x 1 -> SoftMax\n"),
            parse("section A\n  forward ReLU -> SoftMax\n"));
}

TEST(Dsl, ContinuationOnlyForArchitectureLines) {
  const auto doc = parse("section A\n  text a -> b ->\n  text c\n");
  EXPECT_EQ(doc.sections[0].items.size(), 2u);
}

TEST(Dsl, InheritAnnotation) {
  const auto doc = fixture("resnet152_forward.rvw");
  EXPECT_TRUE(doc.sections[0].inherited_from_baseline);
  EXPECT_TRUE(doc.sections[0].inherit_ref.empty());
  const auto ref = parse("section T @inherit(AlexNet)\n  text x\n");
  EXPECT_EQ(ref.sections[0].inherit_ref, "AlexNet");
}

TEST(Dsl, RoundTripFixpointOnFixtures) {
  for (const char* f : {"resnet152.rvw", "densenet264.rvw", "resnet152_forward.rvw",
                        "alexnet.rvw", "batchnorm.rvw"}) {
    const auto doc = fixture(f);
    const auto text = roundtrip(doc);
    const auto again = parse(text);
    EXPECT_EQ(again, doc) << f;
    EXPECT_EQ(roundtrip(again), text) << f;
  }
}

TEST(Dsl, RoundTripRandomDocuments) {
  rvw_test::Gen g(77);
  for (int i = 0; i < 200; ++i) {
    const auto src = random_doc(g);
    DescriptionDoc doc;
    ASSERT_NO_THROW(doc = parse(src)) << src;
    const auto text = roundtrip(doc);
    DescriptionDoc again;
    ASSERT_NO_THROW(again = parse(text)) << text;
    ASSERT_EQ(again, doc) << src << "\n---\n" << text;
    ASSERT_EQ(roundtrip(again), text);
  }
}

TEST(Dsl, EquationSourceRendersPrecedence) {
  const auto doc = parse("section A\n  eq f(x, a) = (x - a) - (a - x) ^ 2 ^ 3\n");
  const auto& eq = std::get<EquationItem>(doc.sections[0].items[0]);
  const auto again = parse("section A\n  eq " + equation_source(eq) + "\n");
  EXPECT_EQ(std::get<EquationItem>(again.sections[0].items[0]).graph, eq.graph);
}
