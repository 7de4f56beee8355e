#include <set>
#include <string>

#include <gtest/gtest.h>

#include "rvw/codebook.hpp"
#include "rvw/graph.hpp"
#include "support.hpp"

using rvw::Codebook;
using rvw::ErrorCode;

TEST(Codebook, CategorySizesAndWidths) {
  const auto& cb = Codebook::standard();
  EXPECT_EQ(cb.category("math_op").size(), 25u);
  EXPECT_EQ(cb.width("math_op"), 5u);
  EXPECT_EQ(cb.category("nn_layer").size(), 10u);
  EXPECT_EQ(cb.width("nn_layer"), 4u);
  EXPECT_EQ(cb.width("ste_word"), 10u);
  EXPECT_EQ(cb.category("ste_word").size(), 875u);
  EXPECT_EQ(cb.width("sampling_fn"), 4u);
  EXPECT_EQ(cb.width("tensor_op"), 3u);
  EXPECT_EQ(cb.width("optimizer"), 3u);
}

TEST(Codebook, WidthIsCeilLog2UnlessOverridden) {
  for (const auto& c : Codebook::standard().categories()) {
    EXPECT_EQ(c.width_bits(), rvw::ceil_log2(c.size())) << c.name;
  }
  EXPECT_EQ(rvw::ceil_log2(1), 0u);
  EXPECT_EQ(rvw::ceil_log2(2), 1u);
  EXPECT_EQ(rvw::ceil_log2(13), 4u);
  EXPECT_EQ(rvw::ceil_log2(16), 4u);
  EXPECT_EQ(rvw::ceil_log2(17), 5u);
}

TEST(Codebook, MathOpsAreTheListedTwentyFive) {
  const std::vector<std::string> expected{
      "add",  "subtract", "multiply", "divide", "mod",    "sin",
      "arcsin", "exp",    "log",      "power",  "round",  "clip",
      "sqrt", "abs",      "sign",     "max",    "argmax", "dot",
      "matmul", "svd",    "pseudo-inverse", "kronecker-product", "i",
      "Re",   "Im"};
  const auto& entries = Codebook::standard().category("math_op").entries;
  ASSERT_EQ(entries.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(entries[i].symbol, expected[i]);
    EXPECT_EQ(entries[i].index, i);
  }
}

TEST(Codebook, NamesUniqueWithinCategory) {
  for (const auto& c : Codebook::standard().categories()) {
    std::set<std::string> seen;
    for (const auto& e : c.entries) EXPECT_TRUE(seen.insert(e.symbol).second);
  }
}

TEST(Codebook, LookupDivideIsOrderSensitive) {
  const auto& e = Codebook::standard().lookup("divide");
  EXPECT_EQ(e.category, "math_op");
  EXPECT_TRUE(e.order_sensitive);
  EXPECT_EQ(e.arity, 2);
}

TEST(Codebook, LookupConvHasLayerSignature) {
  const auto& cb = Codebook::standard();
  const auto& e = cb.lookup("Conv");
  EXPECT_EQ(e.category, "nn_layer");
  EXPECT_EQ(cb.symbol_width("Conv"), 4u);
  ASSERT_EQ(e.params.size(), 3u);
  EXPECT_EQ(e.params[0].role, rvw::HyperRole::filter);
  EXPECT_EQ(e.params[1].role, rvw::HyperRole::channels);
  EXPECT_EQ(e.params[2].role, rvw::HyperRole::stride);
}

TEST(Codebook, AliasesResolveToCanonicalEntry) {
  const auto& cb = Codebook::standard();
  EXPECT_EQ(cb.lookup("MaxPool").symbol, "MaxPooling");
  EXPECT_EQ(cb.lookup("FC").symbol, "FullyConnected");
  EXPECT_EQ(cb.lookup("downsample").symbol, "Downsample");
  EXPECT_EQ(cb.lookup("pinv").symbol, "pseudo-inverse");
}

TEST(Codebook, BatchNormIsUnknownWithSuggestions) {
  try {
    Codebook::standard().lookup("BatchNorm");
    FAIL();
  } catch (const rvw::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_symbol);
    EXPECT_NE(std::string(e.what()).find("BatchNorm"), std::string::npos);
  }
  EXPECT_EQ(Codebook::standard().nearest("Sofmax").front(), "SoftMax");
}

TEST(Codebook, UnknownCategory) {
  try {
    Codebook::standard().width("layers");
    FAIL();
  } catch (const rvw::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_category);
  }
}

TEST(Codebook, JsonRoundTrip) {
  const auto& cb = Codebook::standard();
  EXPECT_EQ(Codebook::from_json(cb.to_json()), cb);
}

TEST(Codebook, ShippedFileEqualsBuiltIn) {
  EXPECT_EQ(Codebook::load(rvw_test::data_path("codebook.json")),
            Codebook::standard());
}

TEST(Codebook, BatchNormOperatorsResolve) {
  const auto j = nlohmann::json::parse(rvw_test::slurp("fixtures/batchnorm.graph.json"));
  const auto g = rvw::graph_from_json(j);
  for (const auto& v : g.vertices) {
    if (const auto* op = std::get_if<rvw::Operator>(&v.kind)) {
      EXPECT_NO_THROW(Codebook::standard().lookup(op->symbol));
    }
  }
}

TEST(Codebook, LoadMissingFileIsIoError) {
  try {
    Codebook::load("/nonexistent/codebook.json");
    FAIL();
  } catch (const rvw::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
  }
}
