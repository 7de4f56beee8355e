#include <gtest/gtest.h>

#include "rvw/arch.hpp"
#include "rvw/dsl.hpp"
#include "support.hpp"

using namespace rvw;

namespace {

ArchNode prim(std::string sym, std::vector<HyperParam> args = {}) {
  return {PrimitiveLayer{std::move(sym), std::move(args)}};
}
ArchNode ref(std::string name, std::vector<HyperParam> args = {}) {
  return {NamedRef{std::move(name), std::move(args)}};
}
ArchNode chain(std::vector<ArchNode> items) { return {Chain{std::move(items)}}; }

Definition layer_def() {
  // Layer(f, k, s) = ReLU -> Conv(f, k, s)
  return {"Layer",
          {"f", "k", "s"},
          {},
          chain({prim("ReLU"), prim("Conv", {ParamRef{"f"}, ParamRef{"k"}, ParamRef{"s"}})})};
}

ArchitectureSpec fixture_arch(const std::string& name, std::set<std::string>* eqs) {
  const auto doc = parse(rvw_test::slurp("fixtures/" + name));
  if (eqs) *eqs = doc.equation_names();
  return doc.architecture();
}

}  // namespace

TEST(Arch, FixturesValidate) {
  for (const char* f : {"resnet152.rvw", "densenet264.rvw", "resnet152_forward.rvw"}) {
    std::set<std::string> eqs;
    const auto spec = fixture_arch(f, &eqs);
    EXPECT_TRUE(spec.forward_pass.has_value()) << f;
    EXPECT_TRUE(validate(spec, Codebook::standard(), eqs).ok()) << f;
  }
}

TEST(Arch, BnMustBeVisibleAsExternal) {
  const auto spec = fixture_arch("resnet152.rvw", nullptr);
  const auto rep = validate(spec);
  EXPECT_TRUE(rep.has("forward_reference"));
}

TEST(Arch, SimpleSpecValid) {
  ArchitectureSpec spec;
  spec.definitions.push_back(layer_def());
  spec.bindings.push_back({"k", IntLit{64}});
  spec.forward_pass = chain({ref("Layer", {SizeLit{3, 3}, ParamRef{"k", 2, 1}, IntLit{1}}),
                             prim("SoftMax")});
  EXPECT_TRUE(validate(spec).ok());
}

TEST(Arch, UndefinedParam) {
  ArchitectureSpec spec;
  spec.definitions.push_back(
      {"L", {"f"}, {}, prim("Conv", {ParamRef{"g"}})});
  EXPECT_TRUE(validate(spec).has("undefined_name"));
}

TEST(Arch, ReferenceBeforeDefinition) {
  ArchitectureSpec spec;
  spec.definitions.push_back({"Outer", {}, {}, ref("Layer", {IntLit{1}, IntLit{1}, IntLit{1}})});
  spec.definitions.push_back(layer_def());
  EXPECT_TRUE(validate(spec).has("forward_reference"));
}

TEST(Arch, NoSelfRecursion) {
  ArchitectureSpec spec;
  spec.definitions.push_back({"Loop", {}, {}, chain({prim("ReLU"), ref("Loop")})});
  EXPECT_TRUE(validate(spec).has("forward_reference"));
}

TEST(Arch, ArityMismatch) {
  ArchitectureSpec spec;
  spec.definitions.push_back(layer_def());
  spec.forward_pass = ref("Layer", {IntLit{3}});
  EXPECT_TRUE(validate(spec).has("arity_mismatch"));
  spec.forward_pass = prim("ReLU", {IntLit{1}});
  EXPECT_TRUE(validate(spec).has("arity_mismatch"));
}

TEST(Arch, DefaultsMakeTrailingParamsOptional) {
  Definition d{"Block",
               {"k", "s"},
               {std::nullopt, HyperParam{IntLit{1}}},
               prim("Conv", {SizeLit{3, 3}, ParamRef{"k"}, ParamRef{"s"}})};
  EXPECT_EQ(d.required_params(), 1u);
  ArchitectureSpec spec;
  spec.definitions.push_back(d);
  spec.forward_pass = chain({ref("Block", {IntLit{8}}), ref("Block", {IntLit{8}, IntLit{2}})});
  EXPECT_TRUE(validate(spec).ok());
}

TEST(Arch, NonTrailingDefaultRejected) {
  Definition d{"Block",
               {"k", "s"},
               {HyperParam{IntLit{1}}, std::nullopt},
               prim("Conv", {ParamRef{"k"}})};
  ArchitectureSpec spec;
  spec.definitions.push_back(d);
  EXPECT_TRUE(validate(spec).has("bad_defaults"));
}

TEST(Arch, DuplicateAndShadowingDefinitions) {
  ArchitectureSpec spec;
  spec.definitions.push_back(layer_def());
  spec.definitions.push_back(layer_def());
  EXPECT_TRUE(validate(spec).has("duplicate_definition"));

  ArchitectureSpec shadow;
  shadow.definitions.push_back({"Conv", {}, {}, prim("ReLU")});
  EXPECT_TRUE(validate(shadow).has("duplicate_definition"));
}

TEST(Arch, NotALayer) {
  ArchitectureSpec spec;
  spec.forward_pass = prim("sqrt");
  EXPECT_TRUE(validate(spec).has("not_a_layer"));
}

TEST(Arch, BadCounts) {
  ArchitectureSpec spec;
  spec.forward_pass = ArchNode{Replicate{Box<ArchNode>(prim("ReLU")), IntLit{0}}};
  EXPECT_TRUE(validate(spec).has("invalid_count"));
  spec.forward_pass = ArchNode{Dense{Box<ArchNode>(prim("ReLU")), SizeLit{2, 2}}};
  EXPECT_TRUE(validate(spec).has("invalid_count"));
}

TEST(Arch, JoinsAndEmptyChain) {
  ArchitectureSpec spec;
  spec.forward_pass = ArchNode{ConcatJoin{{prim("ReLU")}}};
  EXPECT_TRUE(validate(spec).has("join_arity"));
  spec.forward_pass = chain({});
  EXPECT_TRUE(validate(spec).has("empty_chain"));
  spec.forward_pass = ArchNode{ConcatJoin{{prim("ReLU"), prim("Sigmoid")}}};
  EXPECT_TRUE(validate(spec).ok());
}

TEST(Arch, DivisionByZero) {
  ArchitectureSpec spec;
  spec.bindings.push_back({"k", IntLit{4}});
  spec.forward_pass = prim("FullyConnected", {ParamRef{"k", 1, 0}});
  EXPECT_TRUE(validate(spec).has("invalid_hyperparam"));
}

TEST(Arch, SourceRendering) {
  EXPECT_EQ(to_source(HyperParam{ParamRef{"k", 4, 1}}), "4k");
  EXPECT_EQ(to_source(HyperParam{ParamRef{"k", 1, 2}}), "k/2");
  EXPECT_EQ(to_source(HyperParam{SizeLit{3, 3}}), "3x3");
  EXPECT_EQ(to_source(HyperParam{Keyword{"global"}}), "global");
  EXPECT_EQ(to_source(chain({prim("ReLU"), prim("Conv", {IntLit{7}})})),
            "ReLU -> Conv(7)");
}

TEST(Arch, DefinitionRolesFollowPrimitiveSlots) {
  const auto roles = definition_roles(layer_def(), {});
  ASSERT_EQ(roles.size(), 3u);
  EXPECT_EQ(roles[0], HyperRole::filter);
  EXPECT_EQ(roles[1], HyperRole::channels);
  EXPECT_EQ(roles[2], HyperRole::stride);
}
