#include <gtest/gtest.h>

#include "rvw/dsl.hpp"
#include "rvw/encoder.hpp"
#include "rvw/report.hpp"
#include "support.hpp"

using namespace rvw;

TEST(Report, FormatPercentRoundsHalfUp) {
  EXPECT_EQ(format_percent(0.073876080067500518), "7.39%");
  EXPECT_EQ(format_percent(0.1035446288635982), "10.35%");
  EXPECT_EQ(format_percent(0.0), "0.00%");
  EXPECT_EQ(format_percent(0.084996960141964766), "8.50%");
  EXPECT_EQ(format_percent(1.0), "100.00%");
}

TEST(Report, FormatFromString) {
  EXPECT_EQ(format_from_string("csv"), Format::csv);
  EXPECT_THROW(format_from_string("xml"), Error);
}

TEST(Report, PresetsCarryReportedInputs) {
  const auto a = paper_preset("option1");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].bits_with_baseline, 426u);
  EXPECT_EQ(a[1].bits_without, 741u);
  const auto b = paper_preset("option2");
  EXPECT_EQ(b[0].bits_without, 1032u);
  EXPECT_EQ(b[1].test_error, 0.0529);
  EXPECT_THROW(paper_preset("option3"), Error);
}

TEST(Report, TableRowsUseBoundSolver) {
  const RunConfig cfg;
  const auto row = make_row(paper_preset("option2")[1], cfg);
  EXPECT_EQ(format_percent(row.bound_with_baseline), "8.47%");
  EXPECT_EQ(format_percent(row.bound_without), "10.35%");
}

TEST(Report, TextTableLayout) {
  RunConfig cfg;
  std::vector<TableRow> rows;
  for (const auto& in : paper_preset("option1")) rows.push_back(make_row(in, cfg));
  const auto text = render_table(rows, cfg);
  EXPECT_NE(text.find("Model"), std::string::npos);
  EXPECT_NE(text.find("7.39%"), std::string::npos);
  EXPECT_NE(text.find("9.55%"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Report, TableJsonAndCsv) {
  RunConfig cfg;
  cfg.format = Format::json;
  std::vector<TableRow> rows{make_row(paper_preset("option1")[0], cfg)};
  const auto j = nlohmann::json::parse(render_table(rows, cfg));
  EXPECT_EQ(j["schema"], "rvw.table/1");
  EXPECT_EQ(j["rows"][0]["bound_with_baseline_percent"], "7.39%");
  cfg.format = Format::csv;
  const auto csv = render_table(rows, cfg);
  EXPECT_EQ(csv.rfind("model,test_error", 0), 0u);
}

TEST(Report, BoundJson) {
  const BoundInputs in{0.0449, 426, 5000, 0.05, 50000};
  const auto j = bound_json(in, solve_bound(in));
  EXPECT_EQ(j["schema"], "rvw.bound/1");
  EXPECT_EQ(j["p_star_percent"], "7.39%");
  EXPECT_TRUE(j["warnings"].empty());
  EXPECT_NEAR(j["folklore"].get<double>(), 0.09230384607371461, 1e-16);
}

TEST(Report, BoundTextMentionsWarnings) {
  const BoundInputs in{0.0, 1, 5000, 0.05, 1};
  const auto text = render_bound(in, solve_bound(in), Format::text);
  EXPECT_NE(text.find("warning: outside_kl_domain"), std::string::npos);
}

TEST(Report, LedgerFormats) {
  const auto doc = parse(rvw_test::slurp("fixtures/batchnorm.rvw"));
  const auto l = count_description(doc, CountConfig{});
  const auto j = nlohmann::json::parse(render_ledger(l, Format::json));
  EXPECT_EQ(j["total_bits"], 93);
  const auto csv = render_ledger(l, Format::csv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(render_ledger(l, Format::text).find("93"), std::string::npos);
}

TEST(Report, CsvQuotesLabelsWithCommas) {
  BitLedger l;
  l.add("a, b", 3, "english.per_char");
  EXPECT_NE(render_ledger(l, Format::csv).find("\"a, b\",3"), std::string::npos);
}

TEST(Report, VerifyRendering) {
  std::vector<VerifyCheck> checks{{"kl", {{"grid", 2}}, {{"violations", 0}}, true},
                                  {"mc", {}, {}, false}};
  const McConfig cfg;
  const auto j = verify_json(checks, cfg);
  EXPECT_FALSE(j["passed"].get<bool>());
  const auto text = render_verify(checks, cfg, Format::text);
  EXPECT_EQ(text.rfind("PASS kl", 0), 0u);
  EXPECT_NE(text.find("FAIL mc"), std::string::npos);
}

TEST(Report, DocJson) {
  const auto doc = parse(rvw_test::slurp("fixtures/resnet152.rvw"));
  const auto j = doc_json(doc);
  EXPECT_EQ(j["schema"], "rvw.doc/1");
  EXPECT_EQ(j["sections"].size(), 7u);
}
