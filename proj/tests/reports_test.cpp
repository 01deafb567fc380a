// Copyright 2026 The dtta Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <tuple>

#include "dtta/dtta.hpp"
#include "test_util.hpp"

namespace dtta {
namespace {

using testing::error_kind;
using testing::fixture;

constexpr double kTol = kPrintedTolerance;

ReportOptions published_options() {
  ReportOptions opt;
  opt.dialect_order = {"indian", "nigerian", "singaporean"};
  opt.cross_task = true;
  return opt;
}

MatrixCsv published_cells() {
  const auto path = fixture("paper_table1.csv");
  return read_matrix_csv(read_text(path), path.string());
}

MatrixReport published_report() {
  return build_matrix_report(published_cells().results, published_options());
}

TEST(PublishedCells, EveryPrintedDeltaIsChecked) {
  const MatrixCsv csv = published_cells();
  EXPECT_EQ(csv.checked_deltas, 26u);
  const MatrixReport r = build_matrix_report(csv.results, published_options());
  const TaskMatrix& cola = r.task("cola");
  EXPECT_NEAR(*cola.cell("sae", "indian").delta, 2.73, kTol);
  EXPECT_EQ(cola.metric, MetricKind::kMcc);
  // A cell whose adaptation lowered the score.
  bool negative = false;
  for (const auto& m : r.tasks)
    for (const auto& [key, c] : m.cells)
      if (c.delta && std::abs(*c.delta + 0.88) <= kTol) negative = true;
  EXPECT_TRUE(negative);
}

TEST(PublishedCells, BadPrintedDeltaIsAFormatError) {
  std::string text = read_text(fixture("paper_table1.csv"));
  const auto at = text.find("15.55,18.28,2.73");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 16, "15.55,18.28,2.93");
  std::string msg;
  EXPECT_EQ(error_kind([&] { read_matrix_csv(text, "edited.csv"); }, &msg), ErrorKind::kFormat);
  EXPECT_NE(msg.find("edited.csv:"), std::string::npos) << msg;
}

struct PrintedGap {
  const char* task;
  const char* dialect;
  double gap;
  double delta;
};

constexpr PrintedGap kGaps[] = {
    {"cola", "indian", 16.95, 2.73},      {"cola", "nigerian", 14.97, 2.02},
    {"cola", "singaporean", 21.99, 3.47}, {"sst2", "indian", 4.45, 0.37},
    {"sst2", "nigerian", 3.96, 0.88},     {"sst2", "singaporean", 5.58, 0.25},
    {"rte", "indian", -0.45, 1.19},       {"rte", "nigerian", -0.84, 1.20},
    {"rte", "singaporean", -0.05, 0.79},
};

TEST(GapReport, ReproducesPublishedGaps) {
  const GapReport g = build_gap_report(published_report(), true);
  ASSERT_EQ(g.entries.size(), 9u);
  for (const auto& want : kGaps) {
    const GapEntry& e = g.entry(want.task, want.dialect);
    EXPECT_NEAR(e.gap, want.gap, kTol) << want.task << "/" << want.dialect;
    ASSERT_TRUE(e.delta);
    EXPECT_NEAR(*e.delta, want.delta, kTol) << want.task << "/" << want.dialect;
  }
}

TEST(GapReport, CorrelationMatchesPublished) {
  const GapReport g = build_gap_report(published_report(), true);
  ASSERT_TRUE(g.pearson);
  EXPECT_EQ(g.pearson->n, 9u);
  EXPECT_NEAR(g.pearson->r, 0.8455, 0.001);
  EXPECT_NEAR(g.pearson->p, 0.0041, 0.0005);
  // mpmath on the unrounded cell values.
  EXPECT_NEAR(g.pearson->r, 0.8453616953962596, 1e-12);
  EXPECT_NEAR(g.pearson->p, 0.004101867466928821, 1e-12);
}

TEST(GapReport, TwoTasksGiveSixPairs) {
  std::vector<EvalResult> kept;
  for (const auto& r : published_cells().results)
    if (r.task != "rte") kept.push_back(r);
  const GapReport g = build_gap_report(build_matrix_report(kept, published_options()));
  ASSERT_TRUE(g.pearson);
  EXPECT_EQ(g.pearson->n, 6u);
  EXPECT_EQ(g.tasks, (std::vector<std::string>{"cola", "sst2"}));
}

TEST(GapReport, NoAdaptationLeavesCorrelationUndefined) {
  std::vector<EvalResult> flat;
  for (auto r : published_cells().results) {
    if (r.mode == EvalMode::kTta) continue;
    flat.push_back(r);
    if (r.train_dialect == "sae" && r.eval_dialect != "sae") {
      r.mode = EvalMode::kTta;
      flat.push_back(r);
    }
  }
  const MatrixReport m = build_matrix_report(flat, published_options());
  EXPECT_EQ(error_kind([&] { build_gap_report(m, true); }), ErrorKind::kUndefined);
  const GapReport soft = build_gap_report(m);
  EXPECT_FALSE(soft.pearson);
  EXPECT_FALSE(soft.pearson_note.empty());
  EXPECT_NE(gap_markdown(soft).find("undefined"), std::string::npos);
}

TEST(GapReport, MissingSelfCellIsAnError) {
  std::vector<EvalResult> kept;
  for (const auto& r : published_cells().results)
    if (!(r.task == "sst2" && r.train_dialect == "sae" && r.eval_dialect == "sae"))
      kept.push_back(r);
  std::string msg;
  EXPECT_EQ(error_kind([&] { build_gap_report(build_matrix_report(kept, published_options())); },
                       &msg),
            ErrorKind::kInvalidArgument);
  EXPECT_NE(msg.find("sst2"), std::string::npos) << msg;
}

TEST(GapReport, CsvLists) {
  const GapReport g = build_gap_report(published_report(), true);
  const std::string csv = gap_csv(g);
  EXPECT_EQ(csv.rfind("task,metric,dialect,gap,delta\n", 0), 0u);
  EXPECT_NE(csv.find("cola,mcc,average,"), std::string::npos);
  const std::string corr = correlation_csv(g);
  EXPECT_EQ(corr.rfind("n,r,p\n9,0.845", 0), 0u) << corr;
}

struct PrintedComparison {
  const char* dialect;
  const char* task;
  double dialect_f, reference_f, shot, shot_minus_reference, dialect_minus_shot;
};

constexpr PrintedComparison kComparison[] = {
    {"indian", "cola", 12.93, 15.55, 18.28, 2.73, -5.35},
    {"indian", "sst2", 89.13, 87.52, 87.89, 0.37, 1.24},
    {"indian", "rte", 54.98, 58.57, 59.76, 1.19, -4.78},
    {"nigerian", "cola", 18.01, 19.51, 21.53, 2.02, -3.52},
    {"nigerian", "sst2", 89.63, 88.01, 88.89, 0.88, 0.74},
    {"nigerian", "rte", 58.96, 58.96, 60.16, 1.20, -1.20},
    {"singaporean", "cola", 13.03, 5.46, 8.92, 3.47, 4.11},
    {"singaporean", "sst2", 88.38, 86.39, 86.64, 0.25, 1.74},
    {"singaporean", "rte", 60.16, 58.17, 58.96, 0.79, 1.20},
    {"average", "cola", 14.66, 13.51, 16.24, 2.74, -1.59},
    {"average", "sst2", 89.05, 87.31, 87.81, 0.50, 1.24},
    {"average", "rte", 58.03, 58.57, 59.63, 1.06, -1.59},
};

TEST(ComparisonReport, ReproducesPublishedTable) {
  const ComparisonReport c = build_comparison_report(published_report());
  for (const auto& want : kComparison) {
    const std::string d = want.dialect, t = want.task;
    const ComparisonEntry& e = d == "average" ? c.averages.at(t) : c.at(d, t);
    const std::string where = d + "/" + t;
    EXPECT_NEAR(e.dialect_f, want.dialect_f, kTol) << where;
    EXPECT_NEAR(e.reference_f, want.reference_f, kTol) << where;
    EXPECT_NEAR(e.shot, want.shot, kTol) << where;
    EXPECT_NEAR(e.shot_minus_reference(), want.shot_minus_reference, kTol) << where;
    EXPECT_NEAR(e.dialect_minus_shot(), want.dialect_minus_shot, kTol) << where;
  }
}

TEST(ComparisonReport, MissingDialectCellIsNamed) {
  std::vector<EvalResult> kept;
  for (const auto& r : published_cells().results)
    if (!(r.task == "rte" && r.train_dialect == "nigerian" && r.eval_dialect == "nigerian"))
      kept.push_back(r);
  std::string msg;
  EXPECT_EQ(error_kind([&] { build_comparison_report(kept, published_options()); }, &msg),
            ErrorKind::kInvalidArgument);
  EXPECT_NE(msg.find("nigerian on nigerian"), std::string::npos) << msg;
}

TEST(ComparisonReport, CsvAndMarkdown) {
  const ComparisonReport c = build_comparison_report(published_report());
  const std::string csv = comparison_csv(c);
  EXPECT_NE(csv.find("indian,cola,12.93,15.55,18.28,"), std::string::npos) << csv;
  const std::string md = comparison_markdown(c);
  EXPECT_NE(md.find("| Average |"), std::string::npos);
  EXPECT_NE(md.find("-5.35"), std::string::npos);
}

std::vector<PrintedValue> printed(const std::string& name) {
  const auto path = fixture(name);
  return read_printed_values(read_text(path), path.string());
}

using FlagKey = std::tuple<std::string, std::string, std::string, Field>;

std::set<FlagKey> flagged_keys(const std::vector<Discrepancy>& d) {
  std::set<FlagKey> out;
  for (const auto& x : d) out.insert({x.printed.task, x.printed.row, x.printed.column, x.printed.field});
  return out;
}

TEST(PrintedAverages, OnlyTheInconsistentOnesAreFlagged) {
  const MatrixReport r = published_report();
  const auto per_task = printed("paper_table1_averages.csv");
  EXPECT_EQ(per_task.size(), 71u);
  const auto flagged = flag_discrepancies(r, per_task);
  EXPECT_EQ(flagged_keys(flagged),
            (std::set<FlagKey>{{"rte", "average", "average", Field::kTta},
                               {"rte", "average", "average", Field::kDelta}}));
  for (const auto& d : flagged) {
    ASSERT_TRUE(d.recomputed);
    if (d.printed.field == Field::kTta) EXPECT_NEAR(*d.recomputed, 57.3256, 1e-4);
    else EXPECT_NEAR(*d.recomputed, 0.0444, 1e-4);
  }
}

TEST(PrintedAverages, CrossTaskDeltaAveragesAreFlagged) {
  const MatrixReport r = published_report();
  const auto values = printed("paper_table2.csv");
  EXPECT_EQ(values.size(), 42u);
  const auto flagged = flag_discrepancies(r, values);
  EXPECT_EQ(flagged_keys(flagged),
            (std::set<FlagKey>{{"average", "average", "indian", Field::kDelta},
                               {"average", "average", "nigerian", Field::kDelta},
                               {"average", "average", "singaporean", Field::kDelta},
                               {"average", "average", "average", Field::kDelta}}));
  const TaskMatrix& avg = *r.cross_task;
  EXPECT_NEAR(*avg.column_average.at("indian").delta, 0.3506, 1e-4);
  EXPECT_NEAR(*avg.column_average.at("nigerian").delta, 0.7422, 1e-4);
  EXPECT_NEAR(*avg.column_average.at("singaporean").delta, 0.6683, 1e-4);
  EXPECT_NEAR(*avg.corner.delta, 0.5870, 1e-4);
}

TEST(PrintedAverages, ReaderRejectsBadRows) {
  EXPECT_EQ(error_kind([] { read_printed_values("task,row\nx,y\n", "p.csv"); }), ErrorKind::kFormat);
  EXPECT_EQ(error_kind([] {
              read_printed_values("task,row,column,field,value\ncola,sae,average,G,1\n", "p.csv");
            }),
            ErrorKind::kInvalidArgument);
}

TEST(MatrixMarkdown, Layout) {
  const MatrixReport r = published_report();
  const auto flagged = flag_discrepancies(r, printed("paper_table1_averages.csv"));
  const std::string md = matrix_markdown(r, flagged);
  EXPECT_EQ(md.rfind("| Task | Train | indian F | indian TTA | indian Δ |", 0), 0u) << md;
  EXPECT_NE(md.find("| cola | sae | 15.55 | 18.28 | 2.73 |"), std::string::npos) << md;
  EXPECT_NE(md.find("cola sae on sae: 49.44 (mcc)"), std::string::npos) << md;
  EXPECT_NE(md.find("| Train | indian B | indian A | indian Δ |"), std::string::npos) << md;
  EXPECT_NE(md.find("- rte average / average TTA: printed 57.04 [57.33]"), std::string::npos) << md;
  // Rows per task block: four train dialects plus the average row.
  std::size_t cola_rows = 0;
  for (std::size_t at = md.find("| cola |"); at != std::string::npos; at = md.find("| cola |", at + 1))
    ++cola_rows;
  EXPECT_EQ(cola_rows, 5u);
}

TEST(MatrixReport, RoundTripsThroughCsv) {
  const MatrixReport r = published_report();
  const std::string csv = matrix_csv(r);
  const MatrixCsv back = read_matrix_csv(csv, "roundtrip.csv");
  EXPECT_EQ(matrix_csv(build_matrix_report(back.results, published_options())), csv);
}

TEST(MatrixReport, DuplicateCellRejected) {
  auto cells = published_cells().results;
  cells.push_back(cells.front());
  EXPECT_EQ(error_kind([&] { build_matrix_report(cells); }), ErrorKind::kInvalidArgument);
}

TEST(MatrixReport, SeedsAreAveraged) {
  EvalResult a{"t", "sae", "x", EvalMode::kF, MetricKind::kAccuracy, 60.0};
  EvalResult b = a;
  b.value = 70.0;
  const std::vector<EvalResult> both{a, b};
  const auto avg = average_over_seeds(both);
  ASSERT_EQ(avg.size(), 1u);
  EXPECT_DOUBLE_EQ(avg[0].value, 65.0);
}

}  // namespace
}  // namespace dtta
