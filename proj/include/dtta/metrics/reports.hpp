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

#ifndef DTTA_METRICS_REPORTS_HPP_
#define DTTA_METRICS_REPORTS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/metrics/metrics.hpp"
#include "dtta/util/text.hpp"

namespace dtta {

// Printed tables carry two decimals; comparisons against them allow one
// unit in the last place plus floating slack.
inline constexpr double kPrintedTolerance = 0.01 + 1e-9;

enum class Field { kF, kTta, kDelta };

inline std::string_view to_string(Field f) {
  switch (f) {
    case Field::kF: return "F";
    case Field::kTta: return "TTA";
    case Field::kDelta: return "delta";
  }
  return "?";
}

inline Field parse_field(std::string_view s) {
  if (s == "F" || s == "f") return Field::kF;
  if (s == "TTA" || s == "tta") return Field::kTta;
  if (s == "delta" || s == "Δ") return Field::kDelta;
  fail(ErrorKind::kInvalidArgument, "unknown report field '" + std::string(s) + "'");
}

struct Triple {
  std::optional<double> f;
  std::optional<double> tta;
  std::optional<double> delta;

  std::optional<double> get(Field which) const {
    return which == Field::kF ? f : which == Field::kTta ? tta : delta;
  }
};

// One task's train x eval grid. `dialects` holds every dialect seen, the
// reference first; `columns` lists the eval dialects shown in the table.
struct TaskMatrix {
  std::string task;
  MetricKind metric = MetricKind::kAccuracy;
  bool rescaled = false;
  std::vector<std::string> dialects;
  std::vector<std::string> columns;
  std::map<std::pair<std::string, std::string>, Triple> cells;  // (train, eval)
  std::map<std::string, Triple> row_average;
  std::map<std::string, Triple> column_average;
  Triple corner;

  Triple cell(const std::string& train, const std::string& eval) const {
    auto it = cells.find({train, eval});
    return it == cells.end() ? Triple{} : it->second;
  }

  // `row` or `column` may be "average".
  std::optional<double> lookup(const std::string& row, const std::string& column,
                               Field which) const {
    if (row == "average" && column == "average") return corner.get(which);
    if (row == "average") {
      auto it = column_average.find(column);
      return it == column_average.end() ? std::nullopt : it->second.get(which);
    }
    if (column == "average") {
      auto it = row_average.find(row);
      return it == row_average.end() ? std::nullopt : it->second.get(which);
    }
    return cell(row, column).get(which);
  }
};

struct MatrixReport {
  std::string reference;
  std::vector<TaskMatrix> tasks;
  std::optional<TaskMatrix> cross_task;  // mean over tasks, MCC rescaled

  const TaskMatrix& task(std::string_view name) const {
    for (const auto& t : tasks)
      if (t.task == name) return t;
    fail(ErrorKind::kInvalidArgument, "report has no task '" + std::string(name) + "'");
  }
};

struct ReportOptions {
  std::string reference = "sae";
  std::vector<std::string> dialect_order;  // empty: order of first appearance
  bool cross_task = false;
  bool reference_column = false;  // show eval on the reference dialect
};

namespace detail {

inline std::optional<double> mean_present(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline void finish_matrix(TaskMatrix& m) {
  for (auto& [key, c] : m.cells) {
    c.delta.reset();
    if (c.f && c.tta) c.delta = *c.tta - *c.f;
  }
  auto average = [&](auto&& select) {
    std::vector<std::optional<double>> f, tta, delta;
    for (const Triple* t : select) {
      f.push_back(t->f);
      tta.push_back(t->tta);
      delta.push_back(t->delta);
    }
    return Triple{mean_present(f), mean_present(tta), mean_present(delta)};
  };
  std::vector<const Triple*> all;
  for (const auto& train : m.dialects) {
    std::vector<const Triple*> row;
    for (const auto& eval : m.columns) {
      auto it = m.cells.find({train, eval});
      if (it != m.cells.end()) row.push_back(&it->second);
    }
    all.insert(all.end(), row.begin(), row.end());
    m.row_average[train] = average(row);
  }
  for (const auto& eval : m.columns) {
    std::vector<const Triple*> col;
    for (const auto& train : m.dialects) {
      auto it = m.cells.find({train, eval});
      if (it != m.cells.end()) col.push_back(&it->second);
    }
    m.column_average[eval] = average(col);
  }
  m.corner = average(all);
}

inline std::vector<std::string> order_dialects(std::vector<std::string> seen,
                                               const ReportOptions& opt) {
  std::vector<std::string> out;
  auto push = [&](const std::string& d) {
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  };
  if (std::find(seen.begin(), seen.end(), opt.reference) != seen.end()) push(opt.reference);
  for (const auto& d : opt.dialect_order)
    if (std::find(seen.begin(), seen.end(), d) != seen.end()) push(d);
  for (const auto& d : seen) push(d);
  return out;
}

}  // namespace detail

// Mean over repeated (task, train, eval, mode) results, e.g. one per seed.
// Output keeps the order of first appearance.
inline std::vector<EvalResult> average_over_seeds(std::span<const EvalResult> results) {
  using Key = std::tuple<std::string, std::string, std::string, EvalMode>;
  std::vector<Key> order;
  std::map<Key, std::pair<EvalResult, std::size_t>> acc;
  for (const auto& r : results) {
    Key key{r.task, r.train_dialect, r.eval_dialect, r.mode};
    auto [it, inserted] = acc.try_emplace(key, r, 0);
    if (inserted) {
      order.push_back(key);
      it->second.first.value = 0.0;
    }
    require(it->second.first.metric == r.metric, ErrorKind::kInvalidArgument,
            "seed averaging: task '" + r.task + "' mixes metric kinds");
    it->second.first.value += r.value;
    ++it->second.second;
  }
  std::vector<EvalResult> out;
  for (const auto& key : order) {
    auto& [r, n] = acc.at(key);
    r.value /= static_cast<double>(n);
    out.push_back(r);
  }
  return out;
}

// Train x eval grids per task with Δ = TTA - F and averages over the
// shown cells. At most one result per (task, train, eval, mode).
inline MatrixReport build_matrix_report(std::span<const EvalResult> results,
                                        const ReportOptions& opt = {}) {
  check_tag(opt.reference, "reference dialect");
  MatrixReport report;
  report.reference = opt.reference;
  std::vector<std::string> task_order, dialects_seen;
  std::map<std::string, TaskMatrix> by_task;
  std::map<std::tuple<std::string, std::string, std::string, EvalMode>, bool> seen;
  for (const auto& r : results) {
    r.validate();
    check_tag(r.task, "task");
    check_tag(r.train_dialect, "dialect");
    check_tag(r.eval_dialect, "dialect");
    const bool fresh = seen.emplace(std::tuple{r.task, r.train_dialect, r.eval_dialect, r.mode}, true).second;
    require(fresh, ErrorKind::kInvalidArgument,
            "matrix report: duplicate cell " + r.task + "/" + r.train_dialect + "->" +
                r.eval_dialect + " (" + std::string(to_string(r.mode)) + ")");
    auto [it, inserted] = by_task.try_emplace(r.task);
    TaskMatrix& m = it->second;
    if (inserted) {
      task_order.push_back(r.task);
      m.task = r.task;
      m.metric = r.metric;
    }
    require(m.metric == r.metric, ErrorKind::kInvalidArgument,
            "matrix report: task '" + r.task + "' mixes metric kinds");
    Triple& c = m.cells[{r.train_dialect, r.eval_dialect}];
    (r.mode == EvalMode::kF ? c.f : c.tta) = r.value;
    for (const auto* d : {&r.train_dialect, &r.eval_dialect})
      if (std::find(dialects_seen.begin(), dialects_seen.end(), *d) == dialects_seen.end())
        dialects_seen.push_back(*d);
  }
  const std::vector<std::string> dialects = detail::order_dialects(dialects_seen, opt);
  std::vector<std::string> columns;
  for (const auto& d : dialects)
    if (opt.reference_column || d != opt.reference) columns.push_back(d);

  for (const auto& name : task_order) {
    TaskMatrix m = std::move(by_task.at(name));
    m.dialects = dialects;
    m.columns = columns;
    detail::finish_matrix(m);
    report.tasks.push_back(std::move(m));
  }

  if (opt.cross_task && !report.tasks.empty()) {
    TaskMatrix avg;
    avg.task = "average";
    avg.rescaled = true;
    avg.dialects = dialects;
    avg.columns = columns;
    for (const auto& train : dialects) {
      for (const auto& eval : dialects) {
        Triple sum{0.0, 0.0, std::nullopt};
        for (const auto& m : report.tasks) {
          const Triple c = m.cell(train, eval);
          if (sum.f && c.f) *sum.f += gap_scale(*c.f, m.metric);
          else sum.f.reset();
          if (sum.tta && c.tta) *sum.tta += gap_scale(*c.tta, m.metric);
          else sum.tta.reset();
        }
        const double n = static_cast<double>(report.tasks.size());
        if (sum.f) *sum.f /= n;
        if (sum.tta) *sum.tta /= n;
        if (sum.f || sum.tta) avg.cells[{train, eval}] = sum;
      }
    }
    detail::finish_matrix(avg);
    report.cross_task = std::move(avg);
  }

  // Internal consistency: every Δ is the difference of its own cells.
  auto check = [](const TaskMatrix& m) {
    for (const auto& [key, c] : m.cells) {
      if (c.delta) {
        require(c.f && c.tta && *c.delta == *c.tta - *c.f, ErrorKind::kInternal,
                "matrix report: inconsistent delta at " + key.first + "->" + key.second);
      }
    }
  };
  for (const auto& m : report.tasks) check(m);
  if (report.cross_task) check(*report.cross_task);
  return report;
}

// A value printed in a published table, addressed by (task, row, column,
// field); row and column may be "average".
struct PrintedValue {
  std::string task;
  std::string row;
  std::string column;
  Field field = Field::kF;
  double value = 0.0;
};

struct Discrepancy {
  PrintedValue printed;
  std::optional<double> recomputed;
};

// Printed values that the report cannot reproduce within the tolerance.
inline std::vector<Discrepancy> flag_discrepancies(const MatrixReport& report,
                                                   std::span<const PrintedValue> printed,
                                                   double tolerance = kPrintedTolerance) {
  std::vector<Discrepancy> out;
  for (const auto& p : printed) {
    const TaskMatrix& m =
        p.task == "average" && report.cross_task ? *report.cross_task : report.task(p.task);
    const std::optional<double> v = m.lookup(p.row, p.column, p.field);
    if (!v || std::abs(*v - p.value) > tolerance) out.push_back({p, v});
  }
  return out;
}

inline std::vector<PrintedValue> read_printed_values(std::string_view text,
                                                     const std::string& source) {
  const CsvTable t = parse_csv(text, source);
  require(t.header == std::vector<std::string>{"task", "row", "column", "field", "value"},
          ErrorKind::kFormat, source + ": expected header task,row,column,field,value");
  std::vector<PrintedValue> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = source + ":" + std::to_string(t.line_numbers[i]);
    out.push_back({r[0], r[1], r[2], parse_field(r[3]), parse_number(r[4], where)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix CSV: one row per (task, train, eval) with any value.

inline constexpr char kMatrixCsvHeader[] = "task,metric,train,eval,f,tta,delta";

inline std::string matrix_csv(const MatrixReport& report) {
  std::ostringstream os;
  os << kMatrixCsvHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_exact(*v) : std::string(); };
  for (const auto& m : report.tasks) {
    for (const auto& train : m.dialects) {
      for (const auto& eval : m.dialects) {
        auto it = m.cells.find({train, eval});
        if (it == m.cells.end()) continue;
        const Triple& c = it->second;
        os << m.task << ',' << to_string(m.metric) << ',' << train << ',' << eval << ','
           << opt(c.f) << ',' << opt(c.tta) << ',' << opt(c.delta) << '\n';
      }
    }
  }
  return os.str();
}

struct MatrixCsv {
  std::vector<EvalResult> results;
  std::size_t checked_deltas = 0;  // rows whose printed Δ was verified
};

// Reads the matrix CSV layout. A non-empty delta column is checked against
// tta - f at the printed precision.
inline MatrixCsv read_matrix_csv(std::string_view text, const std::string& source) {
  const CsvTable t = parse_csv(text, source);
  require(t.header == split_fields(kMatrixCsvHeader), ErrorKind::kFormat,
          source + ": expected header " + std::string(kMatrixCsvHeader));
  MatrixCsv out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = source + ":" + std::to_string(t.line_numbers[i]);
    EvalResult base;
    base.task = r[0];
    base.metric = parse_metric_kind(r[1]);
    base.train_dialect = r[2];
    base.eval_dialect = r[3];
    std::optional<double> f, tta;
    if (!r[4].empty()) f = parse_number(r[4], where);
    if (!r[5].empty()) tta = parse_number(r[5], where);
    require(f || tta, ErrorKind::kFormat, where + ": row has neither f nor tta");
    if (f) {
      EvalResult e = base;
      e.value = *f;
      out.results.push_back(e);
    }
    if (tta) {
      EvalResult e = base;
      e.mode = EvalMode::kTta;
      e.value = *tta;
      out.results.push_back(e);
    }
    if (!r[6].empty()) {
      const double delta = parse_number(r[6], where);
      require(f && tta, ErrorKind::kFormat, where + ": delta given without both f and tta");
      require(std::abs(delta - (*tta - *f)) <= kPrintedTolerance, ErrorKind::kFormat,
              where + ": delta " + r[6] + " disagrees with tta - f = " +
                  format_exact(*tta - *f));
      ++out.checked_deltas;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Markdown, laid out like the published tables.

namespace detail {

inline std::string cell_md(const std::optional<double>& v) { return v ? format_2dp(*v) : ""; }

inline void md_row(std::ostringstream& os, const std::vector<std::string>& cells) {
  os << '|';
  for (const auto& c : cells) os << ' ' << c << " |";
  os << '\n';
}

inline void md_rule(std::ostringstream& os, std::size_t n) {
  os << '|';
  for (std::size_t i = 0; i < n; ++i) os << " --- |";
  os << '\n';
}

inline void matrix_md_block(std::ostringstream& os, const TaskMatrix& m, bool with_task) {
  for (const auto& train : m.dialects) {
    std::vector<std::string> row;
    if (with_task) row.push_back(m.task);
    row.push_back(train);
    for (const auto& eval : m.columns) {
      const Triple c = m.cell(train, eval);
      row.insert(row.end(), {cell_md(c.f), cell_md(c.tta), cell_md(c.delta)});
    }
    const Triple& a = m.row_average.at(train);
    row.insert(row.end(), {cell_md(a.f), cell_md(a.tta), cell_md(a.delta)});
    md_row(os, row);
  }
  std::vector<std::string> row;
  if (with_task) row.push_back(m.task);
  row.push_back("Average");
  for (const auto& eval : m.columns) {
    const Triple& a = m.column_average.at(eval);
    row.insert(row.end(), {cell_md(a.f), cell_md(a.tta), cell_md(a.delta)});
  }
  row.insert(row.end(), {cell_md(m.corner.f), cell_md(m.corner.tta), cell_md(m.corner.delta)});
  md_row(os, row);
}

inline std::vector<std::string> matrix_md_header(const TaskMatrix& m, bool with_task,
                                                 const char* before, const char* after) {
  std::vector<std::string> h;
  if (with_task) h.push_back("Task");
  h.push_back("Train");
  for (const auto& eval : m.columns) {
    h.push_back(eval + " " + before);
    h.push_back(eval + " " + after);
    h.push_back(eval + " Δ");
  }
  h.push_back(std::string("Average ") + before);
  h.push_back(std::string("Average ") + after);
  h.push_back("Average Δ");
  return h;
}

}  // namespace detail

inline std::string matrix_markdown(const MatrixReport& report,
                                   std::span<const Discrepancy> flagged = {}) {
  std::ostringstream os;
  if (!report.tasks.empty()) {
    const auto header = detail::matrix_md_header(report.tasks.front(), true, "F", "TTA");
    detail::md_row(os, header);
    detail::md_rule(os, header.size());
    for (const auto& m : report.tasks) detail::matrix_md_block(os, m, true);
    os << '\n';
    for (const auto& m : report.tasks) {
      const Triple self = m.cell(report.reference, report.reference);
      if (self.f) {
        os << m.task << ' ' << report.reference << " on " << report.reference << ": "
           << format_2dp(*self.f) << " (" << to_string(m.metric) << ")\n";
      }
    }
  }
  if (report.cross_task) {
    os << "\nAverage over tasks (MCC rescaled to [0, 100]):\n\n";
    const auto header = detail::matrix_md_header(*report.cross_task, false, "B", "A");
    detail::md_row(os, header);
    detail::md_rule(os, header.size());
    detail::matrix_md_block(os, *report.cross_task, false);
  }
  if (!flagged.empty()) {
    os << "\nPrinted values not reproduced by the cells (recomputed in brackets):\n\n";
    for (const auto& d : flagged) {
      os << "- " << d.printed.task << ' ' << d.printed.row << " / " << d.printed.column << ' '
         << to_string(d.printed.field) << ": printed " << format_2dp(d.printed.value) << " ["
         << (d.recomputed ? format_2dp(*d.recomputed) : std::string("n/a")) << "]\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Gap report: per (task, dialect) gap against the reference self cell and
// the reference-trained Δ, plus the Pearson correlation over all pairs.

struct GapEntry {
  std::string task;
  MetricKind metric = MetricKind::kAccuracy;
  std::string dialect;
  double gap = 0.0;
  std::optional<double> delta;
};

struct GapReport {
  std::string reference;
  std::vector<std::string> tasks;
  std::vector<std::string> dialects;
  std::vector<GapEntry> entries;
  std::map<std::string, double> average_gap;
  std::optional<PearsonResult> pearson;
  std::string pearson_note;  // why pearson is absent

  const GapEntry& entry(std::string_view task, std::string_view dialect) const {
    for (const auto& e : entries)
      if (e.task == task && e.dialect == dialect) return e;
    fail(ErrorKind::kInvalidArgument,
         "gap report has no entry " + std::string(task) + "/" + std::string(dialect));
  }
};

// With `require_pearson`, an undefined correlation is an error instead of
// a note in the report.
inline GapReport build_gap_report(const MatrixReport& matrix, bool require_pearson = false) {
  GapReport out;
  out.reference = matrix.reference;
  std::vector<double> xs, ys;
  for (const auto& m : matrix.tasks) {
    const Triple self = m.cell(matrix.reference, matrix.reference);
    require(self.f.has_value(), ErrorKind::kInvalidArgument,
            "gap: task '" + m.task + "' has no " + matrix.reference + " self-cell (F of " +
                matrix.reference + " on " + matrix.reference + ")");
    std::vector<std::string> dialects;
    std::vector<double> cross;
    for (const auto& d : m.columns) {
      if (d == matrix.reference) continue;
      const Triple c = m.cell(matrix.reference, d);
      if (!c.f) continue;
      dialects.push_back(d);
      cross.push_back(*c.f);
    }
    if (cross.empty()) continue;
    out.tasks.push_back(m.task);
    const GapResult g = dialectal_gap(*self.f, cross, m.metric);
    out.average_gap[m.task] = g.average;
    for (std::size_t i = 0; i < dialects.size(); ++i) {
      if (std::find(out.dialects.begin(), out.dialects.end(), dialects[i]) == out.dialects.end())
        out.dialects.push_back(dialects[i]);
      GapEntry e{m.task, m.metric, dialects[i], g.gaps[i], m.cell(matrix.reference, dialects[i]).delta};
      if (e.delta) {
        xs.push_back(e.gap);
        ys.push_back(*e.delta);
      }
      out.entries.push_back(std::move(e));
    }
  }
  require(!out.entries.empty(), ErrorKind::kInvalidArgument,
          "gap: no cross-dialect cells for reference '" + matrix.reference + "'");
  try {
    out.pearson = pearson(xs, ys);
  } catch (const Error& e) {
    if (require_pearson) throw;
    out.pearson_note = e.what();
  }
  return out;
}

inline std::string gap_csv(const GapReport& r) {
  std::ostringstream os;
  os << "task,metric,dialect,gap,delta\n";
  for (const auto& t : r.tasks) {
    MetricKind metric = MetricKind::kAccuracy;
    std::vector<std::optional<double>> deltas;
    for (const auto& e : r.entries) {
      if (e.task != t) continue;
      metric = e.metric;
      deltas.push_back(e.delta);
      os << e.task << ',' << to_string(e.metric) << ',' << e.dialect << ','
         << format_exact(e.gap) << ',' << (e.delta ? format_exact(*e.delta) : std::string())
         << '\n';
    }
    const auto mean_delta = detail::mean_present(deltas);
    os << t << ',' << to_string(metric) << ",average," << format_exact(r.average_gap.at(t)) << ','
       << (mean_delta ? format_exact(*mean_delta) : std::string()) << '\n';
  }
  return os.str();
}

inline std::string correlation_csv(const GapReport& r) {
  std::ostringstream os;
  os << "n,r,p\n";
  if (r.pearson) {
    os << r.pearson->n << ',' << format_exact(r.pearson->r) << ',' << format_exact(r.pearson->p)
       << '\n';
  }
  return os.str();
}

inline std::string gap_markdown(const GapReport& r) {
  std::ostringstream os;
  std::vector<std::string> header{"Task", ""};
  header.insert(header.end(), r.dialects.begin(), r.dialects.end());
  detail::md_row(os, header);
  detail::md_rule(os, header.size());
  for (const auto& t : r.tasks) {
    std::vector<std::string> gap_row{t, "Gap"}, delta_row{"", "Δ"};
    for (const auto& d : r.dialects) {
      const GapEntry* found = nullptr;
      for (const auto& e : r.entries)
        if (e.task == t && e.dialect == d) found = &e;
      gap_row.push_back(found ? format_2dp(found->gap) : "");
      delta_row.push_back(found ? detail::cell_md(found->delta) : "");
    }
    detail::md_row(os, gap_row);
    detail::md_row(os, delta_row);
  }
  os << "\nGaps are measured against " << r.reference
     << "; MCC tasks are rescaled to [0, 100] first.\n";
  for (const auto& t : r.tasks) os << "Average gap, " << t << ": " << format_2dp(r.average_gap.at(t)) << '\n';
  if (r.pearson) {
    os << "Pearson (gap vs Δ): r = " << fmt::format("{:.4f}", r.pearson->r)
       << ", p = " << fmt::format("{:.4f}", r.pearson->p) << ", n = " << r.pearson->n << '\n';
  } else {
    os << "Pearson (gap vs Δ): undefined (" << r.pearson_note << ")\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Comparison of dialect-finetuned, reference-finetuned and adapted models
// evaluated on each dialect.

struct ComparisonEntry {
  double dialect_f = 0.0;   // trained and evaluated on the dialect
  double reference_f = 0.0; // trained on the reference, evaluated on the dialect
  double shot = 0.0;        // reference-trained, adapted to the dialect

  double shot_minus_reference() const { return shot - reference_f; }
  double dialect_minus_shot() const { return dialect_f - shot; }
};

struct ComparisonReport {
  std::string reference;
  std::vector<std::string> tasks;
  std::vector<std::string> dialects;
  std::map<std::pair<std::string, std::string>, ComparisonEntry> entries;  // (dialect, task)
  std::map<std::string, ComparisonEntry> averages;                         // per task

  const ComparisonEntry& at(const std::string& dialect, const std::string& task) const {
    auto it = entries.find({dialect, task});
    require(it != entries.end(), ErrorKind::kInvalidArgument,
            "comparison report has no entry " + task + "/" + dialect);
    return it->second;
  }
};

inline ComparisonReport build_comparison_report(const MatrixReport& matrix) {
  ComparisonReport out;
  out.reference = matrix.reference;
  for (const auto& m : matrix.tasks) {
    out.tasks.push_back(m.task);
    ComparisonEntry sum;
    std::size_t n = 0;
    for (const auto& d : m.dialects) {
      if (d == matrix.reference) continue;
      const Triple own = m.cell(d, d), ref = m.cell(matrix.reference, d);
      auto need = [&](bool ok, const std::string& what) {
        require(ok, ErrorKind::kInvalidArgument,
                "comparison: task '" + m.task + "', dialect '" + d + "' is missing " + what);
      };
      need(own.f.has_value(), "the dialect-finetuned F cell (" + d + " on " + d + ")");
      need(ref.f.has_value(), "the " + matrix.reference + "-finetuned F cell");
      need(ref.tta.has_value(), "the adapted cell (" + matrix.reference + " -> " + d + " TTA)");
      if (std::find(out.dialects.begin(), out.dialects.end(), d) == out.dialects.end())
        out.dialects.push_back(d);
      const ComparisonEntry e{*own.f, *ref.f, *ref.tta};
      out.entries[{d, m.task}] = e;
      sum.dialect_f += e.dialect_f;
      sum.reference_f += e.reference_f;
      sum.shot += e.shot;
      ++n;
    }
    require(n > 0, ErrorKind::kInvalidArgument,
            "comparison: task '" + m.task + "' has no non-reference dialect");
    sum.dialect_f /= static_cast<double>(n);
    sum.reference_f /= static_cast<double>(n);
    sum.shot /= static_cast<double>(n);
    out.averages[m.task] = sum;
  }
  require(!out.tasks.empty(), ErrorKind::kInvalidArgument, "comparison: no results");
  return out;
}

inline ComparisonReport build_comparison_report(std::span<const EvalResult> results,
                                                const ReportOptions& opt = {}) {
  return build_comparison_report(build_matrix_report(results, opt));
}

inline std::string comparison_csv(const ComparisonReport& r) {
  std::ostringstream os;
  os << "dialect,task,dialect_finetuned,reference_finetuned,shot,shot_minus_reference,"
        "dialect_minus_shot\n";
  auto row = [&](const std::string& d, const std::string& t, const ComparisonEntry& e) {
    os << d << ',' << t << ',' << format_exact(e.dialect_f) << ',' << format_exact(e.reference_f)
       << ',' << format_exact(e.shot) << ',' << format_exact(e.shot_minus_reference()) << ','
       << format_exact(e.dialect_minus_shot()) << '\n';
  };
  for (const auto& d : r.dialects)
    for (const auto& t : r.tasks)
      if (r.entries.count({d, t})) row(d, t, r.entries.at({d, t}));
  for (const auto& t : r.tasks) row("average", t, r.averages.at(t));
  return os.str();
}

inline std::string comparison_markdown(const ComparisonReport& r) {
  std::ostringstream os;
  std::vector<std::string> header{""};
  const std::string ref = r.reference;
  const std::vector<std::string> groups{"Dialect-finetuned", ref + "-finetuned", "SHOT on " + ref,
                                        "SHOT - " + ref + "-finetuned", "Dialect-finetuned - SHOT"};
  for (const auto& group : groups)
    for (const auto& t : r.tasks) header.push_back(group + " " + t);
  detail::md_row(os, header);
  detail::md_rule(os, header.size());
  auto emit = [&](const std::string& label, auto&& get) {
    std::vector<std::string> row{label};
    for (int col = 0; col < 5; ++col) {
      for (const auto& t : r.tasks) {
        const ComparisonEntry* e = get(t);
        if (!e) {
          row.push_back("");
          continue;
        }
        const double v = col == 0   ? e->dialect_f
                         : col == 1 ? e->reference_f
                         : col == 2 ? e->shot
                         : col == 3 ? e->shot_minus_reference()
                                    : e->dialect_minus_shot();
        row.push_back(format_2dp(v));
      }
    }
    detail::md_row(os, row);
  };
  for (const auto& d : r.dialects) {
    emit(d, [&](const std::string& t) -> const ComparisonEntry* {
      auto it = r.entries.find({d, t});
      return it == r.entries.end() ? nullptr : &it->second;
    });
  }
  emit("Average", [&](const std::string& t) -> const ComparisonEntry* { return &r.averages.at(t); });
  return os.str();
}

}  // namespace dtta

#endif  // DTTA_METRICS_REPORTS_HPP_
