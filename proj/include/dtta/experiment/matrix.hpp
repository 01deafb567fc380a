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

#ifndef DTTA_EXPERIMENT_MATRIX_HPP_
#define DTTA_EXPERIMENT_MATRIX_HPP_

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dtta/data/dataset.hpp"
#include "dtta/error.hpp"
#include "dtta/experiment/config.hpp"
#include "dtta/metrics/reports.hpp"
#include "dtta/model/checkpoint.hpp"
#include "dtta/shot/train.hpp"
#include "dtta/util/binary_io.hpp"
#include "dtta/util/text.hpp"
#include "dtta/version.hpp"
#include "json.hpp"

namespace dtta {

inline constexpr char kWorkersEnv[] = "DTTA_WORKERS";

struct CellKey {
  std::string task;
  std::string train;
  std::string eval;
  EvalMode mode = EvalMode::kF;
  std::uint64_t seed = 0;
};

struct CellRecord {
  CellKey key;
  MetricKind metric = MetricKind::kAccuracy;
  std::optional<double> value;
  std::string error;  // set when the cell failed
  bool cached = false;
};

struct WorkCounters {
  std::size_t trained = 0;
  std::size_t models_loaded = 0;
  std::size_t adapted = 0;
  std::size_t evaluated = 0;
  std::size_t cells_from_cache = 0;

  WorkCounters& operator+=(const WorkCounters& o) {
    trained += o.trained;
    models_loaded += o.models_loaded;
    adapted += o.adapted;
    evaluated += o.evaluated;
    cells_from_cache += o.cells_from_cache;
    return *this;
  }
};

struct MatrixReports {
  MatrixReport matrix;
  std::optional<GapReport> gap;
  std::string gap_note;
  std::optional<ComparisonReport> comparison;
  std::string comparison_note;
};

struct MatrixRun {
  std::string config_digest;
  std::vector<CellRecord> cells;
  MatrixReports reports;
  WorkCounters work;

  std::size_t failed() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += !c.error.empty();
    return n;
  }
};

// Worker count from the environment; 1 when unset.
inline std::size_t workers_from_env() {
  const char* raw = std::getenv(kWorkersEnv);
  if (raw == nullptr || *raw == '\0') return 1;
  const std::string s(raw);
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && v >= 1 && v <= 1024, ErrorKind::kInvalidArgument,
          std::string(kWorkersEnv) + " must be an integer in [1, 1024], got '" + s + "'");
  return static_cast<std::size_t>(v);
}

// ---------------------------------------------------------------------------
// Per-cell CSV, shared by the cache files and the run-wide cells.csv.

inline constexpr char kCellCsvHeader[] = "task,metric,train,eval,mode,seed,value,error";

inline std::string cell_csv_row(const CellRecord& c) {
  std::string error = c.error;
  for (char& ch : error)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ' ';
  std::ostringstream os;
  os << c.key.task << ',' << to_string(c.metric) << ',' << c.key.train << ',' << c.key.eval << ','
     << to_string(c.key.mode) << ',' << c.key.seed << ','
     << (c.value ? format_exact(*c.value) : std::string()) << ',' << error << '\n';
  return os.str();
}

inline std::string cells_csv(std::span<const CellRecord> cells) {
  std::string out = std::string(kCellCsvHeader) + "\n";
  for (const auto& c : cells) out += cell_csv_row(c);
  return out;
}

inline std::vector<CellRecord> read_cells_csv(std::string_view text, const std::string& source) {
  const CsvTable t = parse_csv(text, source);
  require(t.header == split_fields(kCellCsvHeader), ErrorKind::kFormat,
          source + ": expected header " + std::string(kCellCsvHeader));
  std::vector<CellRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = source + ":" + std::to_string(t.line_numbers[i]);
    CellRecord c;
    c.key.task = r[0];
    c.metric = parse_metric_kind(r[1]);
    c.key.train = r[2];
    c.key.eval = r[3];
    c.key.mode = parse_eval_mode(r[4]);
    c.key.seed = static_cast<std::uint64_t>(parse_number(r[5], where));
    if (!r[6].empty()) c.value = parse_number(r[6], where);
    c.error = r[7];
    require(c.value.has_value() != !c.error.empty(), ErrorKind::kFormat,
            where + ": exactly one of value and error must be set");
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------

// Reports from cell records alone: failed cells are left out and seeds are
// averaged per cell.
inline MatrixReports reports_from_cells(std::span<const CellRecord> cells,
                                        const ReportOptions& opt) {
  std::vector<EvalResult> results;
  for (const auto& c : cells) {
    if (!c.value) continue;
    results.push_back({c.key.task, c.key.train, c.key.eval, c.key.mode, c.metric, *c.value});
  }
  MatrixReports out;
  const auto averaged = average_over_seeds(results);
  out.matrix = build_matrix_report(averaged, opt);
  try {
    out.gap = build_gap_report(out.matrix);
  } catch (const Error& e) {
    out.gap_note = e.what();
  }
  try {
    out.comparison = build_comparison_report(out.matrix);
  } catch (const Error& e) {
    out.comparison_note = e.what();
  }
  return out;
}

namespace detail {

inline std::filesystem::path cell_cache_path(const std::filesystem::path& root,
                                             const std::string& digest, const CellKey& k) {
  return root / "cells" / digest.substr(0, 16) / k.task / k.train /
         (k.eval + "." + std::string(to_string(k.mode)) + ".s" + std::to_string(k.seed) + ".csv");
}

inline std::filesystem::path model_cache_path(const std::filesystem::path& root,
                                              const std::string& digest, const std::string& task,
                                              const std::string& train, std::uint64_t seed) {
  return root / "models" / digest.substr(0, 16) / task /
         (train + ".s" + std::to_string(seed) + ".ckpt");
}

inline std::optional<CellRecord> read_cached_cell(const std::filesystem::path& path,
                                                  const CellKey& key) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto rows = read_cells_csv(read_text(path), path.string());
    if (rows.size() != 1 || !rows[0].value) return std::nullopt;
    const CellKey& k = rows[0].key;
    if (k.task != key.task || k.train != key.train || k.eval != key.eval || k.mode != key.mode ||
        k.seed != key.seed)
      return std::nullopt;
    rows[0].cached = true;
    return rows[0];
  } catch (const Error&) {
    return std::nullopt;  // unreadable cache entries are recomputed
  }
}

// Writes to a temporary name first so a crash never leaves a partial file.
inline void write_atomically(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  write_text(tmp, text);
  std::filesystem::rename(tmp, path);
}

struct LoadedData {
  std::map<std::string, std::shared_ptr<const EmbeddedDataset>> sets;
  std::map<std::string, std::string> errors;

  const EmbeddedDataset& get(const std::filesystem::path& p) const {
    const std::string key = p.string();
    auto err = errors.find(key);
    if (err != errors.end()) throw Error(ErrorKind::kFormat, err->second);
    return *sets.at(key);
  }
};

struct Job {
  const TaskConfig* task = nullptr;
  const DialectPaths* train = nullptr;
  std::uint64_t seed = 0;
  std::vector<CellRecord> cells;
  WorkCounters work;
};

inline void run_job(Job& job, const ExperimentConfig& cfg, const std::string& digest,
                    const LoadedData& data) {
  const TaskConfig& task = *job.task;
  const DialectPaths& train = *job.train;
  std::vector<std::size_t> todo;
  for (const auto& d : task.dialects) {
    for (EvalMode mode : {EvalMode::kF, EvalMode::kTta}) {
      if (mode == EvalMode::kTta && d.name == train.name) continue;
      CellRecord c;
      c.key = {task.name, train.name, d.name, mode, job.seed};
      if (cfg.skip_completed) {
        if (auto hit = read_cached_cell(cell_cache_path(cfg.output, digest, c.key), c.key)) {
          job.cells.push_back(*hit);
          ++job.work.cells_from_cache;
          continue;
        }
      }
      todo.push_back(job.cells.size());
      job.cells.push_back(std::move(c));
    }
  }
  if (todo.empty()) return;

  HyperParams hp = cfg.hyperparams;
  hp.seed = job.seed;
  auto fail_all = [&](const std::string& msg) {
    for (std::size_t i : todo) job.cells[i].error = msg;
  };

  ModelState<float> model;
  try {
    const std::filesystem::path ckpt =
        model_cache_path(cfg.output, digest, task.name, train.name, job.seed);
    bool loaded = false;
    if (cfg.skip_completed && std::filesystem::exists(ckpt)) {
      try {
        model = load_checkpoint(ckpt);
        loaded = true;
        ++job.work.models_loaded;
      } catch (const Error&) {
        loaded = false;
      }
    }
    if (!loaded) {
      model = train_source(data.get(train.train), hp);
      ++job.work.trained;
      std::filesystem::create_directories(ckpt.parent_path());
      save_checkpoint(model, ckpt);
    }
  } catch (const std::exception& e) {
    fail_all(std::string("training failed: ") + e.what());
    return;
  }

  for (std::size_t i : todo) {
    CellRecord& c = job.cells[i];
    try {
      const DialectPaths* target = nullptr;
      for (const auto& d : task.dialects)
        if (d.name == c.key.eval) target = &d;
      const EmbeddedDataset& eval_set = data.get(target->eval);
      c.metric = eval_set.manifest.metric;
      if (c.key.mode == EvalMode::kF) {
        c.value = evaluate(model, eval_set);
      } else {
        const ModelState<float> adapted = adapt(model, data.get(target->adapt), hp);
        ++job.work.adapted;
        c.value = evaluate(adapted, eval_set);
      }
      ++job.work.evaluated;
      write_atomically(cell_cache_path(cfg.output, digest, c.key), std::string(kCellCsvHeader) +
                                                                       "\n" + cell_csv_row(c));
    } catch (const std::exception& e) {
      c.value.reset();
      c.error = e.what();
    }
  }
}

}  // namespace detail

// For each (task, train dialect, seed): train once, evaluate F on every
// dialect, adapt to every other dialect and evaluate TTA. Jobs run on a
// pool of `workers` threads; each owns its model, so results do not depend
// on scheduling. Failed cells carry an error and the run continues.
inline MatrixRun run_experiment_matrix(const ExperimentConfig& cfg, std::size_t workers = 1) {
  cfg.validate();
  MatrixRun run;
  run.config_digest = config_digest(cfg);

  detail::LoadedData data;
  for (const auto& t : cfg.tasks) {
    for (const auto& d : t.dialects) {
      for (const auto* p : {&d.train, &d.eval, &d.adapt}) {
        const std::string key = p->string();
        if (data.sets.count(key) || data.errors.count(key)) continue;
        try {
          data.sets[key] = std::make_shared<const EmbeddedDataset>(load_dataset(*p));
        } catch (const Error& e) {
          data.errors[key] = e.what();
        }
      }
    }
  }

  std::vector<detail::Job> jobs;
  for (const auto& t : cfg.tasks)
    for (const auto& d : t.dialects)
      for (std::uint64_t seed : cfg.seeds) jobs.push_back({&t, &d, seed, {}, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        detail::run_job(jobs[i], cfg, run.config_digest, data);
      } catch (const std::exception& e) {
        for (auto& c : jobs[i].cells)
          if (!c.value && c.error.empty()) c.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& job : jobs) {
    run.work += job.work;
    for (auto& c : job.cells) run.cells.push_back(std::move(c));
  }
  ReportOptions opt;
  opt.reference = cfg.reference;
  opt.dialect_order = cfg.dialect_order();
  opt.cross_task = cfg.cross_task;
  run.reports = reports_from_cells(run.cells, opt);
  return run;
}

// Report files written for a matrix run, keyed by file name.
inline std::map<std::string, std::string> render_reports(const MatrixReports& r,
                                                         std::span<const CellRecord> cells) {
  std::map<std::string, std::string> files;
  files["cells.csv"] = cells_csv(cells);
  files["matrix.csv"] = matrix_csv(r.matrix);
  files["matrix.md"] = matrix_markdown(r.matrix);
  if (r.gap) {
    files["gap.csv"] = gap_csv(*r.gap);
    files["gap.md"] = gap_markdown(*r.gap);
    files["correlation.csv"] = correlation_csv(*r.gap);
  }
  if (r.comparison) {
    files["comparison.csv"] = comparison_csv(*r.comparison);
    files["comparison.md"] = comparison_markdown(*r.comparison);
  }
  return files;
}

// Manifest written beside the outputs of any command. Deliberately free of
// timestamps and host details so identical runs produce identical bytes.
inline nlohmann::json run_manifest(const std::string& command, const nlohmann::json& config,
                                   const std::map<std::string, std::string>& outputs) {
  nlohmann::json m;
  m["tool"] = "dtta";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  m["config_digest"] = sha256_hex(config.dump());
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [name, text] : outputs) files[name] = sha256_hex(text);
  m["outputs"] = files;
  return m;
}

inline void write_matrix_outputs(const MatrixRun& run, const ExperimentConfig& cfg) {
  const auto files = render_reports(run.reports, run.cells);
  for (const auto& [name, text] : files) detail::write_atomically(cfg.output / name, text);
  nlohmann::json config{{"config_digest", run.config_digest},
                        {"reference", cfg.reference},
                        {"seeds", cfg.seeds},
                        {"hyperparams", to_json(cfg.hyperparams)}};
  nlohmann::json m = run_manifest("matrix", config, files);
  m["config_digest"] = run.config_digest;
  m["cells"] = {{"total", run.cells.size()}, {"failed", run.failed()}};
  m["work"] = {{"trained", run.work.trained},
               {"models_loaded", run.work.models_loaded},
               {"adapted", run.work.adapted},
               {"evaluated", run.work.evaluated},
               {"cells_from_cache", run.work.cells_from_cache}};
  if (!run.reports.gap_note.empty()) m["notes"]["gap"] = run.reports.gap_note;
  if (!run.reports.comparison_note.empty()) m["notes"]["comparison"] = run.reports.comparison_note;
  detail::write_atomically(cfg.output / "run_manifest.json", m.dump(2) + "\n");
}

}  // namespace dtta

#endif  // DTTA_EXPERIMENT_MATRIX_HPP_
