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

// Command-line front end. Exit status: 0 ok, 1 user error, 2 internal error.
// Failures print one line: "error: <kind>: <message>".

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtta/dtta.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Format { kCsv, kMd };

struct Options {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::string data;
  std::string model;
  std::string reference = "sae";
  std::string printed;
  bool skip_completed = false;
  bool cross_task = false;
  std::string format = "csv";
};

Format format_of(const Options& o) {
  if (o.format == "csv") return Format::kCsv;
  if (o.format == "md") return Format::kMd;
  dtta::fail(dtta::ErrorKind::kInvalidArgument, "--format must be csv or md");
}

json read_json(const std::string& path) {
  try {
    return json::parse(dtta::read_text(path));
  } catch (const json::exception& e) {
    dtta::fail(dtta::ErrorKind::kInvalidArgument, path + ": " + e.what());
  }
}

std::optional<std::uint64_t> single_seed(const Options& o) {
  if (o.seeds.empty()) return std::nullopt;
  dtta::require(o.seeds.size() == 1, dtta::ErrorKind::kInvalidArgument,
                "this command takes a single --seed");
  return o.seeds.front();
}

dtta::HyperParams hyperparams_of(const Options& o) {
  dtta::HyperParams hp;
  if (!o.config.empty()) hp = dtta::hyperparams_from_json(read_json(o.config));
  if (auto s = single_seed(o)) hp.seed = *s;
  hp.validate();
  return hp;
}

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    const std::map<std::string, std::string>& outputs) {
  dtta::write_text(path, dtta::run_manifest(command, config, outputs).dump(2) + "\n");
}

// Prints `text`, or writes it to --out with a manifest beside it.
void emit(const Options& o, const std::string& command, const json& config,
          const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  dtta::write_text(out, text);
  write_manifest(o.out + ".manifest.json", command, config, {{out.filename().string(), text}});
}

std::string file_digest(const fs::path& p) {
  const auto bytes = dtta::read_file(p);
  return dtta::to_hex(dtta::sha256(bytes));
}

int cmd_synth(const Options& o) {
  dtta::ShiftConfig c;
  if (!o.config.empty()) c = dtta::shift_config_from_json(read_json(o.config));
  if (auto s = single_seed(o)) c.seed = *s;
  const auto [source, target] = dtta::gen_synthetic_shift(c);
  const fs::path out(o.out);
  dtta::save_dataset(source, out / "source");
  dtta::save_dataset(target, out / "target");
  const std::map<std::string, std::string> outputs{
      {"source/manifest.json", dtta::read_text(out / "source" / dtta::kManifestFile)},
      {"target/manifest.json", dtta::read_text(out / "target" / dtta::kManifestFile)}};
  write_manifest(out / "run_manifest.json", "synth", dtta::to_json(c), outputs);
  std::cout << "wrote " << (out / "source").string() << " and " << (out / "target").string()
            << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const dtta::HyperParams hp = hyperparams_of(o);
  const dtta::EmbeddedDataset ds = dtta::load_dataset(o.data);
  dtta::MetricsLog log;
  const auto model = dtta::train_source(ds, hp, &log);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  dtta::save_checkpoint(model, out);
  const std::string metrics = log.to_csv();
  dtta::write_text(o.out + ".metrics.csv", metrics);
  json config{{"hyperparams", dtta::to_json(hp)},
              {"data", dtta::sha256_hex(dtta::read_text(fs::path(o.data) / dtta::kManifestFile))}};
  json m = dtta::run_manifest("train", config, {{out.filename().string() + ".metrics.csv", metrics}});
  m["outputs"][out.filename().string()] = file_digest(out);
  dtta::write_text(o.out + ".manifest.json", m.dump(2) + "\n");
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

int cmd_adapt(const Options& o) {
  const dtta::HyperParams hp = hyperparams_of(o);
  const auto source = dtta::load_checkpoint(o.model);
  const dtta::EmbeddedDataset target = dtta::load_dataset(o.data);
  dtta::MetricsLog log;
  const auto adapted = dtta::adapt(source, target, hp, &log);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  dtta::save_checkpoint(adapted, out);
  const std::string metrics = log.to_csv();
  dtta::write_text(o.out + ".metrics.csv", metrics);
  json config{{"hyperparams", dtta::to_json(hp)},
              {"model", file_digest(o.model)},
              {"data", dtta::sha256_hex(dtta::read_text(fs::path(o.data) / dtta::kManifestFile))}};
  json m = dtta::run_manifest("adapt", config, {{out.filename().string() + ".metrics.csv", metrics}});
  m["outputs"][out.filename().string()] = file_digest(out);
  dtta::write_text(o.out + ".manifest.json", m.dump(2) + "\n");
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

int cmd_eval(const Options& o) {
  const Format f = format_of(o);
  const auto model = dtta::load_checkpoint(o.model);
  const dtta::EmbeddedDataset ds = dtta::load_dataset(o.data);
  const double value = dtta::evaluate(model, ds);
  const std::string metric(dtta::to_string(ds.manifest.metric));
  std::string text;
  if (f == Format::kCsv) {
    text = "task,dialect,metric,value\n" + ds.manifest.task + "," + ds.manifest.dialect + "," +
           metric + "," + dtta::format_exact(value) + "\n";
  } else {
    text = "| task | dialect | metric | value |\n|---|---|---|---|\n| " + ds.manifest.task +
           " | " + ds.manifest.dialect + " | " + metric + " | " + dtta::format_2dp(value) +
           " |\n";
  }
  json config{{"model", file_digest(o.model)},
              {"data", dtta::sha256_hex(dtta::read_text(fs::path(o.data) / dtta::kManifestFile))}};
  emit(o, "eval", config, text);
  return 0;
}

dtta::MatrixReport matrix_from_csv(const Options& o) {
  const auto parsed = dtta::read_matrix_csv(dtta::read_text(o.data), o.data);
  dtta::ReportOptions opt;
  opt.reference = o.reference;
  opt.cross_task = o.cross_task;
  return dtta::build_matrix_report(parsed.results, opt);
}

int cmd_matrix(const Options& o) {
  if (!o.data.empty()) {
    // Re-render a matrix CSV, optionally against printed values.
    const Format f = format_of(o);
    const dtta::MatrixReport report = matrix_from_csv(o);
    std::vector<dtta::Discrepancy> flagged;
    if (!o.printed.empty()) {
      const auto printed = dtta::read_printed_values(dtta::read_text(o.printed), o.printed);
      flagged = dtta::flag_discrepancies(report, printed);
    }
    const std::string text =
        f == Format::kCsv ? dtta::matrix_csv(report) : dtta::matrix_markdown(report, flagged);
    emit(o, "matrix", json{{"matrix", dtta::sha256_hex(dtta::read_text(o.data))}}, text);
    for (const auto& d : flagged) {
      std::cerr << "flagged: " << d.printed.task << ' ' << d.printed.row << '/'
                << d.printed.column << ' ' << dtta::to_string(d.printed.field) << " printed "
                << dtta::format_2dp(d.printed.value) << '\n';
    }
    return 0;
  }
  dtta::require(!o.config.empty(), dtta::ErrorKind::kInvalidArgument,
                "matrix needs --config (or --data with a matrix CSV)");
  dtta::ExperimentConfig cfg = dtta::load_experiment_config(o.config);
  if (!o.out.empty()) cfg.output = o.out;
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (o.skip_completed) cfg.skip_completed = true;
  if (o.cross_task) cfg.cross_task = true;
  const dtta::MatrixRun run = dtta::run_experiment_matrix(cfg, dtta::workers_from_env());
  dtta::write_matrix_outputs(run, cfg);
  for (const auto& c : run.cells) {
    if (c.error.empty()) continue;
    std::cerr << "cell failed: " << c.key.task << ' ' << c.key.train << "->" << c.key.eval << ' '
              << dtta::to_string(c.key.mode) << " seed " << c.key.seed << ": " << c.error << '\n';
  }
  std::cout << "cells " << run.cells.size() << ", failed " << run.failed() << ", trained "
            << run.work.trained << ", adapted " << run.work.adapted << ", from cache "
            << run.work.cells_from_cache << "\nwrote " << cfg.output.string() << '\n';
  return 0;
}

int cmd_gap(const Options& o) {
  const Format f = format_of(o);
  const dtta::GapReport gap = dtta::build_gap_report(matrix_from_csv(o), true);
  std::string text;
  if (f == Format::kCsv) text = dtta::gap_csv(gap) + "\n" + dtta::correlation_csv(gap);
  else text = dtta::gap_markdown(gap);
  emit(o, "gap", json{{"matrix", dtta::sha256_hex(dtta::read_text(o.data))}, {"sae", o.reference}},
       text);
  return 0;
}

int cmd_compare(const Options& o) {
  const Format f = format_of(o);
  const dtta::ComparisonReport r = dtta::build_comparison_report(matrix_from_csv(o));
  const std::string text =
      f == Format::kCsv ? dtta::comparison_csv(r) : dtta::comparison_markdown(r);
  emit(o, "compare",
       json{{"matrix", dtta::sha256_hex(dtta::read_text(o.data))}, {"sae", o.reference}}, text);
  return 0;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time adaptation across dialects"};
  app.set_version_flag("--version", std::string(dtta::kVersion));
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic source/target pair");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--config", o.config, "Shift config JSON");
  synth->add_option("--seed", o.seeds, "Seed");

  auto* train = app.add_subcommand("train", "Train a source model");
  train->add_option("--data", o.data, "Labeled dataset directory")->required();
  train->add_option("--out", o.out, "Checkpoint path")->required();
  train->add_option("--config", o.config, "Hyperparameter JSON");
  train->add_option("--seed", o.seeds, "Seed");

  auto* adapt = app.add_subcommand("adapt", "Adapt a source model to an unlabeled dataset");
  adapt->add_option("--model", o.model, "Source checkpoint")->required();
  adapt->add_option("--data", o.data, "Target dataset directory")->required();
  adapt->add_option("--out", o.out, "Adapted checkpoint path")->required();
  adapt->add_option("--config", o.config, "Hyperparameter JSON");
  adapt->add_option("--seed", o.seeds, "Seed");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled dataset");
  eval->add_option("--model", o.model, "Checkpoint")->required();
  eval->add_option("--data", o.data, "Dataset directory")->required();
  eval->add_option("--out", o.out, "Output file (default: stdout)");
  eval->add_option("--format", o.format, "csv or md");

  auto* matrix = app.add_subcommand("matrix", "Run the dialect matrix, or re-render a matrix CSV");
  matrix->add_option("--config", o.config, "Experiment config JSON");
  matrix->add_option("--out", o.out, "Output directory (run) or file (re-render)");
  matrix->add_option("--seed", o.seeds, "Seeds, overriding the config (repeatable)");
  matrix->add_flag("--skip-completed", o.skip_completed, "Reuse cached cells and models");
  matrix->add_flag("--cross-task", o.cross_task, "Add the average over tasks");
  matrix->add_option("--data", o.data, "Matrix CSV to re-render instead of running");
  matrix->add_option("--sae", o.reference, "Reference dialect tag");
  matrix->add_option("--printed", o.printed, "CSV of printed values to check");
  matrix->add_option("--format", o.format, "csv or md");

  auto* gap = app.add_subcommand("gap", "Dialect gaps and their correlation with TTA gains");
  gap->add_option("--data", o.data, "Matrix CSV")->required();
  gap->add_option("--sae", o.reference, "Reference dialect tag");
  gap->add_option("--out", o.out, "Output file (default: stdout)");
  gap->add_option("--format", o.format, "csv or md");

  auto* compare = app.add_subcommand("compare", "Dialect fine-tuning against adaptation");
  compare->add_option("--data", o.data, "Matrix CSV")->required();
  compare->add_option("--sae", o.reference, "Reference dialect tag");
  compare->add_option("--out", o.out, "Output file (default: stdout)");
  compare->add_option("--format", o.format, "csv or md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*train) return cmd_train(o);
    if (*adapt) return cmd_adapt(o);
    if (*eval) return cmd_eval(o);
    if (*matrix) return cmd_matrix(o);
    if (*gap) return cmd_gap(o);
    if (*compare) return cmd_compare(o);
  } catch (const dtta::Error& e) {
    std::cerr << "error: " << dtta::to_string(e.kind()) << ": " << one_line(e.what()) << '\n';
    return e.kind() == dtta::ErrorKind::kInternal ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << '\n';
    return 2;
  }
  return 2;
}
