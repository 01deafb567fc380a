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

#ifndef DTTA_EXPERIMENT_CONFIG_HPP_
#define DTTA_EXPERIMENT_CONFIG_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtta/data/dataset.hpp"
#include "dtta/error.hpp"
#include "dtta/shot/hyperparams.hpp"
#include "dtta/util/binary_io.hpp"
#include "dtta/util/sha256.hpp"
#include "dtta/util/text.hpp"
#include "json.hpp"

namespace dtta {

inline constexpr int kExperimentConfigVersion = 1;

// Datasets for one dialect of one task. `train` is labeled source data,
// `eval` is labeled evaluation data, `adapt` is the unlabeled target set
// used for adaptation (defaults to `eval`).
struct DialectPaths {
  std::string name;
  std::filesystem::path train;
  std::filesystem::path eval;
  std::filesystem::path adapt;
};

struct TaskConfig {
  std::string name;
  std::vector<DialectPaths> dialects;
};

// Example:
//
//   {
//     "version": 1,
//     "reference": "sae",
//     "tasks": [
//       {"name": "cola",
//        "dialects": [
//          {"name": "sae", "train": "data/cola/sae/train", "eval": "data/cola/sae/dev"},
//          {"name": "indian", "train": "...", "eval": "...", "adapt": "..."}]}],
//     "hyperparams": {"epochs": 30},
//     "seeds": [42],
//     "output": "runs/cola",
//     "skip_completed": false,
//     "cross_task": false
//   }
//
// Relative paths resolve against the directory holding the config file.
struct ExperimentConfig {
  std::string reference = "sae";
  std::vector<TaskConfig> tasks;
  HyperParams hyperparams;
  std::vector<std::uint64_t> seeds{42};
  std::filesystem::path output = "runs";
  bool skip_completed = false;
  bool cross_task = false;

  // Paths must exist; matrix mode needs one task and two dialects.
  void validate() const {
    check_tag(reference, "reference dialect");
    require(!tasks.empty(), ErrorKind::kInvalidArgument, "config: at least one task is required");
    require(!seeds.empty(), ErrorKind::kInvalidArgument, "config: at least one seed is required");
    hyperparams.validate();
    std::vector<std::string> task_names;
    for (const auto& t : tasks) {
      check_tag(t.name, "task");
      require(std::find(task_names.begin(), task_names.end(), t.name) == task_names.end(),
              ErrorKind::kInvalidArgument, "config: duplicate task '" + t.name + "'");
      task_names.push_back(t.name);
      require(t.dialects.size() >= 2, ErrorKind::kInvalidArgument,
              "config: task '" + t.name + "' needs at least two dialects");
      std::vector<std::string> names;
      for (const auto& d : t.dialects) {
        check_tag(d.name, "dialect");
        require(std::find(names.begin(), names.end(), d.name) == names.end(),
                ErrorKind::kInvalidArgument,
                "config: task '" + t.name + "' lists dialect '" + d.name + "' twice");
        names.push_back(d.name);
        for (const auto* p : {&d.train, &d.eval, &d.adapt}) {
          require(std::filesystem::is_directory(*p), ErrorKind::kInvalidArgument,
                  "config: task '" + t.name + "', dialect '" + d.name + "': dataset " +
                      p->string() + " does not exist");
        }
      }
    }
  }

  std::vector<std::string> dialect_order() const {
    std::vector<std::string> out;
    for (const auto& t : tasks)
      for (const auto& d : t.dialects)
        if (std::find(out.begin(), out.end(), d.name) == out.end()) out.push_back(d.name);
    return out;
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
  require(j.is_object(), ErrorKind::kInvalidArgument, where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    require(ok, ErrorKind::kInvalidArgument, where + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& base_dir) {
  detail::reject_unknown(j,
                         {"version", "reference", "tasks", "hyperparams", "seeds", "output",
                          "skip_completed", "cross_task"},
                         "config");
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };
  try {
    require(j.contains("version"), ErrorKind::kInvalidArgument, "config: missing 'version'");
    const int version = j.at("version").get<int>();
    require(version == kExperimentConfigVersion, ErrorKind::kInvalidArgument,
            "config: unsupported version " + std::to_string(version));
    if (j.contains("reference")) c.reference = j.at("reference").get<std::string>();
    if (j.contains("hyperparams")) c.hyperparams = hyperparams_from_json(j.at("hyperparams"));
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("output")) c.output = resolve(j.at("output").get<std::string>());
    else c.output = resolve("runs");
    if (j.contains("skip_completed")) c.skip_completed = j.at("skip_completed").get<bool>();
    if (j.contains("cross_task")) c.cross_task = j.at("cross_task").get<bool>();
    require(j.contains("tasks") && j.at("tasks").is_array(), ErrorKind::kInvalidArgument,
            "config: 'tasks' must be an array");
    for (const auto& tj : j.at("tasks")) {
      detail::reject_unknown(tj, {"name", "dialects"}, "config task");
      TaskConfig t;
      t.name = tj.at("name").get<std::string>();
      for (const auto& dj : tj.at("dialects")) {
        detail::reject_unknown(dj, {"name", "train", "eval", "adapt"},
                               "config task '" + t.name + "' dialect");
        DialectPaths d;
        d.name = dj.at("name").get<std::string>();
        d.train = resolve(dj.at("train").get<std::string>());
        d.eval = resolve(dj.at("eval").get<std::string>());
        d.adapt = dj.contains("adapt") ? resolve(dj.at("adapt").get<std::string>()) : d.eval;
        t.dialects.push_back(std::move(d));
      }
      c.tasks.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

// Everything that can change a cell's value: tasks, dialects, dataset
// contents (through the manifest digests), hyperparameters and the
// reference. Seeds, output location and flags are excluded. Keys are
// sorted by the JSON library, so the digest is independent of formatting.
inline std::string config_digest(const ExperimentConfig& c) {
  auto dataset_id = [](const std::filesystem::path& dir) {
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(read_text(dir / kManifestFile));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, dir.string() + "/manifest.json: " + e.what());
    }
    return sha256_hex(m.dump());
  };
  nlohmann::json canon;
  canon["version"] = kExperimentConfigVersion;
  canon["reference"] = c.reference;
  canon["hyperparams"] = to_json(c.hyperparams);
  canon["tasks"] = nlohmann::json::array();
  for (const auto& t : c.tasks) {
    nlohmann::json tj{{"name", t.name}, {"dialects", nlohmann::json::array()}};
    for (const auto& d : t.dialects) {
      tj["dialects"].push_back({{"name", d.name},
                                {"train", dataset_id(d.train)},
                                {"eval", dataset_id(d.eval)},
                                {"adapt", dataset_id(d.adapt)}});
    }
    canon["tasks"].push_back(std::move(tj));
  }
  return sha256_hex(canon.dump());
}

}  // namespace dtta

#endif  // DTTA_EXPERIMENT_CONFIG_HPP_
