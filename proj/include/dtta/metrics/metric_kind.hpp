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

#ifndef DTTA_METRICS_METRIC_KIND_HPP_
#define DTTA_METRICS_METRIC_KIND_HPP_

#include <string>
#include <string_view>

#include "dtta/error.hpp"

namespace dtta {

// GLUE convention: CoLA reports MCC, SST-2 and RTE report accuracy.
enum class MetricKind { kAccuracy, kMcc };

inline std::string_view to_string(MetricKind k) {
  return k == MetricKind::kMcc ? "mcc" : "accuracy";
}

inline MetricKind parse_metric_kind(std::string_view s) {
  if (s == "accuracy") return MetricKind::kAccuracy;
  if (s == "mcc") return MetricKind::kMcc;
  fail(ErrorKind::kInvalidArgument, "unknown metric kind '" + std::string(s) + "'");
}

}  // namespace dtta

#endif  // DTTA_METRICS_METRIC_KIND_HPP_
