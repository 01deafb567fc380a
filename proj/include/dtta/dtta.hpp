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

#ifndef DTTA_DTTA_HPP_
#define DTTA_DTTA_HPP_

#include "dtta/data/batching.hpp"
#include "dtta/data/dataset.hpp"
#include "dtta/data/synthetic.hpp"
#include "dtta/error.hpp"
#include "dtta/experiment/config.hpp"
#include "dtta/experiment/matrix.hpp"
#include "dtta/metrics/metric_kind.hpp"
#include "dtta/metrics/metrics.hpp"
#include "dtta/metrics/reports.hpp"
#include "dtta/model/checkpoint.hpp"
#include "dtta/model/model.hpp"
#include "dtta/numerics/ops.hpp"
#include "dtta/numerics/optim.hpp"
#include "dtta/numerics/tensor.hpp"
#include "dtta/shot/hyperparams.hpp"
#include "dtta/shot/losses.hpp"
#include "dtta/shot/pseudo_label.hpp"
#include "dtta/shot/train.hpp"
#include "dtta/util/binary_io.hpp"
#include "dtta/util/sha256.hpp"
#include "dtta/util/text.hpp"
#include "dtta/version.hpp"

#endif  // DTTA_DTTA_HPP_
