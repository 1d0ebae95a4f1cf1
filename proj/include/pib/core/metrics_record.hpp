// Copyright 2026 The pibnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <limits>

namespace pib {

// Scalars logged at one iteration. test_acc, temperature and energy are NaN
// when not applicable.
struct MetricsRecord {
  long iter = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = std::numeric_limits<double>::quiet_NaN();
  double iiw = 0.0;
  double lr = 0.0;
  double temperature = std::numeric_limits<double>::quiet_NaN();
  double energy = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace pib
