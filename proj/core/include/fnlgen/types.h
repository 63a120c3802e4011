// Copyright 2026 The fnlgen Authors.
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

#ifndef FNLGEN_TYPES_H_
#define FNLGEN_TYPES_H_

#include <vector>

namespace fnlgen {

// A feature vector with its binary class label (1 = positive).
struct LabeledSample {
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

}  // namespace fnlgen

#endif  // FNLGEN_TYPES_H_
