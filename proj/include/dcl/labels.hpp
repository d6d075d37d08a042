/* Copyright 2026 The DCL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <vector>

#include "dcl/geometry.hpp"

namespace dcl {

struct Detection {
  BBox box;
  int class_id = 0;
  double score = 0.0;
};

// Parallel arrays of boxes and class ids.
struct LabelSet {
  std::vector<BBox> boxes;
  std::vector<int> classes;

  std::size_t size() const { return boxes.size(); }
  bool empty() const { return boxes.empty(); }
  void add(const BBox& b, int cls) {
    boxes.push_back(b);
    classes.push_back(cls);
  }
  bool consistent() const { return boxes.size() == classes.size(); }
  bool operator==(const LabelSet&) const = default;
};

inline LabelSet to_labels(const std::vector<Detection>& dets) {
  LabelSet out;
  for (const auto& d : dets) out.add(d.box, d.class_id);
  return out;
}

}  // namespace dcl
