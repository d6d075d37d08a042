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

#include "dcl/image.hpp"

#include <algorithm>

namespace dcl {

std::vector<double> channel_means(const Image& img) {
  std::vector<double> means(static_cast<std::size_t>(img.channels), 0.0);
  if (img.empty()) return means;
  const auto C = static_cast<std::size_t>(img.channels);
  for (std::size_t i = 0; i < img.data.size(); i += C) {
    for (std::size_t c = 0; c < C; ++c) means[c] += img.data[i + c];
  }
  const double n = static_cast<double>(img.height) * img.width;
  for (double& m : means) m /= n;
  return means;
}

void clamp_unit(Image& img) {
  for (float& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace dcl
