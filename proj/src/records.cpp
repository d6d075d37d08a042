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

#include "dcl/records.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dcl {

std::string format_record(const BoxRecord& r) {
  char buf[256];
  int n = std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g %.17g %.17g", r.scene_id,
                        r.class_id, r.box.xmin, r.box.ymin, r.box.xmax, r.box.ymax);
  std::string line(buf, static_cast<std::size_t>(n));
  if (r.score) {
    n = std::snprintf(buf, sizeof(buf), " %.17g", *r.score);
    line.append(buf, static_cast<std::size_t>(n));
  }
  return line;
}

std::vector<BoxRecord> read_records(std::istream& in) {
  std::vector<BoxRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    BoxRecord r;
    if (!(ls >> r.scene_id >> r.class_id >> r.box.xmin >> r.box.ymin >> r.box.xmax >>
          r.box.ymax)) {
      throw std::runtime_error("record line " + std::to_string(lineno) + ": malformed");
    }
    double score;
    if (ls >> score) r.score = score;
    std::string extra;
    if (ls >> extra) {
      throw std::runtime_error("record line " + std::to_string(lineno) + ": trailing fields");
    }
    if (!r.box.valid()) {
      throw std::runtime_error("record line " + std::to_string(lineno) + ": invalid box");
    }
    out.push_back(r);
  }
  return out;
}

void write_records(std::ostream& out, const std::vector<BoxRecord>& records) {
  for (const auto& r : records) out << format_record(r) << '\n';
}

std::vector<BoxRecord> to_records(int scene_id, const LabelSet& labels) {
  std::vector<BoxRecord> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back({scene_id, labels.classes[i], labels.boxes[i], std::nullopt});
  }
  return out;
}

std::vector<BoxRecord> to_records(int scene_id, const std::vector<Detection>& dets) {
  std::vector<BoxRecord> out;
  for (const auto& d : dets) out.push_back({scene_id, d.class_id, d.box, d.score});
  return out;
}

std::map<int, LabelSet> group_labels(const std::vector<BoxRecord>& records) {
  std::map<int, LabelSet> out;
  for (const auto& r : records) out[r.scene_id].add(r.box, r.class_id);
  return out;
}

std::map<int, std::vector<Detection>> group_detections(const std::vector<BoxRecord>& records) {
  std::map<int, std::vector<Detection>> out;
  for (const auto& r : records) out[r.scene_id].push_back({r.box, r.class_id, r.score.value_or(1.0)});
  return out;
}

}  // namespace dcl
