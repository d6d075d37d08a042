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

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcl/labels.hpp"

namespace dcl {

// One line of the detection / ground-truth record format:
//
//   <scene_id> <class_id> <xmin> <ymin> <xmax> <ymax> [score]
//
// Whitespace separated, one box per line, '#' starts a comment line.
// Coordinates are normalized corner form. Ground truth omits the score.
struct BoxRecord {
  int scene_id = 0;
  int class_id = 0;
  BBox box;
  std::optional<double> score;
};

std::string format_record(const BoxRecord& r);
// Throws std::runtime_error with the line number on malformed input.
std::vector<BoxRecord> read_records(std::istream& in);
void write_records(std::ostream& out, const std::vector<BoxRecord>& records);

std::vector<BoxRecord> to_records(int scene_id, const LabelSet& labels);
std::vector<BoxRecord> to_records(int scene_id, const std::vector<Detection>& dets);

// Groups records by scene id; records with a score become detections.
std::map<int, LabelSet> group_labels(const std::vector<BoxRecord>& records);
std::map<int, std::vector<Detection>> group_detections(const std::vector<BoxRecord>& records);

}  // namespace dcl
