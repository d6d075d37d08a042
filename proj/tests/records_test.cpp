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

#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>

namespace dcl {
namespace {

TEST(Records, RoundTripKeepsBitsAndScores) {
  LabelSet gt;
  gt.add({0.1, 0.2, 0.30000000000000004, 0.4}, 1);
  std::vector<Detection> dets{{{0.0, 0.0, 1.0 / 3.0, 0.5}, 0, 0.123456789012345678}};
  auto recs = to_records(4, gt);
  const auto more = to_records(7, dets);
  recs.insert(recs.end(), more.begin(), more.end());

  std::stringstream ss;
  write_records(ss, recs);
  const auto back = read_records(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].box, gt.boxes[0]);
  EXPECT_FALSE(back[0].score.has_value());
  EXPECT_EQ(back[1].box, dets[0].box);
  EXPECT_EQ(*back[1].score, dets[0].score);

  const auto labels = group_labels(back);
  EXPECT_EQ(labels.at(4), gt);
  const auto grouped = group_detections(back);
  EXPECT_EQ(grouped.at(7).size(), 1u);
}

TEST(Records, SkipsCommentsAndBlankLines) {
  std::istringstream in("# header\n\n  \n0 1 0.1 0.1 0.2 0.2 0.5\n");
  const auto recs = read_records(in);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].class_id, 1);
  EXPECT_DOUBLE_EQ(*recs[0].score, 0.5);
}

TEST(Records, MalformedLineReportsLineNumber) {
  std::istringstream in("0 0 0.1 0.1 0.2 0.2\n0 0 0.1 oops\n");
  try {
    read_records(in);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Records, RejectsInvalidBoxesAndTrailingFields) {
  std::istringstream bad_box("0 0 0.5 0.1 0.2 0.2\n");
  EXPECT_THROW(read_records(bad_box), std::runtime_error);
  std::istringstream extra("0 0 0.1 0.1 0.2 0.2 0.9 junk\n");
  EXPECT_THROW(read_records(extra), std::runtime_error);
}

}  // namespace
}  // namespace dcl
