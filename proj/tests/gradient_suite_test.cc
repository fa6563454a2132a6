/* Copyright 2026 The vqk Authors. All Rights Reserved.

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
#include "vqk/gradient_suite.h"

#include <gtest/gtest.h>

namespace vqk {
namespace {

TEST(GradientSuiteTest, EveryCaseWithinTolerance) {
  const auto results = RunGradientSuite(20, 0);
  EXPECT_GE(results.size(), 25u);
  for (const GradCheckResult& r : results) {
    EXPECT_EQ(r.seeds, 20);
    EXPECT_LT(r.max_error, kGradCheckTolerance) << r.name;
  }
}

}  // namespace
}  // namespace vqk
