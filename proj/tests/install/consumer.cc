// SPDX-License-Identifier: Apache-2.0
// Builds against an installed wsc package.

#include <iostream>

#include "wsc/chop_policy.h"
#include "wsc/probe.h"

int main() {
  const wsc::ProbeModel probe(std::vector<double>{1.0}, 0.0);
  wsc::DetectorState state;
  const wsc::PolicyConfig config;
  const float hot[] = {3.0f};
  wsc::OnChunkBoundary(state, probe.Predict(hot), 20, config);
  const auto d = wsc::OnChunkBoundary(state, probe.Predict(hot), 20, config);
  std::cout << (d.chop() ? "chop" : "continue") << "\n";
  return d.chop() ? 0 : 1;
}
