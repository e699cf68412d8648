// SPDX-License-Identifier: Apache-2.0
//
// Static SVG figures: fitted curves over training data, and training traces.
#pragma once

#include <string>
#include <vector>

#include "robreg/datagen.hpp"
#include "robreg/mlp.hpp"
#include "robreg/optim.hpp"

namespace robreg {

struct FitCurve {
  std::string label;
  MlpParams model;
};

struct TraceCurve {
  std::string label;
  TrainTrace trace;
};

/// Scatter of the training data, the f0 curve and each fitted curve on a
/// 1000-point grid of [0, 1]. The y-range covers the curves and the central 98%
/// of responses; points outside are clipped to the frame. Univariate only.
std::string render_fit_svg(const std::vector<FitCurve>& fits, const TargetFn& target,
                           const Dataset& data);
void emit_fit_svg(const std::vector<FitCurve>& fits, const TargetFn& target, const Dataset& data,
                  const std::string& path);

/// Training loss against epoch, one polyline per trace (log10 scale when all losses are positive).
std::string render_trace_svg(const std::vector<TraceCurve>& traces);
void emit_trace_svg(const std::vector<TraceCurve>& traces, const std::string& path);

}  // namespace robreg
