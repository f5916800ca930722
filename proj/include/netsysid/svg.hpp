#pragma once

#include <span>
#include <string>

#include "netsysid/trace.hpp"

namespace netsysid {

struct PlotStyle {
  std::string title = "estimation error";
  std::string x_label = "samples";
  std::string y_label = "spectral error";
  int width = 880;
  int height = 540;
};

/// Renders traces as a standalone SVG: one curve per group label, values
/// agent-and-seed averaged at each sample count, log-scale y. Groups keep
/// first-appearance order; colors come from a fixed palette; all numbers
/// are formatted with fixed precision, so output bytes are a pure function
/// of the input.
std::string emit_plot(std::span<const ErrorTrace> traces, const PlotStyle& style = {});

}  // namespace netsysid
