#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "autowindow/stack.hpp"

namespace autowindow {

// Responses of every window at each integer HU of a range. Each stage
// matrix is (inputs x windows).
struct ResponseCurve {
  std::vector<int> inputs;
  Eigen::MatrixXd extracted;
  Eigen::MatrixXd rectified;
  Eigen::MatrixXd fused;

  // Columns `hu,window,stage,value`; stage is extractor | rectifier | fusion.
  std::string to_csv() const;
};

ResponseCurve sweep_responses(const AutoWindowStack& stack, HuRange range);

struct WindowReport {
  bool monotonic = false;       // slope > 0 at every integer of the stack range
  double inflection_hu = 0;     // bisection root of the curvature sign
  double effective_width = 0;   // 2h / (tanh g + 1)
  double center_response = 0;   // response at tau = 0
  double asymptote_lo = 0;      // k - 1
  double asymptote_hi = 0;      // k + 1
  double level = 0;             // m - h d

  bool operator==(const WindowReport&) const = default;
};

// The inflection search starts on the stack's HU range and widens it when
// the root lies outside.
std::vector<WindowReport> analyze_stack(const AutoWindowStack& stack);

std::string format_report(const std::vector<WindowReport>& report);
// Throws ConfigParseError on malformed input.
std::vector<WindowReport> parse_report(std::string_view text);

// Row-softmaxed fusion matrix as CSV; header `row,c0,...,c{N-1}`.
std::string fusion_csv(const FusionWeights& fusion);

}  // namespace autowindow
