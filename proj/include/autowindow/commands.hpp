#pragma once

// Command implementations behind the `autowindow` executable. Each command
// throws library errors; run_command maps them onto exit codes.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>

#include "autowindow/window.hpp"

namespace autowindow::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kDiverged = 3 };

using Path = std::filesystem::path;

struct RespondOptions {
  Path stack;
  HuRange range;
  Path csv;
  std::optional<Path> svg;
};

struct AnalyzeOptions {
  Path stack;
  Path out;
};

struct TrainOptions {
  Path task;
  Path config;  // trainer keys plus n_windows, kappa, fusion_gamma, eval_seed
  Path out_stack;
  Path log;
};

struct ApplyOptions {
  Path stack;
  Path in_header;
  Path in_data;
  Path out_header;
  Path out_data;
};

struct FusionOptions {
  Path stack;
  Path csv;
  std::optional<Path> svg;
};

void cmd_respond(const RespondOptions& opts, std::ostream& out);
void cmd_analyze(const AnalyzeOptions& opts, std::ostream& out);
void cmd_train(const TrainOptions& opts, std::ostream& out);
void cmd_apply(const ApplyOptions& opts, std::ostream& out);
void cmd_fusion(const FusionOptions& opts, std::ostream& out);

// Runs `body`, printing any error to `err`. Returns the exit code.
int run_command(const std::function<void()>& body, std::ostream& err);

}  // namespace autowindow::cli
