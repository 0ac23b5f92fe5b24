// autowindow: probes, training and application of a learnable CT window stack.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "autowindow/commands.hpp"

using namespace autowindow;

int main(int argc, char** argv) {
  CLI::App app{"Learnable CT window stack: response probes, analysis, training and application"};
  app.require_subcommand(1);

  cli::RespondOptions respond;
  std::string respond_svg;
  auto* respond_cmd = app.add_subcommand("respond", "Sweep every integer HU through all stages");
  respond_cmd->add_option("--stack", respond.stack, "Stack file")->required();
  respond_cmd->add_option("--lo", respond.range.lo, "Lowest HU")->capture_default_str();
  respond_cmd->add_option("--hi", respond.range.hi, "Highest HU")->capture_default_str();
  respond_cmd->add_option("--csv", respond.csv, "Output CSV")->required();
  respond_cmd->add_option("--svg", respond_svg, "Optional SVG plot");

  cli::AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Monotonicity, inflection, width and asymptotes per window");
  analyze_cmd->add_option("--stack", analyze.stack, "Stack file")->required();
  analyze_cmd->add_option("--out", analyze.out, "Output report")->required();

  cli::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a fresh stack on a synthetic band task");
  train_cmd->add_option("--task", train.task, "Task config")->required();
  train_cmd->add_option("--config", train.config, "Training config")->required();
  train_cmd->add_option("--out-stack", train.out_stack, "Trained stack file")->required();
  train_cmd->add_option("--log", train.log, "Trajectory CSV")->required();

  cli::ApplyOptions apply;
  auto* apply_cmd = app.add_subcommand("apply", "Map an HU volume to an N*C channel response volume");
  apply_cmd->add_option("--stack", apply.stack, "Stack file")->required();
  apply_cmd->add_option("--in-header", apply.in_header, "Input header")->required();
  apply_cmd->add_option("--in-data", apply.in_data, "Input samples")->required();
  apply_cmd->add_option("--out-header", apply.out_header, "Output header")->required();
  apply_cmd->add_option("--out-data", apply.out_data, "Output samples")->required();

  cli::FusionOptions fusion;
  std::string fusion_svg;
  auto* fusion_cmd = app.add_subcommand("fusion", "Emit the row-softmaxed fusion matrix");
  fusion_cmd->add_option("--stack", fusion.stack, "Stack file")->required();
  fusion_cmd->add_option("--csv", fusion.csv, "Output CSV")->required();
  fusion_cmd->add_option("--svg", fusion_svg, "Optional heatmap SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsageError;
  }
  if (!respond_svg.empty()) respond.svg = respond_svg;
  if (!fusion_svg.empty()) fusion.svg = fusion_svg;

  if (*respond_cmd) {
    if (!respond.range.valid()) {
      std::cerr << "error: --lo must be below --hi\n";
      return cli::kUsageError;
    }
    return cli::run_command([&] { cli::cmd_respond(respond, std::cout); }, std::cerr);
  }
  if (*analyze_cmd) return cli::run_command([&] { cli::cmd_analyze(analyze, std::cout); }, std::cerr);
  if (*train_cmd) return cli::run_command([&] { cli::cmd_train(train, std::cout); }, std::cerr);
  if (*apply_cmd) return cli::run_command([&] { cli::cmd_apply(apply, std::cout); }, std::cerr);
  return cli::run_command([&] { cli::cmd_fusion(fusion, std::cout); }, std::cerr);
}
