#include "autowindow/commands.hpp"

#include <fstream>

#include "autowindow/analysis.hpp"
#include "autowindow/errors.hpp"
#include "autowindow/keyvalue.hpp"
#include "autowindow/plot.hpp"
#include "autowindow/stack_io.hpp"
#include "autowindow/trainer.hpp"
#include "autowindow/volume.hpp"

namespace autowindow::cli {

namespace {

void write_text(const Path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoFailure("write failed for '" + path.string() + "'");
}

// Prefixes config errors with the file name; the message keeps its line number.
template <typename Fn>
auto with_path(const Path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigParseError& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
}

}  // namespace

void cmd_respond(const RespondOptions& opts, std::ostream& out) {
  const auto stack = load_stack(opts.stack);
  const auto curve = sweep_responses(stack, opts.range);
  write_text(opts.csv, curve.to_csv());
  if (opts.svg) write_text(*opts.svg, plot::response_svg(curve));
  out << "swept " << curve.inputs.size() << " HU values through " << stack.n_windows() << " windows\n";
}

void cmd_analyze(const AnalyzeOptions& opts, std::ostream& out) {
  const auto stack = load_stack(opts.stack);
  const auto report = analyze_stack(stack);
  write_text(opts.out, format_report(report));
  for (std::size_t i = 0; i < report.size(); ++i) {
    out << "window " << i << ": inflection " << kv::format_double(report[i].inflection_hu) << " HU, width "
        << kv::format_double(report[i].effective_width) << " HU, "
        << (report[i].monotonic ? "monotonic" : "NOT monotonic") << "\n";
  }
}

void cmd_train(const TrainOptions& opts, std::ostream& out) {
  const ToyTask task =
      with_path(opts.task, [&] { return parse_task(kv::Document::read_file(opts.task.string())); });
  const auto cfg_doc = with_path(opts.config, [&] { return kv::Document::read_file(opts.config.string()); });
  const TrainConfig config = with_path(opts.config, [&] { return parse_train_config(cfg_doc); });
  int n_windows = 4;
  int kappa = 2;
  double gamma = 1.0;
  std::uint64_t eval_seed = config.seed + 1;
  with_path(opts.config, [&] {
    if (cfg_doc.has("n_windows")) n_windows = static_cast<int>(cfg_doc.get_int("n_windows"));
    if (cfg_doc.has("kappa")) kappa = static_cast<int>(cfg_doc.get_int("kappa"));
    if (cfg_doc.has("fusion_gamma")) gamma = cfg_doc.get_double("fusion_gamma");
    if (cfg_doc.has("eval_seed")) eval_seed = static_cast<std::uint64_t>(cfg_doc.get_int("eval_seed"));
  });

  const auto stack = init_stack(n_windows, kappa, task.hu_range, gamma);
  const auto head = LinearHead::zeros(static_cast<Eigen::Index>(task.classes()), n_windows);
  const auto result = train(stack, head, task, config);
  save_stack(result.stack, opts.out_stack);
  write_text(opts.log, result.log.to_csv());

  const auto metrics = evaluate(result.stack, result.head, task, eval_seed);
  // No minibatch loss exists for a zero-step run.
  if (config.iterations > 0) out << "final_loss=" << kv::format_double(result.final_loss) << "\n";
  out << "accuracy=" << kv::format_double(metrics.accuracy) << "\n";
  for (std::size_t c = 0; c < metrics.dice.size(); ++c) {
    out << "dice." << c << "=" << kv::format_double(metrics.dice[c]) << "\n";
  }
}

void cmd_apply(const ApplyOptions& opts, std::ostream& out) {
  const auto stack = load_stack(opts.stack);
  const auto input = read_volume(opts.in_header, opts.in_data);
  if (input.volume.kind != ValueKind::Hu) throw DomainError("apply: input volume must hold HU values");
  const auto response = forward_volume(stack, input.volume);
  write_volume(response, opts.out_header, opts.out_data);
  if (input.clamped) out << "clamped " << input.clamped << " voxels into [-1024, 3072]\n";
  out << "wrote " << response.channels() << " channels of " << response.z << "x" << response.y << "x"
      << response.x << "\n";
}

void cmd_fusion(const FusionOptions& opts, std::ostream& out) {
  const auto stack = load_stack(opts.stack);
  write_text(opts.csv, fusion_csv(stack.fusion));
  if (opts.svg) write_text(*opts.svg, plot::heatmap_svg(stack.fusion.mixing(), "row-softmax fusion weights"));
  out << "fusion matrix " << stack.fusion.size() << "x" << stack.fusion.size() << "\n";
}

int run_command(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kOk;
  } catch (const DivergenceDetected& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace autowindow::cli
