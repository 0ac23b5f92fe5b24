#include "autowindow/analysis.hpp"

#include "autowindow/errors.hpp"
#include "autowindow/keyvalue.hpp"

namespace autowindow {

namespace {

constexpr const char* kStageNames[3] = {"extractor", "rectifier", "fusion"};

double widening_inflection(const WindowParamsd& p, HuRange range) {
  constexpr long long kLimit = 100'000'000;
  long long lo = range.lo;
  long long hi = range.hi;
  const long long span = range.span();
  for (;;) {
    try {
      return inflection_root(p, HuRange{static_cast<int>(lo), static_cast<int>(hi)});
    } catch (const RootNotBracketed&) {
      if (hi - lo > kLimit) throw;
      lo -= span;
      hi += span;
      if (lo < -kLimit / 2 || hi > kLimit / 2) throw;
    }
  }
}

}  // namespace

ResponseCurve sweep_responses(const AutoWindowStack& stack, HuRange range) {
  if (!range.valid()) throw InvalidConfig("sweep: range needs lo < hi");
  stack.validate();
  const auto count = static_cast<Eigen::Index>(range.span()) + 1;
  const auto n = static_cast<Eigen::Index>(stack.n_windows());
  ResponseCurve curve;
  curve.inputs.reserve(static_cast<std::size_t>(count));
  curve.extracted.resize(count, n);
  curve.rectified.resize(count, n);
  curve.fused.resize(count, n);
  for (Eigen::Index i = 0; i < count; ++i) {
    const int hu = range.lo + static_cast<int>(i);
    curve.inputs.push_back(hu);
    const auto stages = evaluate_stages(stack, hu);
    curve.extracted.row(i) = stages.extracted.transpose();
    curve.rectified.row(i) = stages.rectified.transpose();
    curve.fused.row(i) = stages.fused.transpose();
  }
  return curve;
}

std::string ResponseCurve::to_csv() const {
  std::string out = "hu,window,stage,value\n";
  const Eigen::MatrixXd* stages[3] = {&extracted, &rectified, &fused};
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string hu = std::to_string(inputs[i]);
    for (Eigen::Index w = 0; w < extracted.cols(); ++w) {
      for (int s = 0; s < 3; ++s) {
        out += hu + "," + std::to_string(w) + "," + kStageNames[s] + "," +
               kv::format_double((*stages[s])(static_cast<Eigen::Index>(i), w)) + "\n";
      }
    }
  }
  return out;
}

std::vector<WindowReport> analyze_stack(const AutoWindowStack& stack) {
  stack.validate();
  std::vector<WindowReport> out;
  for (const auto& p : stack.extractors) {
    WindowReport r;
    r.monotonic = true;
    for (int s = stack.hu_range.lo; s <= stack.hu_range.hi; ++s) {
      if (!(slope(p, double(s)) > 0)) {
        r.monotonic = false;
        break;
      }
    }
    r.inflection_hu = widening_inflection(p, stack.hu_range);
    r.effective_width = effective_width(p);
    r.center_response = center_response(p);
    r.asymptote_lo = p.k - 1;
    r.asymptote_hi = p.k + 1;
    r.level = p.level();
    out.push_back(r);
  }
  return out;
}

std::string format_report(const std::vector<WindowReport>& report) {
  std::string out = "windows=" + std::to_string(report.size()) + "\n";
  for (std::size_t i = 0; i < report.size(); ++i) {
    const auto& r = report[i];
    const std::string p = "window." + std::to_string(i) + ".";
    out += p + "monotonic=" + (r.monotonic ? "true" : "false") + "\n";
    out += p + "inflection_hu=" + kv::format_double(r.inflection_hu) + "\n";
    out += p + "effective_width=" + kv::format_double(r.effective_width) + "\n";
    out += p + "center_response=" + kv::format_double(r.center_response) + "\n";
    out += p + "asymptote_lo=" + kv::format_double(r.asymptote_lo) + "\n";
    out += p + "asymptote_hi=" + kv::format_double(r.asymptote_hi) + "\n";
    out += p + "level=" + kv::format_double(r.level) + "\n";
  }
  return out;
}

std::vector<WindowReport> parse_report(std::string_view text) {
  const auto doc = kv::Document::parse(text);
  const long long n = doc.get_int("windows");
  if (n < 0) throw ConfigParseError(doc.entry("windows").line, "negative window count");
  std::vector<WindowReport> out;
  for (long long i = 0; i < n; ++i) {
    const std::string p = "window." + std::to_string(i) + ".";
    WindowReport r;
    const auto& mono = doc.entry(p + "monotonic");
    if (mono.value != "true" && mono.value != "false") {
      throw ConfigParseError(mono.line, "monotonic must be true or false");
    }
    r.monotonic = mono.value == "true";
    r.inflection_hu = doc.get_double(p + "inflection_hu");
    r.effective_width = doc.get_double(p + "effective_width");
    r.center_response = doc.get_double(p + "center_response");
    r.asymptote_lo = doc.get_double(p + "asymptote_lo");
    r.asymptote_hi = doc.get_double(p + "asymptote_hi");
    r.level = doc.get_double(p + "level");
    out.push_back(r);
  }
  return out;
}

std::string fusion_csv(const FusionWeights& fusion) {
  const Eigen::MatrixXd mix = fusion.mixing();
  std::string out = "row";
  for (Eigen::Index j = 0; j < mix.cols(); ++j) out += ",c" + std::to_string(j);
  out += "\n";
  for (Eigen::Index i = 0; i < mix.rows(); ++i) {
    out += std::to_string(i);
    for (Eigen::Index j = 0; j < mix.cols(); ++j) out += "," + kv::format_double(mix(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace autowindow
