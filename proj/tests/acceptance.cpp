// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs standalone or under ctest.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "autowindow/gradients.hpp"
#include "autowindow/pipeline_gradients.hpp"
#include "autowindow/stack.hpp"
#include "autowindow/stack_io.hpp"
#include "autowindow/trainer.hpp"
#include "autowindow/volume.hpp"
#include "autowindow/window.hpp"
#include "test_support.hpp"

using namespace autowindow;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

// Relative agreement, with an absolute floor for gradients so small that the
// difference oracle cannot resolve them. Resolved comparisons feed `worst`.
struct Agreement {
  double worst = 0;
  std::size_t resolved = 0;
  std::size_t floored = 0;

  bool check(double analytic, double numeric, double rel, double abs_floor) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale >= 100 * abs_floor) {
      ++resolved;
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    } else {
      ++floored;
    }
    return support::close(analytic, numeric, rel, abs_floor);
  }
};

// Fourth-order central stencil along one coordinate. Rounding noise is
// ~eps/step, so a wider step keeps small gradients resolvable.
template <typename Fn>
double stencil(const Fn& fn, const Eigen::VectorXd& x, int axis, double step) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
  e[axis] = step;
  return (-fn(x + 2 * e) + 8 * fn(x + e) - 8 * fn(x - e) + fn(x - 2 * e)) / (12 * step);
}

// ---------------------------------------------------------------- 1
void gradient_suite(Outcome& out) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> hu(-1024, 3072);
  std::uniform_real_distribution<double> sym(-1, 1);
  Agreement scalar, pipeline;
  const int draws = 1000;

  for (int i = 0; i < draws; ++i) {
    // Extractor: all eight partials.
    const auto p = support::random_window(rng);
    const double s = hu(rng);
    const auto g = extractor_backward(p, s);
    const double analytic[8] = {g.d_a, g.d_b, g.d_d, g.d_g, g.d_k, g.d_input, g.d_m, g.d_h};
    Eigen::VectorXd x(8);
    x << p.a, p.b, p.d, p.g, p.k, s, p.m, p.h;
    const auto fn = [](const Eigen::VectorXd& v) {
      return forward(WindowParamsd{v[0], v[1], v[2], v[3], v[4], v[6], v[7]}, v[5]);
    };
    for (int j = 0; j < 8; ++j) {
      const double step = j >= 5 ? 1e-3 * p.h : 1e-3 * std::max(1.0, std::abs(x[j]));
      const double numeric = stencil(fn, x, j, step);
      out.require(scalar.check(analytic[j], numeric, 1e-5, 1e-9), "extractor partial");
    }

    // Rectifier slope in its input.
    RectifierParams<double> rect;
    rect.offsets = Eigen::VectorXd::Random(3);
    rect.intensities = Eigen::VectorXd::Random(3) * 0.5;
    const double w = 2 * sym(rng);
    const double rect_fd =
        stencil([&](const Eigen::VectorXd& v) { return rectify(rect, v[0]); }, Eigen::VectorXd::Constant(1, w), 0, 1e-3);
    out.require(scalar.check(rectify_slope(rect, w), rect_fd, 1e-5, 1e-9), "rectifier slope");

    // Softmax row Jacobian.
    const int n = 1 + i % 5;
    const Eigen::VectorXd logits = Eigen::VectorXd::Random(n) * 3;
    const auto softmax = [](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return row_softmax(v.transpose()).transpose();
    };
    const Eigen::MatrixXd jac = softmax_row_jacobian(softmax(logits));
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) {
        const auto entry = [&](const Eigen::VectorXd& v) { return softmax(v)[r]; };
        const double numeric = stencil(entry, logits, c, 1e-3);
        out.require(scalar.check(jac(r, c), numeric, 1e-5, 1e-9), "softmax jacobian");
      }
    }

    // Whole pipeline, random shape, every learnable parameter.
    const int n_windows = 1 + i % 3;
    const int kappa = (i / 3) % 3;
    const Eigen::Index channels = 1 + (i / 9) % 2;
    const auto stack = support::random_stack(rng, n_windows, kappa);
    Volume vol({channels, 1, 2, 2});
    for (Eigen::Index v = 0; v < vol.data.size(); ++v) vol.data.data()[v] = hu(rng);
    Volume upstream({n_windows * channels, 1, 2, 2}, ValueKind::Response);
    for (Eigen::Index v = 0; v < upstream.data.size(); ++v) upstream.data.data()[v] = sym(rng);
    const auto loss = [&](const Eigen::VectorXd& packed) {
      auto copy = stack;
      unpack_learnable(copy, packed);
      return (forward_volume(copy, vol, 1).data * upstream.data).sum();
    };
    const Eigen::VectorXd grad = pipeline_backward(stack, vol, upstream).packed();
    const Eigen::VectorXd num = finite_difference<double>(loss, pack_learnable(stack));
    for (Eigen::Index j = 0; j < num.size(); ++j) {
      out.require(pipeline.check(grad[j], num[j], 1e-4, 1e-7), "pipeline partial");
    }
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 60, "runtime under 60 s");
  out.detail << draws << " draws; worst rel err scalar " << scalar.worst << " over " << scalar.resolved
             << " partials, pipeline " << pipeline.worst << " over " << pipeline.resolved << "; "
             << scalar.floored + pipeline.floored << " near-zero partials held to the absolute floor; " << elapsed
             << " s";
}

// ---------------------------------------------------------------- 2
void shape_suite(Outcome& out) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2002);
  const HuRange range{};
  const int grid = 4096;
  int accepted = 0, max_gap = 0;
  double worst_offset = 0, worst_anchor = 0;

  while (accepted < 200) {
    const auto p = support::random_window(rng, range);
    // Keep draws whose inflection sits inside the grid and whose curve does
    // not saturate to k +- 1 in double precision across it.
    const double lambda = inflection_root(p, {-10000000, 10000000});
    if (lambda < range.lo + 2 || lambda > range.lo + grid - 3) continue;
    if (std::abs(tau(p, double(range.lo))) > 15 || std::abs(tau(p, double(range.lo + grid - 1))) > 15) continue;
    ++accepted;

    std::vector<double> w(grid);
    for (int i = 0; i < grid; ++i) {
      const double s = range.lo + i;
      w[i] = forward(p, s);
      out.require(slope(p, s) > 0, "slope > 0");
      out.require(w[i] > p.k - 1 && w[i] < p.k + 1, "output within (k-1, k+1)");
    }

    // Second differences below rounding noise carry no sign.
    const double noise = 64 * std::numeric_limits<double>::epsilon() * (2 + std::abs(p.k));
    int changes = 0, last_sign = 0, last_index = 0;
    double change_lo = 0, change_hi = 0;
    for (int i = 1; i + 1 < grid; ++i) {
      const double d2 = w[i + 1] - 2 * w[i] + w[i - 1];
      if (std::abs(d2) <= noise) continue;
      const int sign = d2 > 0 ? 1 : -1;
      if (last_sign != 0 && sign != last_sign) {
        ++changes;
        change_lo = range.lo + last_index;
        change_hi = range.lo + i;
        max_gap = std::max(max_gap, i - last_index);
      }
      last_sign = sign;
      last_index = i;
    }
    out.require(changes == 1, "exactly one second-difference sign change");
    if (changes == 1) {
      const double off = lambda < change_lo ? change_lo - lambda : lambda > change_hi ? lambda - change_hi : 0.0;
      worst_offset = std::max(worst_offset, off);
      out.require(off <= 1.0, "inflection within 1 HU of the sign change");
    }

    auto sym = p;
    sym.a = sym.b = 0;
    const double anchor = std::abs(forward(sym, sym.m - sym.h * sym.d) - sym.k);
    worst_anchor = std::max(worst_anchor, anchor);
    out.require(anchor <= 1e-12, "forward(m - h d) = k");
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 60, "runtime under 60 s");
  out.detail << accepted << " windows, widest sign-change bracket " << max_gap << " HU, worst root offset "
             << worst_offset << " HU, worst anchor error " << worst_anchor << ", " << elapsed << " s";
}

// ---------------------------------------------------------------- 3
void structural_suite(Outcome& out) {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> sym(-1, 1);
  double worst_theta = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = support::random_window(rng);
    const double theta = (p.a - p.b) / (p.a + p.b + 2) + p.k;
    const double diff = std::abs(theta - forward(p, p.level()));
    worst_theta = std::max(worst_theta, diff);
    out.require(diff <= 1e-12, "theta equals forward at tau = 0");
    out.require(std::abs(center_response(p) - theta) <= 1e-12, "center_response equals theta");

    RectifierParams<double> none;
    const double w = 3 * sym(rng);
    out.require(rectify(none, w) == w, "empty rectifier is the identity");
    RectifierParams<double> silent(3);
    silent.offsets.setRandom();
    out.require(rectify(silent, w) == w, "zero-intensity rectifier is the identity");

    FusionWeights single{Eigen::MatrixXd::Constant(1, 1, 5 * sym(rng))};
    Eigen::VectorXd v(1);
    v << w;
    out.require(fuse(single, v)[0] == w, "N = 1 fusion is the identity");
  }
  std::uniform_int_distribution<int> dim(1, 5);
  for (int i = 0; i < 50; ++i) {
    const int n = dim(rng);
    const Shape4 shape{dim(rng), dim(rng), dim(rng), dim(rng)};
    Volume vol(shape);
    vol.data.setRandom();
    vol.data *= 1000;
    const auto outv = forward_volume(support::random_stack(rng, n, i % 3), vol);
    out.require(outv.shape() == (Shape4{n * shape.channels, shape.z, shape.y, shape.x}), "channel count N*C");
  }
  out.detail << "worst theta error " << worst_theta;
}

// ---------------------------------------------------------------- 4 and 5
struct RunSummary {
  double accuracy = 0;
  double dice = 0;
  bool finite = true;
  bool clamped = true;
  std::size_t steps_logged = 0;
  double d_first = 0, d_last = 0;
};

RunSummary run_toy(const AutoWindowStack& init, const ToyTask& task, const TrainConfig& config,
                   std::size_t watched) {
  const auto result = train(init, LinearHead::zeros(2, init.n_windows()), task, config);
  const auto metrics = evaluate(result.stack, result.head, task, config.seed + 1);
  RunSummary r;
  r.accuracy = metrics.accuracy;
  r.dice = metrics.dice[1];
  r.steps_logged = result.log.records.size();
  for (const auto& rec : result.log.records) {
    r.finite = r.finite && std::isfinite(rec.loss);
    for (const auto& w : rec.windows) {
      for (double v : w) r.finite = r.finite && std::isfinite(v);
      r.clamped = r.clamped && w[0] >= kAsymmetryFloor && w[1] >= kAsymmetryFloor;
    }
  }
  if (!result.log.records.empty()) {
    r.d_first = result.log.records.front().windows[watched][2];
    r.d_last = result.log.records.back().windows[watched][2];
  }
  return r;
}

void toy_training(Outcome& acc, Outcome& stab) {
  const auto t0 = Clock::now();
  ToyTask task;
  task.bands = {{40, 80}};
  task.foreground_fraction = 0.25;
  TrainConfig config;
  config.learning_rate = 0.02;
  config.iterations = 20000;
  config.batch_size = 512;
  config.log_every = 1;

  const auto stack = init_stack(4, 2);
  const auto baseline = init_stack(1, 2);
  // Window whose anchor is closest to the band.
  std::size_t watched = 0;
  for (std::size_t i = 1; i < stack.extractors.size(); ++i) {
    if (std::abs(stack.extractors[i].level() - 60) < std::abs(stack.extractors[watched].level() - 60)) watched = i;
  }

  std::size_t steps = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    config.seed = seed;
    try {
      const auto full = run_toy(stack, task, config, watched);
      const auto whole = run_toy(baseline, task, config, 0);
      acc.require(full.accuracy > 0.95, "N=4 accuracy > 0.95");
      acc.require(whole.accuracy < full.accuracy, "whole-range baseline strictly lower");
      acc.detail << "seed " << seed << ": N=4 acc " << full.accuracy << " dice " << full.dice << ", N=1 acc "
                 << whole.accuracy << " dice " << whole.dice << ", d[" << watched << "] " << full.d_first
                 << " -> " << full.d_last << "; ";
      stab.require(full.finite && whole.finite, "logged values finite");
      stab.require(full.clamped && whole.clamped, "a, b inside clamp region");
      stab.require(full.steps_logged == std::size_t(config.iterations), "every step logged");
      steps += full.steps_logged + whole.steps_logged;
    } catch (const DivergenceDetected& e) {
      acc.require(false, std::string("diverged: ") + e.what());
      stab.require(false, std::string("diverged: ") + e.what());
    }
  }
  const double elapsed = seconds_since(t0);
  acc.require(elapsed < 900, "runtime under 15 min");
  acc.detail << elapsed << " s";
  stab.detail << steps << " logged steps checked";
}

// ---------------------------------------------------------------- 6
void parameter_counts(Outcome& out) {
  for (auto [n, kappa] : {std::pair{1, 0}, {4, 2}, {8, 4}}) {
    const std::size_t expected = 5 * n + 2 * kappa * n + n * n;
    const std::size_t got = count_learnable(init_stack(n, kappa));
    out.require(got == expected, "count formula");
    out.require(std::size_t(pack_learnable(init_stack(n, kappa)).size()) == expected, "packed length");
    out.detail << "(" << n << "," << kappa << ")=" << got << " ";
  }
}

// ---------------------------------------------------------------- 7
int run_cli(const std::string& args) {
  const std::string cmd = std::string(AUTOWINDOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

void determinism(Outcome& out) {
  const auto dir = support::temp_dir("acceptance_determinism");
  const std::string d = dir.string() + "/";
  std::mt19937_64 rng(7007);

  const auto stack = support::random_stack(rng, 4, 2);
  const auto text = serialize_stack(stack);
  out.require(serialize_stack(parse_stack(text)) == text, "stack text round trip");
  out.require(parse_stack(text) == stack, "stack values round trip");

  Volume hu({1, 8, 9, 10});
  hu.spacing = {0.7, 0.8, 2.5};
  for (Eigen::Index v = 0; v < hu.voxels(); ++v) hu.data(0, v) = double(int(rng() % 4097) - 1024);
  write_volume(hu, d + "a.hdr", d + "a.raw");
  const auto back = read_volume(d + "a.hdr", d + "a.raw").volume;
  write_volume(back, d + "b.hdr", d + "b.raw");
  out.require(support::slurp(d + "a.raw") == support::slurp(d + "b.raw"), "HU volume bytes");
  out.require(support::slurp(d + "a.hdr") == support::slurp(d + "b.hdr"), "HU header bytes");

  support::spit(d + "task.txt", "bands=40:80\nshape=16 16 16\nnoise_std=2\n");
  support::spit(d + "cfg.txt", "iterations=50\nbatch_size=128\nseed=4\nlog_every=5\n");
  save_stack(stack, d + "stack.txt");
  const auto twice = [&](const std::string& name, const std::function<std::string(const std::string&)>& cmd,
                         const std::vector<std::string>& outputs) {
    bool same = true;
    for (const char* tag : {"1", "2"}) out.require(run_cli(cmd(tag)) == 0, name + " exit code");
    for (const auto& o : outputs) same = same && support::slurp(d + o + "1") == support::slurp(d + o + "2");
    out.require(same, name + " outputs identical");
  };
  twice("train", [&](const std::string& t) {
    return "train --task " + d + "task.txt --config " + d + "cfg.txt --out-stack " + d + "trained" + t + " --log " +
           d + "log" + t;
  }, {"trained", "log"});
  twice("apply", [&](const std::string& t) {
    return "apply --stack " + d + "trained1 --in-header " + d + "a.hdr --in-data " + d + "a.raw --out-header " + d +
           "out.hdr" + t + " --out-data " + d + "out.raw" + t;
  }, {"out.hdr", "out.raw"});
  twice("respond", [&](const std::string& t) {
    return "respond --stack " + d + "stack.txt --lo -1024 --hi 3072 --csv " + d + "r.csv" + t + " --svg " + d +
           "r.svg" + t;
  }, {"r.csv", "r.svg"});
  twice("analyze", [&](const std::string& t) {
    return "analyze --stack " + d + "stack.txt --out " + d + "report" + t;
  }, {"report"});
  twice("fusion", [&](const std::string& t) {
    return "fusion --stack " + d + "stack.txt --csv " + d + "f.csv" + t + " --svg " + d + "f.svg" + t;
  }, {"f.csv", "f.svg"});

  const auto response = read_volume(d + "out.hdr1", d + "out.raw1").volume;
  write_volume(response, d + "c.hdr", d + "c.raw");
  out.require(support::slurp(d + "c.raw") == support::slurp(d + "out.raw1"), "response volume bytes");
  out.detail << "serialization, volume I/O and 5 commands compared byte for byte";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
  };
  Outcome toy_acc, toy_stab;
  bool toy_done = false;
  const auto toy = [&] {
    if (!toy_done) toy_training(toy_acc, toy_stab);
    toy_done = true;
  };
  const std::vector<Criterion> criteria = {
      {"gradient suite", gradient_suite},
      {"shape analysis", shape_suite},
      {"structural equalities", structural_suite},
      {"toy training", [&](Outcome& o) { toy(); o.pass = toy_acc.pass; o.detail << toy_acc.detail.str(); }},
      {"trajectory stability", [&](Outcome& o) { toy(); o.pass = toy_stab.pass; o.detail << toy_stab.detail.str(); }},
      {"parameter count", parameter_counts},
      {"determinism and round trips", determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].name
              << "): " << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
