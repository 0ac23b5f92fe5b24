#include "autowindow/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "autowindow/errors.hpp"
#include "autowindow/pipeline_gradients.hpp"

namespace autowindow {

void ToyTask::validate() const {
  if (!hu_range.valid()) throw InvalidConfig("task: hu_range needs lo < hi");
  if (z < 1 || y < 1 || x < 1) throw InvalidConfig("task: shape must be >= 1");
  if (!(noise_std >= 0)) throw InvalidConfig("task: noise_std must be >= 0");
  if (!(foreground_fraction >= 0 && foreground_fraction < 1)) {
    throw InvalidConfig("task: foreground_fraction must lie in [0, 1)");
  }
  if (bands.empty() && foreground_fraction > 0) throw InvalidConfig("task: no bands configured");
  auto sorted = bands;
  std::sort(sorted.begin(), sorted.end(), [](const HuBand& l, const HuBand& r) { return l.lo < r.lo; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& b = sorted[i];
    if (!(b.lo < b.hi)) throw InvalidConfig("task: band needs lo < hi");
    if (b.lo < hu_range.lo || b.hi > hu_range.hi) throw InvalidConfig("task: band outside hu_range");
    if (i > 0 && sorted[i - 1].hi >= b.lo) throw InvalidConfig("task: bands overlap");
  }
}

LabeledVolume generate_task(const ToyTask& task, std::uint64_t seed) {
  task.validate();
  LabeledVolume out;
  out.volume = Volume({1, task.z, task.y, task.x}, ValueKind::Hu);
  out.volume.spacing = task.spacing;
  out.labels.resize(static_cast<std::size_t>(out.volume.voxels()));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double lo = task.hu_range.lo;
  const double hi = task.hu_range.hi;
  const auto inside_band = [&](double v) {
    return std::any_of(task.bands.begin(), task.bands.end(),
                       [v](const HuBand& b) { return v >= b.lo && v <= b.hi; });
  };

  for (Eigen::Index v = 0; v < out.volume.voxels(); ++v) {
    int label = 0;
    double value;
    if (unit(rng) < task.foreground_fraction) {
      const auto band = std::min<std::size_t>(
          static_cast<std::size_t>(unit(rng) * static_cast<double>(task.bands.size())),
          task.bands.size() - 1);
      label = static_cast<int>(band) + 1;
      const auto& b = task.bands[band];
      value = b.lo + unit(rng) * (b.hi - b.lo);
    } else {
      do {
        value = lo + unit(rng) * (hi - lo);
      } while (inside_band(value));
    }
    if (task.noise_std > 0) value = std::clamp(value + task.noise_std * noise(rng), lo, hi);
    out.volume.data(0, v) = value;
    out.labels[static_cast<std::size_t>(v)] = label;
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) {
    throw InvalidConfig("train: learning_rate must be finite and >= 0");
  }
  if (iterations < 0) throw InvalidConfig("train: iterations must be >= 0");
  if (batch_size < 1) throw InvalidConfig("train: batch_size must be >= 1");
  if (!(momentum >= 0 && momentum < 1)) throw InvalidConfig("train: momentum must lie in [0, 1)");
  if (log_every < 1) throw InvalidConfig("train: log_every must be >= 1");
}

std::string TrajectoryLog::to_csv() const {
  static constexpr const char* kNames[5] = {"a", "b", "d", "g", "k"};
  std::string out = "step,window,param,value\n";
  for (const auto& r : records) {
    const std::string step = std::to_string(r.step);
    for (std::size_t w = 0; w < r.windows.size(); ++w) {
      for (std::size_t p = 0; p < 5; ++p) {
        out += step + "," + std::to_string(w) + "," + kNames[p] + "," +
               kv::format_double(r.windows[w][p]) + "\n";
      }
    }
    out += step + ",,loss," + kv::format_double(r.loss) + "\n";
  }
  return out;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Softmax cross-entropy of the head on a batch of stack features (columns).
// Returns the mean loss; fills dL/dlogits / batch in `probs` in place.
double cross_entropy(const LinearHead& head, const Eigen::MatrixXd& features,
                     const std::vector<int>& labels, Eigen::MatrixXd& probs) {
  probs = (head.weights * features).colwise() + head.bias;
  double loss = 0;
  const auto batch = static_cast<double>(features.cols());
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    auto col = probs.col(j);
    const double top = col.maxCoeff();
    col = (col.array() - top).exp().matrix();
    const double z = col.sum();
    col /= z;
    const auto label = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(j)]);
    loss -= std::log(std::max(col[label], 1e-300));
    col[label] -= 1.0;
  }
  probs /= batch;
  return loss / batch;
}

std::array<double, 5> learnable_of(const WindowParamsd& w) { return {w.a, w.b, w.d, w.g, w.k}; }

TrajectoryRecord snapshot(int step, double loss, const AutoWindowStack& stack) {
  TrajectoryRecord r{step, loss, {}};
  for (const auto& w : stack.extractors) r.windows.push_back(learnable_of(w));
  return r;
}

}  // namespace

TrainResult train(const AutoWindowStack& stack_in, const LinearHead& head_in, const ToyTask& task,
                  const TrainConfig& config) {
  config.validate();
  stack_in.validate();
  const auto n = static_cast<Eigen::Index>(stack_in.n_windows());
  if (head_in.features() != n) {
    throw ShapeMismatch("train: head expects " + std::to_string(head_in.features()) +
                        " features, stack produces " + std::to_string(n));
  }
  if (head_in.classes() != static_cast<Eigen::Index>(task.classes())) {
    throw ShapeMismatch("train: head class count does not match task");
  }

  TrainResult result{stack_in, head_in, {}, 0.0};
  AutoWindowStack& stack = result.stack;
  LinearHead& head = result.head;
  if (config.iterations == 0) return result;

  const LabeledVolume data = generate_task(task, config.seed);
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_int_distribution<Eigen::Index> pick(0, data.volume.voxels() - 1);

  const Eigen::Index n_stack = static_cast<Eigen::Index>(count_learnable(stack));
  const Eigen::Index n_head = head.weights.size() + head.bias.size();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(n_stack + n_head);
  const double mu = config.optimizer == OptimizerKind::Momentum ? config.momentum : 0.0;

  Volume batch({1, config.batch_size, 1, 1}, ValueKind::Hu);
  std::vector<int> labels(static_cast<std::size_t>(config.batch_size));
  Eigen::MatrixXd probs;

  for (int step = 1; step <= config.iterations; ++step) {
    for (Eigen::Index j = 0; j < config.batch_size; ++j) {
      const Eigen::Index v = pick(rng);
      batch.data(0, j) = data.volume.data(0, v);
      labels[static_cast<std::size_t>(j)] = data.labels[static_cast<std::size_t>(v)];
    }
    const Volume features = forward_volume(stack, batch, 1);
    const Eigen::MatrixXd feat = features.data.matrix();
    const double loss = cross_entropy(head, feat, labels, probs);
    if (!std::isfinite(loss)) {
      throw DivergenceDetected("train: non-finite loss at step " + std::to_string(step));
    }

    Volume upstream(features.shape(), ValueKind::Response);
    upstream.data = (head.weights.transpose() * probs).array();
    const Eigen::VectorXd g_stack = pipeline_backward(stack, batch, upstream).packed();
    const Eigen::MatrixXd g_weights = probs * feat.transpose();
    const Eigen::VectorXd g_bias = probs.rowwise().sum();

    Eigen::VectorXd grad(n_stack + n_head);
    grad.head(n_stack) = g_stack;
    grad.segment(n_stack, head.weights.size()) =
        Eigen::Map<const Eigen::VectorXd>(g_weights.data(), g_weights.size());
    grad.tail(head.bias.size()) = g_bias;
    double lr = config.learning_rate;
    if (config.schedule == LrSchedule::Cosine) {
      lr *= 0.5 * (1.0 + std::cos(kPi * (step - 1) / config.iterations));
    }
    velocity = mu * velocity - lr * grad;

    Eigen::VectorXd params = pack_learnable(stack) + velocity.head(n_stack);
    unpack_learnable(stack, params);
    for (auto& w : stack.extractors) clamp_asymmetry(w);
    Eigen::Map<Eigen::VectorXd>(head.weights.data(), head.weights.size()) +=
        velocity.segment(n_stack, head.weights.size());
    head.bias += velocity.tail(head.bias.size());

    if (!pack_learnable(stack).allFinite() || !head.weights.allFinite() || !head.bias.allFinite()) {
      throw DivergenceDetected("train: non-finite parameter at step " + std::to_string(step));
    }
    result.final_loss = loss;
    if (step % config.log_every == 0 || step == config.iterations || step == 1) {
      result.log.records.push_back(snapshot(step, loss, stack));
    }
  }
  return result;
}

Metrics score_predictions(const std::vector<int>& truth, const std::vector<int>& predicted,
                          std::size_t classes) {
  if (truth.size() != predicted.size()) throw ShapeMismatch("score: label count mismatch");
  const auto c = static_cast<Eigen::Index>(classes);
  Metrics m;
  m.confusion = Eigen::MatrixXi::Zero(c, c);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= c || predicted[i] < 0 || predicted[i] >= c) {
      throw DomainError("score: label out of range");
    }
    ++m.confusion(truth[i], predicted[i]);
    correct += truth[i] == predicted[i];
  }
  m.accuracy = truth.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
  for (Eigen::Index k = 0; k < c; ++k) {
    const double tp = m.confusion(k, k);
    const double fn = m.confusion.row(k).sum() - tp;
    const double fp = m.confusion.col(k).sum() - tp;
    const double den = 2 * tp + fp + fn;
    m.dice.push_back(den == 0 ? 1.0 : 2 * tp / den);
  }
  return m;
}

std::vector<int> predict(const AutoWindowStack& stack, const LinearHead& head, const Volume& vol) {
  const Volume features = forward_volume(stack, vol);
  if (head.features() != features.channels()) throw ShapeMismatch("predict: head/stack width mismatch");
  const Eigen::MatrixXd logits = (head.weights * features.data.matrix()).colwise() + head.bias;
  std::vector<int> out(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Eigen::Index best = 0;
    logits.col(j).maxCoeff(&best);
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

Metrics evaluate(const AutoWindowStack& stack, const LinearHead& head, const ToyTask& task,
                 std::uint64_t seed) {
  const auto data = generate_task(task, seed);
  return score_predictions(data.labels, predict(stack, head, data.volume), task.classes());
}

ToyTask parse_task(const kv::Document& doc) {
  ToyTask task;
  if (doc.has("hu_range")) {
    const auto r = doc.get_ints("hu_range");
    if (r.size() != 2) throw ConfigParseError(doc.entry("hu_range").line, "hu_range needs lo hi");
    task.hu_range = {static_cast<int>(r[0]), static_cast<int>(r[1])};
  }
  const auto& bands = doc.entry("bands");
  for (auto tok : kv::split_ws(bands.value)) {
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) throw ConfigParseError(bands.line, "band must be lo:hi");
    try {
      task.bands.push_back({kv::parse_double(tok.substr(0, colon)), kv::parse_double(tok.substr(colon + 1))});
    } catch (const std::invalid_argument&) {
      throw ConfigParseError(bands.line, "band bounds must be numbers");
    }
  }
  if (doc.has("shape")) {
    const auto s = doc.get_ints("shape");
    if (s.size() != 3) throw ConfigParseError(doc.entry("shape").line, "shape needs Z Y X");
    task.z = s[0];
    task.y = s[1];
    task.x = s[2];
  }
  if (doc.has("spacing")) {
    const auto s = doc.get_doubles("spacing");
    if (s.size() != 3) throw ConfigParseError(doc.entry("spacing").line, "spacing needs z y x");
    task.spacing = {s[0], s[1], s[2]};
  }
  if (doc.has("noise_std")) task.noise_std = doc.get_double("noise_std");
  if (doc.has("foreground_fraction")) task.foreground_fraction = doc.get_double("foreground_fraction");
  try {
    task.validate();
  } catch (const InvalidConfig& e) {
    throw ConfigParseError(bands.line, e.what());
  }
  return task;
}

TrainConfig parse_train_config(const kv::Document& doc) {
  TrainConfig c;
  if (doc.has("learning_rate")) c.learning_rate = doc.get_double("learning_rate");
  if (doc.has("iterations")) c.iterations = static_cast<int>(doc.get_int("iterations"));
  if (doc.has("batch_size")) c.batch_size = static_cast<int>(doc.get_int("batch_size"));
  if (doc.has("seed")) c.seed = static_cast<std::uint64_t>(doc.get_int("seed"));
  if (doc.has("momentum")) c.momentum = doc.get_double("momentum");
  if (doc.has("log_every")) c.log_every = static_cast<int>(doc.get_int("log_every"));
  if (doc.has("optimizer")) {
    const auto& e = doc.entry("optimizer");
    if (e.value == "gd") {
      c.optimizer = OptimizerKind::GradientDescent;
    } else if (e.value == "momentum") {
      c.optimizer = OptimizerKind::Momentum;
    } else {
      throw ConfigParseError(e.line, "optimizer must be gd or momentum");
    }
  }
  if (doc.has("schedule")) {
    const auto& e = doc.entry("schedule");
    if (e.value == "constant") {
      c.schedule = LrSchedule::Constant;
    } else if (e.value == "cosine") {
      c.schedule = LrSchedule::Cosine;
    } else {
      throw ConfigParseError(e.line, "schedule must be constant or cosine");
    }
  }
  try {
    c.validate();
  } catch (const InvalidConfig& e) {
    throw ConfigParseError(0, e.what());
  }
  return c;
}

}  // namespace autowindow
