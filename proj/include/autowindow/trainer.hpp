#pragma once

// Gradient-descent training of a stack on synthetic HU-band segmentation
// tasks. The downstream network is a per-voxel linear softmax head over the
// N*C stack outputs.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "autowindow/keyvalue.hpp"
#include "autowindow/stack.hpp"
#include "autowindow/volume.hpp"

namespace autowindow {

struct HuBand {
  double lo = 0;
  double hi = 0;
};

struct ToyTask {
  std::vector<HuBand> bands;  // class i + 1; background is class 0
  HuRange hu_range;
  Eigen::Index z = 64;
  Eigen::Index y = 64;
  Eigen::Index x = 64;
  double noise_std = 0.0;            // HU, added to every voxel
  double foreground_fraction = 0.25;  // shared evenly between bands
  std::array<double, 3> spacing{2.0, 2.0, 2.0};

  std::size_t classes() const { return bands.size() + 1; }
  // Throws InvalidConfig unless bands are inside the range and disjoint.
  void validate() const;
};

struct LabeledVolume {
  Volume volume;
  std::vector<int> labels;  // one per voxel
};

// Foreground voxels are uniform inside their band, background voxels are
// uniform over the HU range with the bands cut out. Deterministic in seed.
LabeledVolume generate_task(const ToyTask& task, std::uint64_t seed);

enum class OptimizerKind { GradientDescent, Momentum };
enum class LrSchedule { Constant, Cosine };

struct TrainConfig {
  double learning_rate = 0.05;
  int iterations = 2000;
  int batch_size = 1024;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Momentum;
  double momentum = 0.9;
  int log_every = 10;
  // Cosine anneals the step size from learning_rate to 0 over the run.
  LrSchedule schedule = LrSchedule::Cosine;

  void validate() const;
};

struct LinearHead {
  Eigen::MatrixXd weights;  // classes x features
  Eigen::VectorXd bias;     // classes

  static LinearHead zeros(Eigen::Index classes, Eigen::Index features) {
    return {Eigen::MatrixXd::Zero(classes, features), Eigen::VectorXd::Zero(classes)};
  }
  Eigen::Index classes() const { return weights.rows(); }
  Eigen::Index features() const { return weights.cols(); }
  bool operator==(const LinearHead& o) const {
    return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
           weights == o.weights && bias == o.bias;
  }
};

struct TrajectoryRecord {
  int step = 0;
  double loss = 0;
  std::vector<std::array<double, 5>> windows;  // (a, b, d, g, k) per extractor
};

struct TrajectoryLog {
  std::vector<TrajectoryRecord> records;

  // Header `step,window,param,value`; one row per window parameter, plus a
  // `step,,loss,value` row per logged step.
  std::string to_csv() const;
};

struct TrainResult {
  AutoWindowStack stack;
  LinearHead head;
  TrajectoryLog log;
  double final_loss = 0;  // last minibatch loss; 0 when no step ran
};

// Minimises mean per-voxel cross-entropy on a training volume drawn with
// config.seed. m and h are never updated; a and b are clamped after every
// step. Throws DivergenceDetected when the loss or a parameter goes
// non-finite.
TrainResult train(const AutoWindowStack& stack, const LinearHead& head, const ToyTask& task,
                  const TrainConfig& config);

struct Metrics {
  double accuracy = 0;
  std::vector<double> dice;   // per class, including background
  Eigen::MatrixXi confusion;  // truth x predicted
};

Metrics score_predictions(const std::vector<int>& truth, const std::vector<int>& predicted,
                          std::size_t classes);

std::vector<int> predict(const AutoWindowStack& stack, const LinearHead& head, const Volume& vol);

// Scores the trained pair on a freshly generated volume.
Metrics evaluate(const AutoWindowStack& stack, const LinearHead& head, const ToyTask& task,
                 std::uint64_t seed);

// `bands=40:80 ...`, `hu_range`, `shape=Z Y X`, `noise_std`,
// `foreground_fraction`, optional `spacing`.
ToyTask parse_task(const kv::Document& doc);
// learning_rate, iterations, batch_size, seed, optimizer (gd | momentum),
// momentum, log_every, schedule (constant | cosine); all optional.
TrainConfig parse_train_config(const kv::Document& doc);

}  // namespace autowindow
