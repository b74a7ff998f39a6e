#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pd36/model.hpp"

namespace pd36 {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double lr_phase1 = 1e-4;
  double lr_phase2 = 5e-5;
  /// First epoch (1-based) trained at lr_phase2.
  std::size_t phase2_start_epoch = 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  double label_smoothing = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Step schedule over 1-based epochs.
double lr_schedule(std::size_t epoch, const TrainConfig &config);

struct CrossEntropy {
  double loss = 0.0;
  /// d(loss)/d(logits) = p - q.
  std::vector<float> logit_grad;
};

/// -sum_c q_c log(max(p_c, 1e-12)) with q = (1 - s) onehot + s / C.
CrossEntropy cross_entropy(std::span<const float> probabilities, std::size_t target, double smoothing);

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// First/second moments for every trainable buffer of a store.
struct AdamState {
  std::vector<std::vector<float>> first_moment;
  std::vector<std::vector<float>> second_moment;
  std::uint64_t step = 0;

  static AdamState for_store(const ParamStore &store);
};

/// One bias-corrected Adam update of a single buffer at step `step` (>= 1).
void adam_update(std::span<float> params, std::span<const float> grads, std::span<float> first_moment,
                 std::span<float> second_moment, std::uint64_t step, const AdamHyper &hyper);

/// Advances the step counter and updates every trainable buffer.
void adam_step(ParamStore &store, const Gradients &grads, AdamState &state, const AdamHyper &hyper);

// ---------------------------------------------------------------------------

/// Labelled images, each 1 x H x W x 3 with pixel values in [0, 255].
class Dataset {
public:
  virtual ~Dataset() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual std::size_t label(std::size_t index) const = 0;
  virtual Tensor image(std::size_t index) const = 0;
};

class InMemoryDataset final : public Dataset {
public:
  InMemoryDataset(std::vector<Tensor> images, std::vector<std::size_t> labels, std::size_t num_classes);

  std::size_t size() const override { return images_.size(); }
  std::size_t num_classes() const override { return num_classes_; }
  std::size_t label(std::size_t index) const override { return labels_.at(index); }
  Tensor image(std::size_t index) const override { return images_.at(index); }

private:
  std::vector<Tensor> images_;
  std::vector<std::size_t> labels_;
  std::size_t num_classes_;
};

Tensor load_batch(const Dataset &data, std::span<const std::size_t> indices);

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_accuracy = 0.0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_loss = 0.0;

  bool operator==(const EpochRecord &) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  /// Mean loss of the very first batch, before any parameter update.
  double initial_loss = 0.0;

  /// 1-based epoch with the highest validation accuracy (earliest on ties).
  std::size_t best_accuracy_epoch() const;
  /// 1-based epoch with the lowest validation loss (earliest on ties).
  std::size_t best_loss_epoch() const;
};

/// Called after every epoch; returning false ends training early.
using EpochObserver = std::function<bool(const EpochRecord &)>;

/// Per epoch: seeded shuffle, mini-batches through the train-mode graph
/// (augmentation, dropout and batch statistics active), cross-entropy,
/// backward, Adam at lr_schedule(epoch), then an infer-mode pass over
/// `validation`. Training accuracy and loss are running means over the
/// epoch's train-mode batches.
TrainHistory train(const ModelSpec &spec, ParamStore &store, const Dataset &training,
                   const Dataset &validation, const TrainConfig &config, const EpochObserver &observer = {});

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> predictions;
  /// One probability row per image.
  std::vector<std::vector<double>> probabilities;
};

/// Infer-mode pass over every image of `data`.
EvalResult evaluate(const ModelSpec &spec, const ParamStore &store, const Dataset &data,
                    std::size_t batch_size = 8);

} // namespace pd36
