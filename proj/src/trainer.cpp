#include "pd36/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pd36 {

void TrainConfig::validate() const {
  if (epochs == 0) {
    throw ConfigError("epochs must be positive");
  }
  if (batch_size == 0) {
    throw ConfigError("batch_size must be positive");
  }
  if (phase2_start_epoch < 1 || phase2_start_epoch > epochs + 1) {
    throw ConfigError("phase2_start_epoch must lie in [1, epochs + 1]");
  }
  if (!(label_smoothing >= 0.0 && label_smoothing < 0.5)) {
    throw ConfigError("label_smoothing must lie in [0, 0.5)");
  }
  if (!(lr_phase1 > 0.0) || !(lr_phase2 > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
}

double lr_schedule(std::size_t epoch, const TrainConfig &config) {
  if (epoch < 1 || epoch > config.epochs) {
    throw ConfigError("epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(config.epochs) + "]");
  }
  return epoch < config.phase2_start_epoch ? config.lr_phase1 : config.lr_phase2;
}

CrossEntropy cross_entropy(std::span<const float> probabilities, std::size_t target, double smoothing) {
  const std::size_t classes = probabilities.size();
  if (target >= classes) {
    throw InputError("target class " + std::to_string(target) + " outside [0, " + std::to_string(classes) + ")");
  }
  CrossEntropy ce;
  ce.logit_grad.resize(classes);
  const double off = smoothing / static_cast<double>(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const double q = (c == target ? 1.0 - smoothing : 0.0) + off;
    const double p = probabilities[c];
    if (q > 0.0) {
      ce.loss -= q * std::log(std::max(p, 1e-12));
    }
    ce.logit_grad[c] = static_cast<float>(p - q);
  }
  return ce;
}

AdamState AdamState::for_store(const ParamStore &store) {
  AdamState s;
  s.first_moment.resize(store.size());
  s.second_moment.resize(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].trainable) {
      s.first_moment[i].assign(store[i].values.size(), 0.0f);
      s.second_moment[i].assign(store[i].values.size(), 0.0f);
    }
  }
  return s;
}

void adam_update(std::span<float> params, std::span<const float> grads, std::span<float> first_moment,
                 std::span<float> second_moment, std::uint64_t step, const AdamHyper &hyper) {
  if (grads.size() != params.size() || first_moment.size() != params.size() ||
      second_moment.size() != params.size()) {
    throw ShapeError("adam: parameter, gradient and moment sizes differ");
  }
  if (step == 0) {
    throw StateError("adam: step counter must be at least 1");
  }
  const double b1 = hyper.beta1;
  const double b2 = hyper.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = b1 * first_moment[i] + (1.0 - b1) * g;
    const double v = b2 * second_moment[i] + (1.0 - b2) * g * g;
    first_moment[i] = static_cast<float>(m);
    second_moment[i] = static_cast<float>(v);
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] = static_cast<float>(params[i] - hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon));
  }
}

void adam_step(ParamStore &store, const Gradients &grads, AdamState &state, const AdamHyper &hyper) {
  if (grads.buffers.size() != store.size() || state.first_moment.size() != store.size()) {
    throw ShapeError("adam: gradient/state layout does not match the parameter store");
  }
  ++state.step;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!store[i].trainable) {
      continue;
    }
    adam_update(store[i].values, grads.buffers[i], state.first_moment[i], state.second_moment[i], state.step,
                hyper);
  }
}

// ---------------------------------------------------------------------------

InMemoryDataset::InMemoryDataset(std::vector<Tensor> images, std::vector<std::size_t> labels,
                                 std::size_t num_classes)
    : images_(std::move(images)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (images_.size() != labels_.size()) {
    throw InputError("image and label counts differ");
  }
  for (std::size_t l : labels_) {
    if (l >= num_classes_) {
      throw InputError("label " + std::to_string(l) + " outside [0, " + std::to_string(num_classes_) + ")");
    }
  }
}

Tensor load_batch(const Dataset &data, std::span<const std::size_t> indices) {
  std::vector<Tensor> images;
  images.reserve(indices.size());
  for (std::size_t i : indices) {
    images.push_back(data.image(i));
  }
  return stack<float>(images);
}

std::size_t TrainHistory::best_accuracy_epoch() const {
  if (epochs.empty()) {
    return 0;
  }
  auto it = std::max_element(epochs.begin(), epochs.end(), [](const EpochRecord &a, const EpochRecord &b) {
    return a.val_accuracy < b.val_accuracy;
  });
  return it->epoch;
}

std::size_t TrainHistory::best_loss_epoch() const {
  if (epochs.empty()) {
    return 0;
  }
  auto it = std::min_element(epochs.begin(), epochs.end(),
                             [](const EpochRecord &a, const EpochRecord &b) { return a.val_loss < b.val_loss; });
  return it->epoch;
}

namespace {

void check_dataset(const ModelSpec &spec, const Dataset &data, const char *what) {
  if (data.size() == 0) {
    throw InputError(std::string(what) + " dataset is empty");
  }
  if (data.num_classes() != spec.num_classes) {
    throw InputError(std::string(what) + " dataset has " + std::to_string(data.num_classes()) +
                     " classes but the model head has " + std::to_string(spec.num_classes));
  }
}

std::size_t argmax_row(const float *row, std::size_t classes) {
  return static_cast<std::size_t>(std::max_element(row, row + classes) - row);
}

} // namespace

TrainHistory train(const ModelSpec &spec, ParamStore &store, const Dataset &training,
                   const Dataset &validation, const TrainConfig &config, const EpochObserver &observer) {
  config.validate();
  check_dataset(spec, training, "training");
  check_dataset(spec, validation, "validation");

  const std::size_t classes = spec.num_classes;
  AdamState adam = AdamState::for_store(store);
  TrainHistory history;
  std::vector<std::size_t> order(training.size());
  bool first_batch = true;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    const AdamHyper hyper{lr, config.beta1, config.beta2, config.epsilon};

    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = Rng::derive(config.seed, 2 * epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    Rng layer_rng = Rng::derive(config.seed, 2 * epoch + 1);
    const ExecMode mode = ExecMode::train(layer_rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> indices(order.data() + start, count);
      const Tensor batch = load_batch(training, indices);

      ForwardPass pass = forward(spec, store, batch, mode, {.keep_state = true});
      Tensor logit_grad(pass.logits.shape());
      double batch_loss = 0.0;
      for (std::size_t n = 0; n < count; ++n) {
        const std::size_t target = training.label(indices[n]);
        const float *row = pass.probabilities.image(n);
        const CrossEntropy ce = cross_entropy(std::span<const float>(row, classes), target, config.label_smoothing);
        batch_loss += ce.loss;
        correct += argmax_row(row, classes) == target ? 1 : 0;
        for (std::size_t c = 0; c < classes; ++c) {
          logit_grad(n, 0, 0, c) = ce.logit_grad[c] / static_cast<float>(count);
        }
      }
      if (first_batch) {
        history.initial_loss = batch_loss / static_cast<double>(count);
        first_batch = false;
      }
      loss_sum += batch_loss;

      const BackwardPass grads = backward(spec, store, pass, logit_grad);
      adam_step(store, grads.params, adam, hyper);
      commit_batchnorm_updates(store, pass);
    }

    const EvalResult val = evaluate(spec, store, validation, config.batch_size);
    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = lr;
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(training.size());
    record.train_loss = loss_sum / static_cast<double>(training.size());
    record.val_accuracy = val.accuracy;
    record.val_loss = val.mean_loss;
    history.epochs.push_back(record);
    if (observer && !observer(record)) {
      break;
    }
  }
  return history;
}

EvalResult evaluate(const ModelSpec &spec, const ParamStore &store, const Dataset &data, std::size_t batch_size) {
  if (data.size() == 0) {
    throw InputError("cannot evaluate an empty dataset");
  }
  if (batch_size == 0) {
    throw ConfigError("batch_size must be positive");
  }
  const std::size_t classes = spec.num_classes;
  EvalResult result;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> indices;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, data.size() - start);
    indices.resize(count);
    std::iota(indices.begin(), indices.end(), start);
    const Tensor probs = infer(spec, store, load_batch(data, indices));
    for (std::size_t n = 0; n < count; ++n) {
      const std::size_t target = data.label(indices[n]);
      if (target >= classes) {
        throw InputError("label " + std::to_string(target) + " outside the model head");
      }
      const float *row = probs.image(n);
      const std::size_t pred = argmax_row(row, classes);
      loss_sum += cross_entropy(std::span<const float>(row, classes), target, 0.0).loss;
      correct += pred == target ? 1 : 0;
      result.labels.push_back(target);
      result.predictions.push_back(pred);
      result.probabilities.emplace_back(row, row + classes);
    }
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  result.mean_loss = loss_sum / static_cast<double>(data.size());
  return result;
}

} // namespace pd36
