// pd36: train, evaluate, inspect and serve the PD36-C classifier.
//
// Exit codes: 0 success, 1 bad input (files, flags, data), 2 internal failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "pd36/data_io.hpp"
#include "pd36/explain.hpp"
#include "pd36/image.hpp"
#include "pd36/metrics.hpp"
#include "pd36/parallel.hpp"
#include "pd36/serve.hpp"
#include "pd36/trainer.hpp"

namespace fs = std::filesystem;
using namespace pd36;

namespace {

constexpr std::size_t canonical_trainable = 1'248'774;
constexpr std::size_t canonical_non_trainable = 1'920;
constexpr std::size_t canonical_total = 1'250'694;

void write_text(const fs::path &path, const std::string &text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

void print_warnings(const std::vector<std::string> &warnings) {
  for (const std::string &w : warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

KnowledgeBase knowledge_for(const std::string &path, const ModelSpec &spec, bool verbose) {
  const fs::path p = path.empty() ? default_knowledge_base_path() : fs::path(path);
  if (!fs::exists(p)) {
    if (!path.empty()) {
      throw InputError("knowledge base not found: " + p.string());
    }
    return KnowledgeBase::parse("", spec.class_names);
  }
  KnowledgeBase kb = KnowledgeBase::load(p, spec.class_names);
  if (verbose) {
    print_warnings(kb.warnings());
  }
  return kb;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string train_split = "train";
  std::string val_split = "valid";
  std::string out = "pd36c.weights";
  std::string history = "history.csv";
  std::size_t extent = 224;
  TrainConfig cfg;
};

int cmd_train(const TrainArgs &a) {
  const DatasetManifest train_m = scan_dataset(a.data, a.train_split);
  const DatasetManifest val_m = scan_dataset(a.data, a.val_split);
  print_warnings(train_m.warnings);
  print_warnings(val_m.warnings);
  if (train_m.classes != val_m.classes) {
    throw InputError("training and validation splits list different class directories");
  }
  if (train_m.classes.size() < 2) {
    throw InputError("need at least two class directories under " + (fs::path(a.data) / a.train_split).string());
  }
  ArchConfig arch;
  arch.num_classes = train_m.classes.size();
  arch.input_extent = a.extent;
  Model model;
  model.spec = make_spec(arch);
  model.spec.class_names = train_m.classes;
  model.params = init_params(model.spec, a.cfg.seed);

  const DirectoryDataset train_set(train_m, a.extent);
  const DirectoryDataset val_set(val_m, a.extent);
  std::printf("%-6s %-14s %-18s %-14s %-20s %-16s\n", "Epoch", "Learning rate", "Training accuracy", "Training loss",
              "Validation accuracy", "Validation loss");
  const TrainHistory history =
      train(model.spec, model.params, train_set, val_set, a.cfg, [](const EpochRecord &e) {
        std::printf("%-6zu %-14g %-18.4f %-14.4f %-20.4f %-16.4f\n", e.epoch, e.learning_rate, e.train_accuracy,
                    e.train_loss, e.val_accuracy, e.val_loss);
        std::fflush(stdout);
        return true;
      });
  save_weights(model.spec, model.params, a.out);
  write_history(history.epochs, a.history);
  std::printf("best validation accuracy at epoch %zu, best validation loss at epoch %zu\n",
              history.best_accuracy_epoch(), history.best_loss_epoch());
  std::printf("weights: %s\nhistory: %s\n", a.out.c_str(), a.history.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string weights;
  std::string data;
  std::string split = "valid";
  std::string report;
  std::string json;
  std::string confusion;
  std::string margins;
  std::size_t batch = 8;
};

int cmd_eval(const EvalArgs &a) {
  const Model model = load_weights(a.weights);
  const DatasetManifest m = scan_dataset(a.data, a.split);
  print_warnings(m.warnings);
  if (m.classes.size() != model.spec.num_classes) {
    throw InputError("dataset has " + std::to_string(m.classes.size()) + " classes but the model head has " +
                     std::to_string(model.spec.num_classes));
  }
  if (m.classes != model.spec.class_names) {
    std::cerr << "warning: dataset class names differ from the names stored with the weights\n";
  }
  const DirectoryDataset data(m, model.spec.input_extent);
  const EvalResult result = evaluate(model.spec, model.params, data, a.batch);
  const ScoreMatrix scores = ScoreMatrix::from_rows(result.probabilities);
  const MetricsReport report = build_report(result.labels, result.predictions, model.spec.class_names, &scores);
  const std::string text = format_report_text(report);
  std::cout << text;
  if (!a.report.empty()) {
    write_text(a.report, text);
  }
  if (!a.json.empty()) {
    write_text(a.json, format_report_json(report));
  }
  if (!a.confusion.empty()) {
    write_text(a.confusion, confusion_csv(report.confusion, report.labels));
  }
  if (!a.margins.empty()) {
    write_text(a.margins, margins_csv(margins(scores, result.labels)));
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string weights;
  std::string image;
  std::string kb;
  std::size_t k = 5;
  bool json = false;
  std::size_t bench = 0;
};

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double rank = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (rank - static_cast<double>(lo));
}

int cmd_predict(const PredictArgs &a) {
  Model model = load_weights(a.weights);
  if (a.k == 0) {
    throw InputError("k must be a positive integer");
  }
  const std::size_t k = std::min(a.k, model.spec.num_classes);
  KnowledgeBase kb = knowledge_for(a.kb, model.spec, !a.json);
  const auto loaded = make_loaded_model(std::move(model), std::move(kb));
  const std::vector<std::uint8_t> bytes = read_file_bytes(a.image);
  const PredictResponse r = predict_image_bytes(*loaded, bytes, k);

  std::vector<double> runs;
  for (std::size_t i = 0; i < a.bench; ++i) {
    runs.push_back(predict_image_bytes(*loaded, bytes, k).latency_ms);
  }

  if (a.json) {
    std::string out = predict_response_json(r);
    if (!runs.empty()) {
      const double mean = std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
      char buf[160];
      std::snprintf(buf, sizeof buf, ",\"bench\":{\"runs\":%zu,\"mean_ms\":%.3f,\"p95_ms\":%.3f}}", runs.size(), mean,
                    percentile(runs, 0.95));
      out.pop_back();
      out += buf;
    }
    std::cout << out << "\n";
    return 0;
  }
  if (!r.conversion.empty()) {
    std::cerr << "note: input converted (" << r.conversion << ")\n";
  }
  std::printf("class: %s (index %zu)\nconfidence: %.6f\n", r.prediction.class_name.c_str(), r.prediction.class_index,
              r.prediction.confidence);
  std::printf("top-%zu:\n", r.prediction.top_k.size());
  for (const ClassProbability &c : r.prediction.top_k) {
    std::printf("  %2zu  %-50s %.6f\n", c.class_index, c.class_name.c_str(), c.probability);
  }
  std::printf("latency: %.3f ms\nmodel: %s\n", r.latency_ms, r.model_id.c_str());
  if (!runs.empty()) {
    const double mean = std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
    std::printf("bench: %zu runs, mean %.3f ms, p95 %.3f ms\n", runs.size(), mean, percentile(runs, 0.95));
  }
  if (r.disease) {
    std::printf("about: %s\ntreatment: %s\n", r.disease->description.c_str(), r.disease->treatment.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct GradCamArgs {
  std::string weights;
  std::string image;
  std::string class_name;
  std::string score = "logit";
  std::string layer = "conv2d_7";
  std::string heatmap = "gradcam.png";
  std::string overlay;
  std::string csv;
  std::string features;
};

int cmd_gradcam(const GradCamArgs &a) {
  const Model model = load_weights(a.weights);
  const ModelSpec &spec = model.spec;
  const LoadedImage image = load_image(a.image, 256, spec.input_extent);
  if (a.score != "logit" && a.score != "probability") {
    throw InputError("--score must be 'logit' or 'probability'");
  }
  std::size_t target = 0;
  if (a.class_name.empty()) {
    target = predict(spec, model.params, image.tensor, spec.class_names, 1).class_index;
  } else {
    const std::string key = normalize_class_key(a.class_name);
    const auto it = std::find_if(spec.class_names.begin(), spec.class_names.end(),
                                 [&](const std::string &n) { return normalize_class_key(n) == key; });
    if (it == spec.class_names.end()) {
      throw InputError("unknown class '" + a.class_name + "'");
    }
    target = static_cast<std::size_t>(it - spec.class_names.begin());
  }
  GradCamOptions opt;
  opt.target_layer = a.layer;
  opt.score = a.score == "logit" ? ClassScore::logit : ClassScore::probability;
  const HeatMap heat = grad_cam(spec, model.params, image.tensor, target, opt);
  write_file_bytes(a.heatmap, encode_png_gray(heat.grid.width, heat.grid.height, grid_to_gray(heat.grid)));
  if (!a.overlay.empty()) {
    write_file_bytes(a.overlay, encode_png_rgb(overlay_heatmap(tensor_to_image(image.tensor), heat.grid, 0.4f)));
  }
  if (!a.csv.empty()) {
    write_text(a.csv, grid_csv(heat.grid));
  }
  std::printf("class: %s (index %zu)\nlayer: %s\nextent: %zux%zu%s\n", spec.class_names[target].c_str(), target,
              heat.layer.c_str(), heat.grid.height, heat.grid.width, heat.constant ? "\nraw map constant" : "");
  if (!a.features.empty()) {
    fs::create_directories(a.features);
    const FeatureGrid grid = feature_maps(spec, model.params, image.tensor);
    for (const FeatureLayer &layer : grid.layers) {
      for (std::size_t k = 0; k < layer.maps.size(); ++k) {
        const Grid &g = layer.maps[k];
        char name[96];
        std::snprintf(name, sizeof name, "%s_%02zu.png", layer.conv.c_str(), k);
        write_file_bytes(fs::path(a.features) / name, encode_png_gray(g.width, g.height, grid_to_gray(g)));
      }
    }
    std::printf("feature maps: %zu layers written to %s\n", grid.layers.size(), a.features.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  std::string weights;
  std::size_t classes = 38;
  std::size_t extent = 224;
};

int cmd_inspect(const InspectArgs &a) {
  Model model = a.weights.empty() ? build_pd36c(a.classes, 0, a.extent) : load_weights(a.weights);
  const ParamAudit audit = param_audit(model.spec, model.params);
  std::cout << format_audit(audit);
  std::printf("Weight payload %s bytes (%.2f MiB)\n", with_thousands(audit.payload_bytes()).c_str(),
              static_cast<double>(audit.payload_bytes()) / (1024.0 * 1024.0));
  std::printf("Convolution params %s (%.1f%%), dense params %s (%.1f%%)\n", with_thousands(audit.conv_params).c_str(),
              100.0 * static_cast<double>(audit.conv_params) / static_cast<double>(audit.total),
              with_thousands(audit.hidden_dense_params).c_str(),
              100.0 * static_cast<double>(audit.hidden_dense_params) / static_cast<double>(audit.total));
  const ArchConfig canonical;
  const bool is_canonical = model.spec.num_classes == canonical.num_classes &&
                            model.spec.arch.filters == canonical.filters &&
                            model.spec.arch.dense_units == canonical.dense_units;
  if (is_canonical && (audit.trainable != canonical_trainable || audit.non_trainable != canonical_non_trainable ||
                       audit.total != canonical_total)) {
    std::cerr << "error: parameter audit does not match the reference totals\n";
    return 2;
  }
  return 0;
}

int cmd_stats(const std::string &data, const std::vector<std::string> &splits) {
  for (const std::string &split : splits) {
    const DatasetManifest m = scan_dataset(data, split);
    print_warnings(m.warnings);
    std::printf("[%s]\n%s", split.empty() ? "." : split.c_str(), format_split_stats(split_stats(m)).c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------

httplib::Server *active_server = nullptr;

void stop_server(int) {
  if (active_server != nullptr) {
    active_server->stop();
  }
}

struct ServeArgs {
  std::string weights;
  std::string kb;
  std::string bind = "127.0.0.1:8036";
};

int cmd_serve(const ServeArgs &a) {
  Model model = load_weights(a.weights);
  KnowledgeBase kb = knowledge_for(a.kb, model.spec, true);
  Service service;
  service.set_model(make_loaded_model(std::move(model), std::move(kb)));
  const BindAddress bind = resolve_bind(parse_bind(a.bind));
  httplib::Server server;
  service.mount(server);
  active_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  if (!server.bind_to_port(bind.host, bind.port)) {
    throw InputError("cannot bind " + bind.host + ":" + std::to_string(bind.port));
  }
  std::printf("serving %s on http://%s:%d\n", service.model()->model_id.c_str(), bind.host.c_str(), bind.port);
  std::fflush(stdout);
  server.listen_after_bind();
  active_server = nullptr;
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"PD36-C plant disease classifier"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();

  TrainArgs ta;
  auto *train_cmd = app.add_subcommand("train", "Train on root/<split>/<Class>/* images");
  train_cmd->add_option("--data", ta.data, "Dataset root")->required();
  train_cmd->add_option("--train-split", ta.train_split, "Training split directory")->capture_default_str();
  train_cmd->add_option("--val-split", ta.val_split, "Validation split directory")->capture_default_str();
  train_cmd->add_option("--out", ta.out, "Output weight file")->capture_default_str();
  train_cmd->add_option("--history", ta.history, "Output history CSV")->capture_default_str();
  train_cmd->add_option("--epochs", ta.cfg.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", ta.cfg.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--lr", ta.cfg.lr_phase1, "Learning rate before the step")->capture_default_str();
  train_cmd->add_option("--lr-late", ta.cfg.lr_phase2, "Learning rate from --lr-step on")->capture_default_str();
  train_cmd->add_option("--lr-step", ta.cfg.phase2_start_epoch, "First epoch at --lr-late")->capture_default_str();
  train_cmd->add_option("--label-smoothing", ta.cfg.label_smoothing, "Label smoothing")->capture_default_str();
  train_cmd->add_option("--seed", ta.cfg.seed, "Seed for init, shuffling, augmentation, dropout")
      ->capture_default_str();
  train_cmd->add_option("--extent", ta.extent, "Model input extent (multiple of 16)")->capture_default_str();

  EvalArgs ea;
  auto *eval_cmd = app.add_subcommand("eval", "Evaluate weights on a labelled split");
  eval_cmd->add_option("--weights", ea.weights, "Weight file")->required();
  eval_cmd->add_option("--data", ea.data, "Dataset root")->required();
  eval_cmd->add_option("--split", ea.split, "Split directory")->capture_default_str();
  eval_cmd->add_option("--report", ea.report, "Write the text report here");
  eval_cmd->add_option("--json", ea.json, "Write the JSON report here");
  eval_cmd->add_option("--confusion", ea.confusion, "Write the confusion matrix CSV here");
  eval_cmd->add_option("--margins", ea.margins, "Write the confidence-margin CSV here");
  eval_cmd->add_option("--batch-size", ea.batch, "Inference batch size")->capture_default_str();

  PredictArgs pa;
  auto *predict_cmd = app.add_subcommand("predict", "Classify one image");
  predict_cmd->add_option("--weights", pa.weights, "Weight file")->required();
  predict_cmd->add_option("--image", pa.image, "PNG or JPEG image")->required();
  predict_cmd->add_option("-k,--top-k", pa.k, "Number of ranked classes")->capture_default_str();
  predict_cmd->add_option("--kb", pa.kb, "Knowledge base JSON (default: bundled)");
  predict_cmd->add_flag("--json", pa.json, "Print the response as JSON");
  predict_cmd->add_option("--bench", pa.bench, "Extra timed runs for mean/p95 latency")->capture_default_str();

  GradCamArgs ga;
  auto *gradcam_cmd = app.add_subcommand("gradcam", "Grad-CAM heatmap and feature maps for one image");
  gradcam_cmd->add_option("--weights", ga.weights, "Weight file")->required();
  gradcam_cmd->add_option("--image", ga.image, "PNG or JPEG image")->required();
  gradcam_cmd->add_option("--class", ga.class_name, "Target class (default: predicted)");
  gradcam_cmd->add_option("--score", ga.score, "logit or probability")->capture_default_str();
  gradcam_cmd->add_option("--layer", ga.layer, "Target convolution")->capture_default_str();
  gradcam_cmd->add_option("--heatmap", ga.heatmap, "Grayscale heatmap PNG")->capture_default_str();
  gradcam_cmd->add_option("--overlay", ga.overlay, "Colormapped overlay PNG");
  gradcam_cmd->add_option("--csv", ga.csv, "Raw heatmap grid CSV");
  gradcam_cmd->add_option("--features", ga.features, "Directory for per-layer feature-map PNGs");

  InspectArgs ia;
  auto *inspect_cmd = app.add_subcommand("inspect", "Parameter audit table");
  inspect_cmd->add_option("--weights", ia.weights, "Weight file (default: fresh model)");
  inspect_cmd->add_option("--classes", ia.classes, "Head size for a fresh model")->capture_default_str();
  inspect_cmd->add_option("--extent", ia.extent, "Input extent for the shape column")->capture_default_str();

  std::string stats_data;
  std::vector<std::string> stats_splits{"train", "valid"};
  auto *stats_cmd = app.add_subcommand("stats", "Per-split class balance statistics");
  stats_cmd->add_option("--data", stats_data, "Dataset root")->required();
  stats_cmd->add_option("--splits", stats_splits, "Split directories")->capture_default_str();

  ServeArgs sa;
  auto *serve_cmd = app.add_subcommand("serve", "HTTP inference service (PD36_BIND overrides --bind)");
  serve_cmd->add_option("--weights", sa.weights, "Weight file")->required();
  serve_cmd->add_option("--kb", sa.kb, "Knowledge base JSON (default: bundled)");
  serve_cmd->add_option("--bind", sa.bind, "host:port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) {
      set_num_threads(threads);
    }
    if (*train_cmd) {
      return cmd_train(ta);
    }
    if (*eval_cmd) {
      return cmd_eval(ea);
    }
    if (*predict_cmd) {
      return cmd_predict(pa);
    }
    if (*gradcam_cmd) {
      return cmd_gradcam(ga);
    }
    if (*inspect_cmd) {
      return cmd_inspect(ia);
    }
    if (*stats_cmd) {
      return cmd_stats(stats_data, stats_splits);
    }
    if (*serve_cmd) {
      return cmd_serve(sa);
    }
  } catch (const InputError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
