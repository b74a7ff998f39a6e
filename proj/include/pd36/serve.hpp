#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>

#include "pd36/data_io.hpp"
#include "pd36/explain.hpp"
#include "pd36/model.hpp"

namespace httplib {
class Server;
}

namespace pd36 {

/// An immutable model bundle shared by concurrent requests.
struct LoadedModel {
  Model model;
  KnowledgeBase knowledge;
  /// "pd36c-<crc32 of the weight payload>".
  std::string model_id;
};

std::shared_ptr<const LoadedModel> make_loaded_model(Model model, KnowledgeBase knowledge);

struct PredictResponse {
  Prediction prediction;
  double latency_ms = 0.0;
  std::string model_id;
  std::optional<DiseaseInfo> disease;
  std::string conversion;
};

/// Decode, resize to the model extent, infer. Latency covers all three.
PredictResponse predict_image_bytes(const LoadedModel &loaded, std::span<const std::uint8_t> bytes, std::size_t k);

std::string predict_response_json(const PredictResponse &response);
std::string model_info_json(const LoadedModel &loaded);
std::string disease_info_json(const DiseaseInfo &info);
std::string error_json(std::string_view code, std::string_view message);

struct GradCamResponse {
  HeatMap heat;
  std::string class_name;
  std::vector<std::uint8_t> heatmap_png;
  std::vector<std::uint8_t> overlay_png;
};

/// `class_name` picks the target class by name or display name; the
/// predicted class is used when absent. Unknown names raise InputError.
GradCamResponse gradcam_image_bytes(const LoadedModel &loaded, std::span<const std::uint8_t> bytes,
                                    const std::optional<std::string> &class_name, ClassScore score);
std::string gradcam_response_json(const GradCamResponse &response);

struct HttpReply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Request handling independent of the transport, plus mounting onto an
/// httplib server. set_model atomically swaps the whole model bundle.
class Service {
public:
  void set_model(std::shared_ptr<const LoadedModel> model);
  std::shared_ptr<const LoadedModel> model() const;

  HttpReply health() const;
  HttpReply model_info() const;
  HttpReply predict(std::span<const std::uint8_t> image, std::size_t k) const;
  HttpReply gradcam(std::span<const std::uint8_t> image, const std::optional<std::string> &class_name,
                    ClassScore score) const;
  HttpReply class_info(std::string_view name) const;

  void mount(httplib::Server &server) const;

private:
  mutable std::mutex mutex_;
  std::shared_ptr<const LoadedModel> model_;
};

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8036;
};

/// "host:port" or ":port"; PD36_BIND overrides the given default.
BindAddress parse_bind(std::string_view text);
BindAddress resolve_bind(const BindAddress &fallback);

} // namespace pd36
