#include "pd36/serve.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "pd36/image.hpp"

namespace pd36 {

using nlohmann::json;

std::shared_ptr<const LoadedModel> make_loaded_model(Model model, KnowledgeBase knowledge) {
  auto loaded = std::make_shared<LoadedModel>();
  char id[32];
  std::snprintf(id, sizeof id, "pd36c-%08x", payload_checksum(model.params));
  loaded->model = std::move(model);
  loaded->knowledge = std::move(knowledge);
  loaded->model_id = id;
  return loaded;
}

PredictResponse predict_image_bytes(const LoadedModel &loaded, std::span<const std::uint8_t> bytes, std::size_t k) {
  const auto start = std::chrono::steady_clock::now();
  const ModelSpec &spec = loaded.model.spec;
  const LoadedImage image = load_image_bytes(bytes, 256, spec.input_extent);
  PredictResponse r;
  r.prediction = predict(spec, loaded.model.params, image.tensor, spec.class_names, k);
  r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  r.model_id = loaded.model_id;
  r.conversion = image.conversion;
  if (const DiseaseInfo *info = loaded.knowledge.lookup(r.prediction.class_name)) {
    r.disease = *info;
  }
  return r;
}

namespace {

json disease_json(const DiseaseInfo &info) {
  return {{"class_name", info.class_name},
          {"display_name", info.display_name},
          {"description", info.description},
          {"treatment", info.treatment},
          {"placeholder", info.placeholder}};
}

} // namespace

std::string predict_response_json(const PredictResponse &r) {
  json top = json::array();
  for (const ClassProbability &c : r.prediction.top_k) {
    top.push_back({{"class_index", c.class_index}, {"class_name", c.class_name}, {"probability", c.probability}});
  }
  json j{{"class_name", r.prediction.class_name},
         {"class_index", r.prediction.class_index},
         {"confidence", r.prediction.confidence},
         {"top_k", top},
         {"latency_ms", r.latency_ms},
         {"model_id", r.model_id},
         {"disease_info", r.disease ? disease_json(*r.disease) : json(nullptr)}};
  if (!r.conversion.empty()) {
    j["conversion"] = r.conversion;
  }
  return j.dump();
}

std::string model_info_json(const LoadedModel &loaded) {
  const ModelSpec &spec = loaded.model.spec;
  const ParamAudit audit = param_audit(spec, loaded.model.params);
  return json{{"model_id", loaded.model_id},
              {"architecture", "pd36c"},
              {"num_classes", spec.num_classes},
              {"class_names", spec.class_names},
              {"input_extent", spec.input_extent},
              {"parameters",
               {{"trainable", audit.trainable},
                {"non_trainable", audit.non_trainable},
                {"total", audit.total},
                {"payload_bytes", audit.payload_bytes()}}}}
      .dump();
}

std::string disease_info_json(const DiseaseInfo &info) { return disease_json(info).dump(); }

std::string error_json(std::string_view code, std::string_view message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

namespace {

std::size_t resolve_class(const ModelSpec &spec, const std::string &name) {
  const std::string key = normalize_class_key(name);
  for (std::size_t i = 0; i < spec.class_names.size(); ++i) {
    if (normalize_class_key(spec.class_names[i]) == key ||
        normalize_class_key(display_name(spec.class_names[i])) == key) {
      return i;
    }
  }
  if (!name.empty() && name.find_first_not_of("0123456789") == std::string::npos) {
    const unsigned long long index = std::stoull(name);
    if (index < spec.num_classes) {
      return static_cast<std::size_t>(index);
    }
  }
  throw InputError("unknown class '" + name + "'");
}

} // namespace

GradCamResponse gradcam_image_bytes(const LoadedModel &loaded, std::span<const std::uint8_t> bytes,
                                    const std::optional<std::string> &class_name, ClassScore score) {
  const ModelSpec &spec = loaded.model.spec;
  const LoadedImage image = load_image_bytes(bytes, 256, spec.input_extent);
  std::size_t target = 0;
  if (class_name) {
    target = resolve_class(spec, *class_name);
  } else {
    target = predict(spec, loaded.model.params, image.tensor, spec.class_names, 1).class_index;
  }
  GradCamResponse r;
  r.heat = grad_cam(spec, loaded.model.params, image.tensor, target, {.score = score});
  r.class_name = spec.class_names[target];
  r.heatmap_png = encode_png_gray(r.heat.grid.width, r.heat.grid.height, grid_to_gray(r.heat.grid));
  r.overlay_png = encode_png_rgb(overlay_heatmap(tensor_to_image(image.tensor), r.heat.grid, 0.4f));
  return r;
}

std::string gradcam_response_json(const GradCamResponse &r) {
  json grid = json::array();
  for (std::size_t y = 0; y < r.heat.grid.height; ++y) {
    const auto *row = r.heat.grid.values.data() + y * r.heat.grid.width;
    grid.push_back(std::vector<float>(row, row + r.heat.grid.width));
  }
  return json{{"class_index", r.heat.class_index},
              {"class_name", r.class_name},
              {"layer", r.heat.layer},
              {"height", r.heat.grid.height},
              {"width", r.heat.grid.width},
              {"constant", r.heat.constant},
              {"heatmap_png_base64", base64_encode(r.heatmap_png)},
              {"overlay_png_base64", base64_encode(r.overlay_png)},
              {"grid", grid}}
      .dump();
}

// ---------------------------------------------------------------------------

void Service::set_model(std::shared_ptr<const LoadedModel> model) {
  std::lock_guard lock(mutex_);
  model_ = std::move(model);
}

std::shared_ptr<const LoadedModel> Service::model() const {
  std::lock_guard lock(mutex_);
  return model_;
}

namespace {

HttpReply not_ready() { return {503, "application/json", error_json("not_ready", "no model loaded")}; }

template <class F> HttpReply guarded(F &&fn) {
  try {
    return fn();
  } catch (const FormatError &e) {
    return {400, "application/json", error_json("bad_image", e.what())};
  } catch (const InputError &e) {
    return {400, "application/json", error_json("bad_request", e.what())};
  } catch (const std::exception &e) {
    return {500, "application/json", error_json("internal", e.what())};
  }
}

} // namespace

HttpReply Service::health() const {
  const auto m = model();
  return {200, "application/json",
          json{{"status", "ok"}, {"model_ready", m != nullptr}, {"model_id", m ? m->model_id : ""}}.dump()};
}

HttpReply Service::model_info() const {
  const auto m = model();
  if (!m) {
    return not_ready();
  }
  return {200, "application/json", model_info_json(*m)};
}

HttpReply Service::predict(std::span<const std::uint8_t> image, std::size_t k) const {
  const auto m = model();
  if (!m) {
    return not_ready();
  }
  return guarded([&] {
    const std::size_t kk = std::min(k, m->model.spec.num_classes);
    return HttpReply{200, "application/json", predict_response_json(predict_image_bytes(*m, image, kk))};
  });
}

HttpReply Service::gradcam(std::span<const std::uint8_t> image, const std::optional<std::string> &class_name,
                           ClassScore score) const {
  const auto m = model();
  if (!m) {
    return not_ready();
  }
  if (class_name) {
    try {
      resolve_class(m->model.spec, *class_name);
    } catch (const InputError &e) {
      return {404, "application/json", error_json("unknown_class", e.what())};
    }
  }
  return guarded([&] {
    return HttpReply{200, "application/json",
                     gradcam_response_json(gradcam_image_bytes(*m, image, class_name, score))};
  });
}

HttpReply Service::class_info(std::string_view name) const {
  const auto m = model();
  if (!m) {
    return not_ready();
  }
  const DiseaseInfo *info = m->knowledge.lookup(name);
  if (info == nullptr) {
    return {404, "application/json", error_json("unknown_class", "unknown class '" + std::string(name) + "'")};
  }
  return {200, "application/json", disease_info_json(*info)};
}

namespace {

void send(httplib::Response &res, const HttpReply &reply) {
  res.status = reply.status;
  res.set_content(reply.body, reply.content_type);
}

std::optional<std::string> upload(const httplib::Request &req) {
  if (req.has_file("image")) {
    return req.get_file_value("image").content;
  }
  if (!req.is_multipart_form_data() && !req.body.empty()) {
    return req.body;
  }
  return std::nullopt;
}

std::span<const std::uint8_t> as_bytes(const std::string &s) {
  return std::span(reinterpret_cast<const std::uint8_t *>(s.data()), s.size());
}

std::optional<std::string> field(const httplib::Request &req, const char *name) {
  if (req.has_file(name)) {
    return req.get_file_value(name).content;
  }
  if (req.has_param(name)) {
    return req.get_param_value(name);
  }
  return std::nullopt;
}

const HttpReply missing_image{400, "application/json",
                              error_json("missing_image", "send the image as multipart field 'image'")};

} // namespace

void Service::mount(httplib::Server &server) const {
  server.Get("/health", [this](const httplib::Request &, httplib::Response &res) { send(res, health()); });
  server.Get("/model/info", [this](const httplib::Request &, httplib::Response &res) { send(res, model_info()); });
  server.Post("/predict", [this](const httplib::Request &req, httplib::Response &res) {
    const auto image = upload(req);
    if (!image) {
      send(res, missing_image);
      return;
    }
    std::size_t k = 5;
    if (const auto v = field(req, "k")) {
      try {
        k = std::stoul(*v);
      } catch (const std::exception &) {
        send(res, {400, "application/json", error_json("bad_request", "k must be a positive integer")});
        return;
      }
    }
    if (k == 0) {
      send(res, {400, "application/json", error_json("bad_request", "k must be a positive integer")});
      return;
    }
    send(res, predict(as_bytes(*image), k));
  });
  server.Post("/gradcam", [this](const httplib::Request &req, httplib::Response &res) {
    const auto image = upload(req);
    if (!image) {
      send(res, missing_image);
      return;
    }
    ClassScore score = ClassScore::logit;
    if (const auto s = field(req, "score")) {
      if (*s == "probability") {
        score = ClassScore::probability;
      } else if (*s != "logit") {
        send(res, {400, "application/json", error_json("bad_request", "score must be 'logit' or 'probability'")});
        return;
      }
    }
    send(res, gradcam(as_bytes(*image), field(req, "class"), score));
  });
  server.Get(R"(/classes/(.+)/info)", [this](const httplib::Request &req, httplib::Response &res) {
    send(res, class_info(httplib::detail::decode_url(req.matches[1], false)));
  });
  server.set_exception_handler([](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
    std::string message = "unexpected failure";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception &e) {
      message = e.what();
    } catch (...) {
    }
    send(res, {500, "application/json", error_json("internal", message)});
  });
}

BindAddress parse_bind(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("bind address must be host:port, got '" + std::string(text) + "'");
  }
  BindAddress b;
  if (colon > 0) {
    b.host = std::string(text.substr(0, colon));
  }
  const std::string port(text.substr(colon + 1));
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) {
      throw std::invalid_argument("port");
    }
    b.port = p;
  } catch (const std::logic_error &) {
    throw ConfigError("invalid port in bind address '" + std::string(text) + "'");
  }
  return b;
}

BindAddress resolve_bind(const BindAddress &fallback) {
  if (const char *env = std::getenv("PD36_BIND"); env != nullptr && *env != '\0') {
    return parse_bind(env);
  }
  return fallback;
}

} // namespace pd36
