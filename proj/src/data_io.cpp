#include "pd36/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <zlib.h>

#include "json.hpp"
#include "pd36/image.hpp"

namespace fs = std::filesystem;

namespace pd36 {

std::size_t DatasetManifest::total() const {
  std::size_t n = 0;
  for (const auto &f : files) {
    n += f.size();
  }
  return n;
}

std::vector<std::size_t> DatasetManifest::counts() const {
  std::vector<std::size_t> c;
  c.reserve(files.size());
  for (const auto &f : files) {
    c.push_back(f.size());
  }
  return c;
}

namespace {

bool has_image_extension(const fs::path &p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool is_hidden(const fs::path &p) {
  const std::string name = p.filename().string();
  return !name.empty() && name.front() == '.';
}

} // namespace

DatasetManifest scan_dataset(const fs::path &root, const std::string &split) {
  DatasetManifest m;
  m.root = root;
  m.split = split;
  const fs::path dir = split.empty() ? root : root / split;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw InputError("dataset directory not found: " + dir.string());
  }
  std::vector<fs::path> class_dirs;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (is_hidden(entry.path())) {
      m.warnings.push_back("skipped hidden entry " + entry.path().string());
    } else if (entry.is_directory()) {
      class_dirs.push_back(entry.path());
    } else {
      m.warnings.push_back("skipped non-directory " + entry.path().string());
    }
  }
  std::sort(class_dirs.begin(), class_dirs.end(),
            [](const fs::path &a, const fs::path &b) { return a.filename().string() < b.filename().string(); });
  for (const fs::path &cd : class_dirs) {
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(cd)) {
      const fs::path &p = entry.path();
      if (is_hidden(p)) {
        m.warnings.push_back("skipped hidden entry " + p.string());
      } else if (!entry.is_regular_file() || !has_image_extension(p)) {
        m.warnings.push_back("skipped non-image " + p.string());
      } else {
        files.push_back(p);
      }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path &a, const fs::path &b) { return a.filename().string() < b.filename().string(); });
    if (files.empty()) {
      m.warnings.push_back("class directory " + cd.filename().string() + " contains no images");
    }
    m.classes.push_back(cd.filename().string());
    m.files.push_back(std::move(files));
  }
  return m;
}

SplitStats split_stats(std::span<const std::size_t> counts) {
  if (counts.empty()) {
    throw InputError("split statistics need at least one class");
  }
  SplitStats s;
  s.classes = counts.size();
  s.total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  s.min = *std::min_element(counts.begin(), counts.end());
  s.max = *std::max_element(counts.begin(), counts.end());
  s.mean = static_cast<double>(s.total) / static_cast<double>(s.classes);
  double ss = 0.0;
  for (std::size_t c : counts) {
    const double d = static_cast<double>(c) - s.mean;
    ss += d * d;
  }
  s.stddev = std::sqrt(ss / static_cast<double>(s.classes));
  s.balance = s.mean > 0.0 ? balance_indicator(s.mean, s.stddev) : 0.0;
  return s;
}

SplitStats split_stats(const DatasetManifest &manifest) {
  const std::vector<std::size_t> c = manifest.counts();
  return split_stats(c);
}

double balance_indicator(double mean, double stddev) {
  if (!(mean > 0.0)) {
    throw InputError("balance indicator needs a positive mean");
  }
  return stddev / mean;
}

std::string format_split_stats(const SplitStats &s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "Number of Classes   %zu\n"
                "Total Images        %s\n"
                "Average             %.2f\n"
                "Standard Deviation  %.2f\n"
                "Minimum             %s\n"
                "Maximum             %s\n"
                "Balance indicator   %.3f\n",
                s.classes, with_thousands(s.total).c_str(), s.mean, s.stddev, with_thousands(s.min).c_str(),
                with_thousands(s.max).c_str(), s.balance);
  return buf;
}

HoldoutSplit split_holdout(const DatasetManifest &source, std::size_t count, std::uint64_t seed) {
  const std::size_t total = source.total();
  if (count > total) {
    throw InputError("holdout of " + std::to_string(count) + " exceeds the " + std::to_string(total) +
                     " available images");
  }
  std::vector<std::pair<std::size_t, std::size_t>> all;
  all.reserve(total);
  for (std::size_t c = 0; c < source.files.size(); ++c) {
    for (std::size_t i = 0; i < source.files[c].size(); ++i) {
      all.emplace_back(c, i);
    }
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(all[i], all[i + rng.below(all.size() - i)]);
  }
  std::vector<std::vector<bool>> taken(source.files.size());
  for (std::size_t c = 0; c < source.files.size(); ++c) {
    taken[c].assign(source.files[c].size(), false);
  }
  for (std::size_t i = 0; i < count; ++i) {
    taken[all[i].first][all[i].second] = true;
  }
  HoldoutSplit out;
  out.remaining = source;
  out.holdout = source;
  out.holdout.split = source.split + "-holdout";
  out.remaining.warnings.clear();
  out.holdout.warnings.clear();
  for (std::size_t c = 0; c < source.files.size(); ++c) {
    out.remaining.files[c].clear();
    out.holdout.files[c].clear();
    for (std::size_t i = 0; i < source.files[c].size(); ++i) {
      (taken[c][i] ? out.holdout : out.remaining).files[c].push_back(source.files[c][i]);
    }
  }
  return out;
}

namespace {

LoadedImage finish_load(const Decoded &decoded, std::size_t store_extent, std::size_t model_extent) {
  LoadedImage out;
  out.conversion = decoded.conversion;
  const Tensor raw = image_to_tensor(decoded.image);
  const Tensor stored = resize_bilinear(raw, store_extent, store_extent);
  out.tensor = resize_bilinear(stored, model_extent, model_extent);
  return out;
}

} // namespace

LoadedImage load_image(const fs::path &path, std::size_t store_extent, std::size_t model_extent) {
  return finish_load(read_image_file(path), store_extent, model_extent);
}

LoadedImage load_image_bytes(std::span<const std::uint8_t> bytes, std::size_t store_extent,
                             std::size_t model_extent) {
  return finish_load(decode_image(bytes), store_extent, model_extent);
}

DirectoryDataset::DirectoryDataset(DatasetManifest manifest, std::size_t model_extent)
    : manifest_(std::move(manifest)), extent_(model_extent) {
  for (std::size_t c = 0; c < manifest_.files.size(); ++c) {
    for (const fs::path &p : manifest_.files[c]) {
      paths_.push_back(p);
      labels_.push_back(c);
    }
  }
}

Tensor DirectoryDataset::image(std::size_t index) const { return load_image(paths_.at(index), 256, extent_).tensor; }

// ---------------------------------------------------------------------------

namespace {

class Writer {
public:
  void bytes(const void *p, std::size_t n) {
    const auto *b = static_cast<const std::uint8_t *>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <class U> void le(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
    }
  }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}
  std::span<const std::uint8_t> bytes(std::size_t n, const char *what) {
    if (data_.size() - pos_ < n) {
      throw FormatError(std::string("weight file truncated while reading ") + what);
    }
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <class U> U le(const char *what) {
    auto b = bytes(sizeof(U), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return static_cast<U>(v);
  }
  std::size_t remaining() const { return data_.size() - pos_; }

private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

constexpr char magic[4] = {'P', 'D', '3', '6'};

nlohmann::json arch_metadata(const ModelSpec &spec) {
  const ArchConfig &a = spec.arch;
  return {{"architecture", "pd36c"},
          {"num_classes", spec.num_classes},
          {"input_extent", spec.input_extent},
          {"class_names", spec.class_names},
          {"filters", a.filters},
          {"convs_per_block", a.convs_per_block},
          {"dense_units", a.dense_units},
          {"dropout_features", a.dropout_features},
          {"dropout_dense", a.dropout_dense},
          {"batchnorm_epsilon", a.batchnorm.epsilon},
          {"batchnorm_momentum", a.batchnorm.momentum},
          {"augment",
           {{"flip_prob", a.augment.flip_prob},
            {"rotation_factor", a.augment.rotation_factor},
            {"translation_factor", a.augment.translation_factor},
            {"zoom_factor", a.augment.zoom_factor},
            {"contrast_factor", a.augment.contrast_factor}}}};
}

void append_payload(std::vector<std::uint8_t> &out, const std::vector<float> &values) {
  for (float v : values) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
      out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
  }
}

std::uint32_t crc_update(std::uint32_t crc, std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size())));
}

} // namespace

std::uint32_t payload_checksum(const ParamStore &store) {
  std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0L, Z_NULL, 0));
  std::vector<std::uint8_t> buf;
  for (const ParamBuffer &b : store.buffers()) {
    buf.clear();
    append_payload(buf, b.values);
    crc = crc_update(crc, buf);
  }
  return crc;
}

std::vector<std::uint8_t> serialize_weights(const ModelSpec &spec, const ParamStore &store) {
  if (spec.class_names.size() != spec.num_classes) {
    throw ConfigError("model has " + std::to_string(spec.class_names.size()) + " class names for " +
                      std::to_string(spec.num_classes) + " outputs");
  }
  Writer w;
  w.bytes(magic, 4);
  w.le<std::uint32_t>(weight_format_version);
  const std::string meta = arch_metadata(spec).dump();
  w.le<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta.data(), meta.size());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(store.size()));
  std::vector<std::uint8_t> payload;
  for (const ParamBuffer &b : store.buffers()) {
    if (b.layer.size() > 0xffff || b.dims.size() > 0xff) {
      throw ConfigError("parameter buffer " + b.name() + " cannot be encoded");
    }
    w.le<std::uint16_t>(static_cast<std::uint16_t>(b.layer.size()));
    w.bytes(b.layer.data(), b.layer.size());
    w.le<std::uint8_t>(static_cast<std::uint8_t>(b.role));
    w.le<std::uint8_t>(b.trainable ? 1 : 0);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(b.dims.size()));
    for (std::size_t d : b.dims) {
      w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
    }
    payload.clear();
    append_payload(payload, b.values);
    w.le<std::uint64_t>(payload.size());
    w.bytes(payload.data(), payload.size());
  }
  w.le<std::uint32_t>(payload_checksum(store));
  return w.take();
}

Model deserialize_weights(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto m = r.bytes(4, "magic");
  if (std::memcmp(m.data(), magic, 4) != 0) {
    throw FormatError("not a PD36 weight file (bad magic)");
  }
  const auto version = r.le<std::uint32_t>("version");
  if (version != weight_format_version) {
    throw FormatError("unsupported weight format version " + std::to_string(version) + " (expected " +
                      std::to_string(weight_format_version) + ")");
  }
  const auto meta_len = r.le<std::uint32_t>("metadata length");
  const auto meta_bytes = r.bytes(meta_len, "metadata");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("weight metadata is not valid JSON: ") + e.what());
  }

  Model model;
  try {
    if (meta.at("architecture").get<std::string>() != "pd36c") {
      throw FormatError("unknown architecture " + meta.at("architecture").dump());
    }
    ArchConfig arch;
    arch.num_classes = meta.at("num_classes").get<std::size_t>();
    arch.input_extent = meta.at("input_extent").get<std::size_t>();
    arch.filters = meta.at("filters").get<std::vector<std::size_t>>();
    arch.convs_per_block = meta.at("convs_per_block").get<std::size_t>();
    arch.dense_units = meta.at("dense_units").get<std::size_t>();
    arch.dropout_features = meta.at("dropout_features").get<double>();
    arch.dropout_dense = meta.at("dropout_dense").get<double>();
    arch.batchnorm.epsilon = meta.at("batchnorm_epsilon").get<double>();
    arch.batchnorm.momentum = meta.at("batchnorm_momentum").get<double>();
    const auto &aug = meta.at("augment");
    arch.augment.flip_prob = aug.at("flip_prob").get<double>();
    arch.augment.rotation_factor = aug.at("rotation_factor").get<double>();
    arch.augment.translation_factor = aug.at("translation_factor").get<double>();
    arch.augment.zoom_factor = aug.at("zoom_factor").get<double>();
    arch.augment.contrast_factor = aug.at("contrast_factor").get<double>();
    model.spec = make_spec(arch);
    model.spec.class_names = meta.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("weight metadata incomplete: ") + e.what());
  } catch (const ConfigError &e) {
    throw FormatError(std::string("weight metadata describes an invalid model: ") + e.what());
  }
  if (model.spec.class_names.size() != model.spec.num_classes) {
    throw FormatError("weight metadata lists " + std::to_string(model.spec.class_names.size()) +
                      " class names for " + std::to_string(model.spec.num_classes) + " outputs");
  }

  model.params = init_params(model.spec, 0);
  const auto count = r.le<std::uint32_t>("record count");
  if (count != model.params.size()) {
    throw FormatError("weight file has " + std::to_string(count) + " records, model expects " +
                      std::to_string(model.params.size()));
  }
  std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0L, Z_NULL, 0));
  for (std::size_t i = 0; i < count; ++i) {
    ParamBuffer &dst = model.params[i];
    const auto name_len = r.le<std::uint16_t>("record name length");
    const auto name = r.bytes(name_len, "record name");
    const std::string layer(name.begin(), name.end());
    const auto role_raw = r.le<std::uint8_t>("record role");
    const auto trainable = r.le<std::uint8_t>("record flags");
    const auto rank = r.le<std::uint8_t>("record rank");
    std::vector<std::size_t> dims(rank);
    for (auto &d : dims) {
      d = r.le<std::uint32_t>("record dims");
    }
    const auto role = role_from_index(role_raw);
    if (!role || layer != dst.layer || *role != dst.role || dims != dst.dims || (trainable != 0) != dst.trainable) {
      throw FormatError("record " + std::to_string(i) + " (" + layer + ") does not match expected " + dst.name());
    }
    const auto len = r.le<std::uint64_t>("payload length");
    if (len != dst.values.size() * 4) {
      throw FormatError("record " + dst.name() + " payload is " + std::to_string(len) + " bytes, expected " +
                        std::to_string(dst.values.size() * 4));
    }
    const auto payload = r.bytes(static_cast<std::size_t>(len), "payload");
    crc = crc_update(crc, payload);
    for (std::size_t k = 0; k < dst.values.size(); ++k) {
      const std::uint32_t u = static_cast<std::uint32_t>(payload[4 * k]) |
                              (static_cast<std::uint32_t>(payload[4 * k + 1]) << 8) |
                              (static_cast<std::uint32_t>(payload[4 * k + 2]) << 16) |
                              (static_cast<std::uint32_t>(payload[4 * k + 3]) << 24);
      dst.values[k] = std::bit_cast<float>(u);
    }
  }
  const auto stored = r.le<std::uint32_t>("checksum");
  if (stored != crc) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "weight checksum mismatch (stored %08x, computed %08x)", stored, crc);
    throw FormatError(buf);
  }
  if (r.remaining() != 0) {
    throw FormatError(std::to_string(r.remaining()) + " trailing bytes after the weight checksum");
  }
  return model;
}

void save_weights(const ModelSpec &spec, const ParamStore &store, const fs::path &path) {
  write_file_bytes(path, serialize_weights(spec, store));
}

Model load_weights(const fs::path &path) {
  try {
    return deserialize_weights(read_file_bytes(path));
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string format_history_csv(const std::vector<EpochRecord> &epochs) {
  std::string out(history_header);
  out += "\n";
  char buf[256];
  for (const EpochRecord &e : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.learning_rate,
                  e.train_accuracy, e.train_loss, e.val_accuracy, e.val_loss);
    out += buf;
  }
  return out;
}

std::vector<EpochRecord> parse_history_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("history CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != history_header) {
    throw FormatError("history CSV header is '" + line + "'");
  }
  std::vector<EpochRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (cells.size() != 6) {
      throw FormatError("history line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " columns, expected 6");
    }
    EpochRecord e;
    try {
      std::size_t used = 0;
      const unsigned long long ep = std::stoull(cells[0], &used);
      if (used != cells[0].size()) {
        throw std::invalid_argument("epoch");
      }
      e.epoch = static_cast<std::size_t>(ep);
      double *fields[] = {&e.learning_rate, &e.train_accuracy, &e.train_loss, &e.val_accuracy, &e.val_loss};
      for (std::size_t k = 0; k < 5; ++k) {
        *fields[k] = std::stod(cells[k + 1], &used);
        if (used != cells[k + 1].size()) {
          throw std::invalid_argument("number");
        }
      }
    } catch (const std::logic_error &) {
      throw FormatError("history line " + std::to_string(line_no) + " is malformed: " + line);
    }
    out.push_back(e);
  }
  return out;
}

void write_history(const std::vector<EpochRecord> &epochs, const fs::path &path) {
  const std::string text = format_history_csv(epochs);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::vector<EpochRecord> read_history(const fs::path &path) {
  const auto bytes = read_file_bytes(path);
  return parse_history_csv(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

// ---------------------------------------------------------------------------

std::string normalize_class_key(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (unsigned char ch : name) {
    if (std::isalnum(ch) || ch == '(' || ch == ')') {
      if (pending_space && !out.empty()) {
        out += ' ';
      }
      pending_space = false;
      out += static_cast<char>(std::tolower(ch));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::string display_name(std::string_view class_name) {
  std::string out;
  bool pending_space = false;
  for (char ch : class_name) {
    if (ch == '_' || ch == ' ') {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) {
      out += ' ';
    }
    pending_space = false;
    out += ch;
  }
  return out;
}

const DiseaseInfo *KnowledgeBase::lookup(std::string_view name) const {
  const auto key = keys_.find(normalize_class_key(name));
  if (key == keys_.end()) {
    return nullptr;
  }
  return &entries_.at(key->second);
}

KnowledgeBase KnowledgeBase::parse(std::string_view json_text, const std::vector<std::string> &classes) {
  KnowledgeBase kb;
  std::map<std::string, DiseaseInfo> found;
  const bool blank = std::all_of(json_text.begin(), json_text.end(),
                                 [](unsigned char ch) { return std::isspace(ch) != 0; });
  if (!blank) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception &e) {
      throw FormatError(std::string("knowledge base is not valid JSON: ") + e.what());
    }
    const nlohmann::json *entries = &doc;
    if (doc.is_object()) {
      if (doc.contains("version") && doc["version"] != 1) {
        throw FormatError("unsupported knowledge base version " + doc["version"].dump());
      }
      if (!doc.contains("entries")) {
        throw FormatError("knowledge base object lacks an 'entries' array");
      }
      entries = &doc["entries"];
    }
    if (!entries->is_array()) {
      throw FormatError("knowledge base entries must be an array");
    }
    for (const auto &e : *entries) {
      if (!e.is_object() || !e.contains("class") || !e["class"].is_string()) {
        throw FormatError("knowledge base entry without a 'class' string: " + e.dump());
      }
      DiseaseInfo info;
      info.class_name = e["class"].get<std::string>();
      info.display_name = e.value("display_name", display_name(info.class_name));
      info.description = e.value("description", "");
      info.treatment = e.value("treatment", "");
      info.placeholder = e.value("placeholder", false);
      found[normalize_class_key(info.class_name)] = info;
    }
  }
  for (const std::string &cls : classes) {
    const std::string key = normalize_class_key(cls);
    DiseaseInfo info;
    const auto it = found.find(key);
    if (it != found.end()) {
      info = it->second;
      info.class_name = cls;
      found.erase(it);
    } else {
      info.class_name = cls;
      info.display_name = display_name(cls);
      info.description = "No description available for " + info.display_name + ".";
      info.treatment = "No treatment guidance available.";
      info.placeholder = true;
      kb.warnings_.push_back("no knowledge base entry for " + cls + "; using a placeholder");
    }
    kb.keys_[key] = cls;
    kb.keys_[normalize_class_key(info.display_name)] = cls;
    kb.entries_[cls] = info;
  }
  for (const auto &[key, info] : found) {
    kb.warnings_.push_back("knowledge base entry " + info.class_name + " matches no model class");
  }
  return kb;
}

KnowledgeBase KnowledgeBase::load(const fs::path &path, const std::vector<std::string> &classes) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()), classes);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

fs::path default_knowledge_base_path() {
  if (const char *env = std::getenv("PD36_KNOWLEDGE_BASE")) {
    return env;
  }
  return fs::path(PD36_DATA_DIR) / "knowledge_base.json";
}

} // namespace pd36
