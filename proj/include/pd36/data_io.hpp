#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pd36/model.hpp"
#include "pd36/trainer.hpp"

namespace pd36 {

struct DatasetManifest {
  std::filesystem::path root;
  std::string split;
  /// Directory names in byte-lexicographic order; index = class label.
  std::vector<std::string> classes;
  /// Sorted image paths per class.
  std::vector<std::vector<std::filesystem::path>> files;
  std::vector<std::string> warnings;

  std::size_t total() const;
  std::vector<std::size_t> counts() const;
  bool operator==(const DatasetManifest &) const = default;
};

/// Scans root/split/<Class>/*.{png,jpg,jpeg} (root/<Class>/... when split
/// is empty). Hidden entries and non-image files are skipped with a
/// warning; empty class directories are kept with a warning.
DatasetManifest scan_dataset(const std::filesystem::path &root, const std::string &split = "");

struct SplitStats {
  std::size_t classes = 0;
  std::size_t total = 0;
  double mean = 0.0;
  /// Population standard deviation of the per-class counts.
  double stddev = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
  /// Coefficient of variation, stddev / mean.
  double balance = 0.0;
};

SplitStats split_stats(std::span<const std::size_t> counts);
SplitStats split_stats(const DatasetManifest &manifest);
double balance_indicator(double mean, double stddev);

std::string format_split_stats(const SplitStats &stats);

/// Seeded sample of `count` images (spread over classes in proportion to
/// their size) moved out of `source` into a holdout manifest.
struct HoldoutSplit {
  DatasetManifest remaining;
  DatasetManifest holdout;
};
HoldoutSplit split_holdout(const DatasetManifest &source, std::size_t count, std::uint64_t seed);

struct LoadedImage {
  Tensor tensor;
  std::string conversion;
};

/// Decode, bilinear resize to store_extent, then to model_extent. Values
/// stay in [0, 255].
LoadedImage load_image(const std::filesystem::path &path, std::size_t store_extent = 256,
                       std::size_t model_extent = 224);
LoadedImage load_image_bytes(std::span<const std::uint8_t> bytes, std::size_t store_extent = 256,
                             std::size_t model_extent = 224);

/// Lazily decodes the images of a manifest.
class DirectoryDataset final : public Dataset {
public:
  DirectoryDataset(DatasetManifest manifest, std::size_t model_extent = 224);

  std::size_t size() const override { return paths_.size(); }
  std::size_t num_classes() const override { return manifest_.classes.size(); }
  std::size_t label(std::size_t index) const override { return labels_.at(index); }
  Tensor image(std::size_t index) const override;

  const DatasetManifest &manifest() const { return manifest_; }

private:
  DatasetManifest manifest_;
  std::size_t extent_;
  std::vector<std::filesystem::path> paths_;
  std::vector<std::size_t> labels_;
};

// ---------------------------------------------------------------------------

inline constexpr std::uint32_t weight_format_version = 1;

std::vector<std::uint8_t> serialize_weights(const ModelSpec &spec, const ParamStore &store);
Model deserialize_weights(std::span<const std::uint8_t> bytes);
void save_weights(const ModelSpec &spec, const ParamStore &store, const std::filesystem::path &path);
Model load_weights(const std::filesystem::path &path);

/// CRC-32 of the concatenated little-endian parameter payloads.
std::uint32_t payload_checksum(const ParamStore &store);

// ---------------------------------------------------------------------------

inline constexpr std::string_view history_header =
    "epoch,learning_rate,train_accuracy,train_loss,val_accuracy,val_loss";

std::string format_history_csv(const std::vector<EpochRecord> &epochs);
std::vector<EpochRecord> parse_history_csv(std::string_view text);
void write_history(const std::vector<EpochRecord> &epochs, const std::filesystem::path &path);
std::vector<EpochRecord> read_history(const std::filesystem::path &path);

// ---------------------------------------------------------------------------

struct DiseaseInfo {
  std::string class_name;
  std::string display_name;
  std::string description;
  std::string treatment;
  bool placeholder = false;
};

/// "Apple___Black_rot", "Apple Black rot" and "apple-black rot" all map to "apple black rot".
std::string normalize_class_key(std::string_view name);

/// "Corn_(maize)___Common_rust_" -> "Corn (maize) Common rust".
std::string display_name(std::string_view class_name);

class KnowledgeBase {
public:
  /// Entries for every class in `classes`; missing ones are placeholders.
  const std::map<std::string, DiseaseInfo> &entries() const { return entries_; }
  const std::vector<std::string> &warnings() const { return warnings_; }
  /// Matches class names and display names after normalize_class_key.
  const DiseaseInfo *lookup(std::string_view name) const;

  static KnowledgeBase parse(std::string_view json_text, const std::vector<std::string> &classes);
  static KnowledgeBase load(const std::filesystem::path &path, const std::vector<std::string> &classes);

private:
  std::map<std::string, DiseaseInfo> entries_;
  std::map<std::string, std::string> keys_;
  std::vector<std::string> warnings_;
};

/// Path of the bundled knowledge base.
std::filesystem::path default_knowledge_base_path();

} // namespace pd36
