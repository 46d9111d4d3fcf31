#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "irispad/image.hpp"
#include "irispad/roi.hpp"

namespace irispad {

struct ManifestEntry {
  std::string sample_id;
  std::filesystem::path left;
  std::filesystem::path right;
  std::filesystem::path mask_left;
  std::filesystem::path mask_right;
  std::optional<AnnulusGeometry> annulus;
  Label label = Label::Unknown;
  std::vector<std::string> tags;

  bool has_tag(const std::string& tag) const {
    for (const auto& t : tags)
      if (t == tag) return true;
    return false;
  }
};

/// Dataset index. Paths are stored resolved against the manifest's directory
/// and are validated eagerly at load time.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }

  /// Loads the pair referenced by one entry (images + masks).
  ImagePair load_pair(std::size_t index) const;
};

/// CSV header the loader requires, verbatim.
inline constexpr const char* kManifestHeader =
    "sample_id,left,right,mask_left,mask_right,"
    "pupil_cx,pupil_cy,pupil_r,iris_cx,iris_cy,iris_r,label,tags";

DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes a manifest CSV; paths are emitted relative to the output file's
/// directory when possible. Round-trips through load_manifest.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace irispad
