#include "irispad/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "irispad/imageio.hpp"

namespace irispad {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& field, std::size_t line_no) {
  double value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::MalformedRow,
                "line " + std::to_string(line_no) + ": bad number '" + field + "'");
  return value;
}

std::filesystem::path resolve(const std::string& field, const std::filesystem::path& base) {
  std::filesystem::path p(field);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

void require_exists(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw Error(ErrorCode::MissingFile, p.string());
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::path(".");

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::CorruptFile, "empty manifest " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader)
    throw Error(ErrorCode::MalformedRow, "line 1: manifest header mismatch");

  DatasetManifest manifest;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = split(line, ',');
    if (fields.size() != 13)
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected 13 fields, got " +
                                               std::to_string(fields.size()));

    ManifestEntry entry;
    entry.sample_id = fields[0];
    if (entry.sample_id.empty())
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": empty sample_id");
    if (!seen.insert(entry.sample_id).second)
      throw Error(ErrorCode::DuplicateSampleId, entry.sample_id);

    entry.left = resolve(fields[1], base);
    entry.right = resolve(fields[2], base);
    entry.mask_left = resolve(fields[3], base);
    entry.mask_right = resolve(fields[4], base);
    for (const auto* p : {&entry.left, &entry.right, &entry.mask_left, &entry.mask_right})
      require_exists(*p);

    int empty_circles = 0;
    for (int c = 5; c <= 10; ++c) empty_circles += fields[c].empty();
    if (empty_circles == 0) {
      AnnulusGeometry geom;
      geom.pupil_cx = parse_double(fields[5], line_no);
      geom.pupil_cy = parse_double(fields[6], line_no);
      geom.pupil_r = parse_double(fields[7], line_no);
      geom.iris_cx = parse_double(fields[8], line_no);
      geom.iris_cy = parse_double(fields[9], line_no);
      geom.iris_r = parse_double(fields[10], line_no);
      try {
        geom.validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::MalformedRow,
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
      entry.annulus = geom;
    } else if (empty_circles != 6) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": circle columns must be all set or all empty");
    }

    try {
      entry.label = label_from_string(fields[11]);
    } catch (const Error&) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": unknown label '" + fields[11] + "'");
    }

    if (!fields[12].empty()) {
      for (auto& tag : split(fields[12], ';'))
        if (!tag.empty()) entry.tags.push_back(std::move(tag));
    }

    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

ImagePair DatasetManifest::load_pair(std::size_t index) const {
  const ManifestEntry& e = entries.at(index);
  return ImagePair(load_gray(e.left), load_gray(e.right), load_mask(e.mask_left),
                   load_mask(e.mask_right), e.label, e.sample_id);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::path(".");
  std::ostringstream out;
  out << kManifestHeader << "\n";
  for (const auto& e : manifest.entries) {
    const auto emit_path = [&](const std::filesystem::path& p) {
      std::error_code ec;
      const auto rel = std::filesystem::relative(p, base, ec);
      return (!ec && !rel.empty()) ? rel.generic_string() : p.generic_string();
    };
    out << e.sample_id << ',' << emit_path(e.left) << ',' << emit_path(e.right) << ','
        << emit_path(e.mask_left) << ',' << emit_path(e.mask_right) << ',';
    if (e.annulus) {
      const auto& g = *e.annulus;
      out << format_double(g.pupil_cx) << ',' << format_double(g.pupil_cy) << ','
          << format_double(g.pupil_r) << ',' << format_double(g.iris_cx) << ','
          << format_double(g.iris_cy) << ',' << format_double(g.iris_r);
    } else {
      out << ",,,,,";
    }
    out << ',' << to_string(e.label) << ',';
    for (std::size_t i = 0; i < e.tags.size(); ++i) {
      if (i) out << ';';
      out << e.tags[i];
    }
    out << "\n";
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  const std::string text = out.str();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace irispad
