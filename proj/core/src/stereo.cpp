#include "irispad/stereo.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "irispad/imageio.hpp"
#include "json.hpp"

namespace irispad {

LightRig LightRig::from_directions(std::vector<Vec3> directions) {
  if (directions.size() < 2)
    throw Error(ErrorCode::InvalidRig, "need k >= 2 light directions, got " +
                                           std::to_string(directions.size()));
  for (auto& d : directions) {
    const double n = norm(d);
    if (!(n >= 1e-6) || !std::isfinite(n))
      throw Error(ErrorCode::InvalidRig, "light direction with norm < 1e-6");
    d = scale(d, 1.0 / n);
  }
  for (std::size_t a = 0; a < directions.size(); ++a)
    for (std::size_t b = a + 1; b < directions.size(); ++b)
      if (std::abs(dot(directions[a], directions[b])) >= 1.0 - 1e-9)
        throw Error(ErrorCode::RankDeficient, "parallel light directions " + std::to_string(a) +
                                                  " and " + std::to_string(b));
  LightRig rig;
  rig.directions_ = std::move(directions);
  return rig;
}

LightRig load_rig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("directions") || !doc["directions"].is_array())
    throw Error(ErrorCode::InvalidRig, path.string() + ": missing \"directions\" array");
  std::vector<Vec3> dirs;
  for (const auto& row : doc["directions"]) {
    if (!row.is_array() || row.size() != 3)
      throw Error(ErrorCode::InvalidRig, path.string() + ": direction must be [x,y,z]");
    dirs.push_back(Vec3{row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
  }
  return LightRig::from_directions(std::move(dirs));
}

void save_rig(const LightRig& rig, const std::filesystem::path& path) {
  nlohmann::json doc;
  auto& arr = doc["directions"] = nlohmann::json::array();
  for (const auto& d : rig.directions()) arr.push_back({d[0], d[1], d[2]});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

PixelSolver::PixelSolver(const LightRig& rig) : k_(rig.k()) {
  Eigen::MatrixXd L(static_cast<Eigen::Index>(k_), 3);
  for (std::size_t row = 0; row < k_; ++row)
    for (int col = 0; col < 3; ++col) L(static_cast<Eigen::Index>(row), col) = rig.directions()[row][col];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-9 * sv(0))
    throw Error(ErrorCode::RankDeficient, "light matrix is numerically rank deficient");

  Eigen::MatrixXd pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  pinv_.resize(3 * k_);
  for (int row = 0; row < 3; ++row)
    for (std::size_t col = 0; col < k_; ++col)
      pinv_[row * k_ + col] = pinv(row, static_cast<Eigen::Index>(col));
}

Vec3 PixelSolver::solve(std::span<const double> intensities) const {
  if (intensities.size() != k_)
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(k_) + " intensities");
  Vec3 out{0, 0, 0};
  for (int row = 0; row < 3; ++row) {
    double acc = 0;
    const double* w = pinv_.data() + row * k_;
    for (std::size_t col = 0; col < k_; ++col) acc += w[col] * intensities[col];
    out[row] = acc;
  }
  return out;
}

Vec3 solve_pixel(std::span<const double> intensities, const LightRig& rig) {
  for (const double v : intensities)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite intensity");
  return PixelSolver(rig).solve(intensities);
}

NormalField estimate_normals_multi(const std::vector<const GrayImage*>& images,
                                   const LightRig& rig) {
  if (images.size() != rig.k())
    throw Error(ErrorCode::DimensionMismatch,
                "image count " + std::to_string(images.size()) + " != rig arity " +
                    std::to_string(rig.k()));
  const std::uint32_t w = images[0]->width, h = images[0]->height;
  for (const auto* img : images)
    if (img->width != w || img->height != h)
      throw Error(ErrorCode::DimensionMismatch, "images must share dimensions");

  const PixelSolver solver(rig);
  NormalField field;
  field.width = w;
  field.height = h;
  field.normals.assign(static_cast<std::size_t>(w) * h, Vec3{0, 0, 0});
  field.raw.assign(static_cast<std::size_t>(w) * h, Vec3{0, 0, 0});
  field.valid = BinaryMask(w, h);

  std::vector<double> intensities(rig.k());
  for (std::size_t p = 0; p < field.normals.size(); ++p) {
    for (std::size_t d = 0; d < images.size(); ++d)
      intensities[d] = images[d]->pixels[p] / 255.0;
    const Vec3 raw = solver.solve(intensities);
    field.raw[p] = raw;
    const double n = norm(raw);
    if (n >= kNullNormThreshold) {
      field.normals[p] = scale(raw, 1.0 / n);
      field.valid.bits[p] = 1;
    }
  }
  return field;
}

NormalField estimate_normals(const ImagePair& pair, const LightRig& rig) {
  if (rig.k() != 2)
    throw Error(ErrorCode::DimensionMismatch, "pair input needs a k = 2 rig");
  return estimate_normals_multi({&pair.left, &pair.right}, rig);
}

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64le(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_normal_field(const NormalField& field, const std::filesystem::path& path) {
  std::string out;
  const std::size_t n = field.normals.size();
  out.reserve(12 + n * 24 + (n + 7) / 8);
  out += "NRM1";
  put_u32le(out, field.width);
  put_u32le(out, field.height);
  for (std::size_t p = 0; p < n; ++p) {
    const Vec3& v = field.valid.bits[p] ? field.normals[p] : Vec3{0, 0, 0};
    put_f64le(out, v[0]);
    put_f64le(out, v[1]);
    put_f64le(out, v[2]);
  }
  std::string bitmap((n + 7) / 8, '\0');
  for (std::size_t p = 0; p < n; ++p)
    if (field.valid.bits[p]) bitmap[p / 8] |= static_cast<char>(1u << (p % 8));
  out += bitmap;

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

NormalField load_normal_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), "NRM1", 4) != 0)
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a NRM1 file");
  const std::uint32_t w = get_u32le(data.data() + 4);
  const std::uint32_t h = get_u32le(data.data() + 8);
  if (w < 1 || h < 1) throw Error(ErrorCode::CorruptFile, path.string() + ": zero dimension");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const std::size_t expected = 12 + n * 24 + (n + 7) / 8;
  if (data.size() < expected)
    throw Error(ErrorCode::CorruptFile, path.string() + ": truncated payload");

  NormalField field;
  field.width = w;
  field.height = h;
  field.normals.resize(n);
  field.valid = BinaryMask(w, h);
  const std::uint8_t* f = data.data() + 12;
  for (std::size_t p = 0; p < n; ++p, f += 24)
    field.normals[p] = Vec3{get_f64le(f), get_f64le(f + 8), get_f64le(f + 16)};
  const std::uint8_t* bitmap = data.data() + 12 + n * 24;
  for (std::size_t p = 0; p < n; ++p)
    field.valid.bits[p] = (bitmap[p / 8] >> (p % 8)) & 1;
  field.raw = field.normals;  // magnitudes are not serialized
  return field;
}

void save_quiver_svg(const NormalField& field, const std::filesystem::path& path,
                     std::uint32_t target_arrows_across) {
  if (target_arrows_across < 1) target_arrows_across = 1;
  const std::uint32_t step = std::max(1u, field.width / target_arrows_across);
  const double len = 0.45 * step;

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << field.width << "\" height=\""
      << field.height << "\" viewBox=\"0 0 " << field.width << " " << field.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::uint32_t y = step / 2; y < field.height; y += step) {
    for (std::uint32_t x = step / 2; x < field.width; x += step) {
      if (!field.valid.at(x, y)) continue;
      const Vec3& n = field.normal_at(x, y);
      const double cx = x + 0.5, cy = y + 0.5;
      const double tx = cx + n[0] * len, ty = cy + n[1] * len;
      svg << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << 0.06 * step
          << "\" fill=\"black\"/>\n"
          << "<line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\"" << tx << "\" y2=\"" << ty
          << "\" stroke=\"black\" stroke-width=\"" << 0.05 * step << "\"/>\n";
    }
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << svg.str();
}

void save_component_pgms(const NormalField& field, const std::filesystem::path& directory,
                         const std::string& stem) {
  const char* suffix[3] = {"_x.pgm", "_y.pgm", "_z.pgm"};
  for (int c = 0; c < 3; ++c) {
    GrayImage img(field.width, field.height);
    for (std::size_t p = 0; p < field.normals.size(); ++p) {
      if (!field.valid.bits[p]) continue;
      const double v = (field.normals[p][c] + 1.0) * 127.5;
      img.pixels[p] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    save_gray(img, directory / (stem + suffix[c]));
  }
}

}  // namespace irispad
