#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "satjscc/rng.hpp"
#include "satjscc/tensor.hpp"

namespace satjscc::harness {

enum class Split { kTrain = 0, kVal = 1, kTest = 2 };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split: " + s);
}

struct Dataset {
  int bands = 0, height = 0, width = 0;
  std::vector<nn::Tensor<float>> samples;  // each (bands, height, width), values in [0,1]
  std::vector<Split> split;
  std::string provenance;

  std::vector<int> indices(Split s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (split[i] == s) out.push_back(static_cast<int>(i));
    return out;
  }

  void validate() const {
    if (samples.size() != split.size())
      throw std::logic_error("dataset: split assignment size mismatch");
    for (const auto& s : samples) {
      if (s.shape != std::vector<int>{bands, height, width})
        throw std::logic_error("dataset: sample shape mismatch");
      for (float v : s.values)
        if (!(v >= 0.0f && v <= 1.0f))
          throw std::out_of_range("dataset: pixel outside [0,1]");
    }
  }

  // FNV-1a over sample bytes and split labels; pinned in checkpoints and
  // used by the determinism tests.
  std::string content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    const auto mix = [&h](const void* data, std::size_t n) {
      const auto* bytes = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
      }
    };
    for (std::size_t i = 0; i < samples.size(); ++i) {
      mix(samples[i].values.data(), samples[i].values.size() * sizeof(float));
      const auto s = static_cast<int>(split[i]);
      mix(&s, sizeof(s));
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

// Deterministic 80/10/10 split (floor for val/test, remainder to train).
inline std::vector<Split> assign_splits(std::size_t count, Rng& rng, double val_frac = 0.1,
                                        double test_frac = 0.1) {
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  const auto val_n = static_cast<std::size_t>(val_frac * count);
  const auto test_n = static_cast<std::size_t>(test_frac * count);
  std::vector<Split> split(count, Split::kTrain);
  for (std::size_t i = 0; i < val_n; ++i) split[order[i]] = Split::kVal;
  for (std::size_t i = val_n; i < val_n + test_n; ++i) split[order[i]] = Split::kTest;
  return split;
}

namespace detail {

// Keys bicubic kernel (a = -0.5); exact on quadratic signals.
inline double cubic_kernel(double t) {
  const double at = std::abs(t);
  if (at <= 1.0) return 1.5 * at * at * at - 2.5 * at * at + 1.0;
  if (at < 2.0) return -0.5 * at * at * at + 2.5 * at * at - 4.0 * at + 2.0;
  return 0.0;
}

// Sample with linear extrapolation outside [0, n): keeps ramps exact at the
// borders, which the resampling contract relies on.
inline double tap(const std::vector<double>& row, int n, int i) {
  if (i < 0) return 2.0 * row[0] - row[std::min(-i, n - 1)];
  if (i >= n) return 2.0 * row[n - 1] - row[std::max(2 * (n - 1) - i, 0)];
  return row[i];
}

}  // namespace detail

// Separable bicubic resampling from (src_h, src_w) to (dst_h, dst_w),
// pixel-center alignment: x_src = (x_dst + 0.5) * src/dst - 0.5.
inline std::vector<double> resample_bicubic(const std::vector<double>& src, int src_h, int src_w,
                                            int dst_h, int dst_w) {
  if (static_cast<int>(src.size()) != src_h * src_w)
    throw std::invalid_argument("resample: source size mismatch");
  // horizontal pass
  std::vector<double> mid(static_cast<std::size_t>(src_h) * dst_w);
  const double sx = static_cast<double>(src_w) / dst_w;
  std::vector<double> row(src_w);
  for (int y = 0; y < src_h; ++y) {
    for (int x = 0; x < src_w; ++x) row[x] = src[static_cast<std::size_t>(y) * src_w + x];
    for (int x = 0; x < dst_w; ++x) {
      const double center = (x + 0.5) * sx - 0.5;
      const int base = static_cast<int>(std::floor(center));
      double acc = 0.0;
      for (int k = -1; k <= 2; ++k)
        acc += detail::tap(row, src_w, base + k) * detail::cubic_kernel(center - (base + k));
      mid[static_cast<std::size_t>(y) * dst_w + x] = acc;
    }
  }
  // vertical pass
  std::vector<double> dst(static_cast<std::size_t>(dst_h) * dst_w);
  const double sy = static_cast<double>(src_h) / dst_h;
  std::vector<double> col(src_h);
  for (int x = 0; x < dst_w; ++x) {
    for (int y = 0; y < src_h; ++y) col[y] = mid[static_cast<std::size_t>(y) * dst_w + x];
    for (int y = 0; y < dst_h; ++y) {
      const double center = (y + 0.5) * sy - 0.5;
      const int base = static_cast<int>(std::floor(center));
      double acc = 0.0;
      for (int k = -1; k <= 2; ++k)
        acc += detail::tap(col, src_h, base + k) * detail::cubic_kernel(center - (base + k));
      dst[static_cast<std::size_t>(y) * dst_w + x] = acc;
    }
  }
  return dst;
}

// Synthetic multi-band imagery: coarse Gaussian fields (one shared across
// bands plus one per band) upsampled bicubically, mixed 60/40 and rescaled
// into [0, 1] per sample. Smooth by construction, so adjacent pixels
// correlate strongly, and fully reproducible per seed.
inline Dataset generate_synthetic_dataset(int count, int bands, int size, std::uint64_t seed,
                                          double val_frac = 0.1, double test_frac = 0.1) {
  if (count < 1 || bands < 1 || size < 4)
    throw std::invalid_argument("synthetic dataset: count/bands >= 1, size >= 4");
  Dataset ds;
  ds.bands = bands;
  ds.height = size;
  ds.width = size;
  ds.provenance = "synthetic(seed=" + std::to_string(seed) + ")";
  Rng field_rng(seed, /*stream=*/0xda7a);
  const int coarse = std::max(size / 4, 2);

  for (int n = 0; n < count; ++n) {
    std::vector<double> shared(static_cast<std::size_t>(coarse) * coarse);
    for (auto& v : shared) v = field_rng.normal();
    const auto shared_up = resample_bicubic(shared, coarse, coarse, size, size);

    nn::Tensor<float> img({bands, size, size});
    double lo = 1e300, hi = -1e300;
    std::vector<double> values(static_cast<std::size_t>(bands) * size * size);
    for (int b = 0; b < bands; ++b) {
      std::vector<double> own(static_cast<std::size_t>(coarse) * coarse);
      for (auto& v : own) v = field_rng.normal();
      const auto own_up = resample_bicubic(own, coarse, coarse, size, size);
      for (int i = 0; i < size * size; ++i) {
        const double v = 0.6 * shared_up[i] + 0.4 * own_up[i];
        values[static_cast<std::size_t>(b) * size * size + i] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < values.size(); ++i)
      img.values[i] = span > 0.0 ? static_cast<float>((values[i] - lo) / span) : 0.5f;
    ds.samples.push_back(std::move(img));
  }
  Rng split_rng(seed, /*stream=*/0x5b117);
  ds.split = assign_splits(static_cast<std::size_t>(count), split_rng, val_frac, test_frac);
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Raw-tensor dataset files. The manifest is a line-oriented text index:
//
//   satjscc-dataset v1
//   bands <B>
//   height <H>             target grid; bands at other resolutions are
//   width <W>              resampled bicubically
//   sample id=<name> split=<train|val|test>
//   band file=<relpath> dtype=f32le h=<rows> w=<cols> res_m=<meters> max=<norm>
//   ... (one band line per band, every sample)
//
// Band files are raw little-endian float32, planar, row-major. Pixels are
// divided by their band's `max`; anything outside [0, max] is an error.
// ---------------------------------------------------------------------------

struct BandRef {
  std::string file;
  int h = 0, w = 0;
  double res_m = 0.0;
  double max = 1.0;
};

struct ManifestSample {
  std::string id;
  Split split = Split::kTrain;
  std::vector<BandRef> bands;
};

struct Manifest {
  int bands = 0, height = 0, width = 0;
  std::vector<ManifestSample> samples;
};

namespace detail {

inline std::map<std::string, std::string> parse_attrs(const std::string& rest, int line_no) {
  std::map<std::string, std::string> attrs;
  std::istringstream is(rest);
  std::string token;
  while (is >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": expected key=value, got '" + token + "'");
    attrs[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return attrs;
}

inline const std::string& attr(const std::map<std::string, std::string>& attrs,
                               const std::string& key, int line_no) {
  const auto it = attrs.find(key);
  if (it == attrs.end())
    throw std::runtime_error("manifest line " + std::to_string(line_no) + ": missing " + key);
  return it->second;
}

}  // namespace detail

inline Manifest parse_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != "satjscc-dataset v1")
    throw std::runtime_error("manifest: bad magic line");
  ++line_no;
  ManifestSample* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string word;
    is >> word;
    std::string rest;
    std::getline(is, rest);
    if (word == "bands") {
      m.bands = std::stoi(rest);
    } else if (word == "height") {
      m.height = std::stoi(rest);
    } else if (word == "width") {
      m.width = std::stoi(rest);
    } else if (word == "sample") {
      const auto attrs = detail::parse_attrs(rest, line_no);
      m.samples.push_back({detail::attr(attrs, "id", line_no),
                           split_from_string(detail::attr(attrs, "split", line_no)),
                           {}});
      current = &m.samples.back();
    } else if (word == "band") {
      if (!current) throw std::runtime_error("manifest: band line before any sample");
      const auto attrs = detail::parse_attrs(rest, line_no);
      if (detail::attr(attrs, "dtype", line_no) != "f32le")
        throw std::runtime_error("manifest line " + std::to_string(line_no) +
                                 ": unsupported dtype (only f32le)");
      BandRef band;
      band.file = detail::attr(attrs, "file", line_no);
      band.h = std::stoi(detail::attr(attrs, "h", line_no));
      band.w = std::stoi(detail::attr(attrs, "w", line_no));
      band.res_m = std::stod(detail::attr(attrs, "res_m", line_no));
      band.max = std::stod(detail::attr(attrs, "max", line_no));
      current->bands.push_back(band);
    } else {
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": unknown directive '" + word + "'");
    }
  }
  if (m.bands < 1 || m.height < 1 || m.width < 1)
    throw std::runtime_error("manifest: bands/height/width missing or invalid");
  return m;
}

inline Dataset load_raw_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  const Manifest m = parse_manifest(in);
  const auto dir = manifest_path.parent_path();

  Dataset ds;
  ds.bands = m.bands;
  ds.height = m.height;
  ds.width = m.width;
  ds.provenance = "external(" + manifest_path.string() + ")";

  for (const auto& sample : m.samples) {
    if (static_cast<int>(sample.bands.size()) != m.bands)
      throw std::runtime_error("sample " + sample.id + ": expected " + std::to_string(m.bands) +
                               " bands, found " + std::to_string(sample.bands.size()));
    nn::Tensor<float> img({m.bands, m.height, m.width});
    for (int b = 0; b < m.bands; ++b) {
      const auto& band = sample.bands[b];
      const auto path = dir / band.file;
      std::ifstream bf(path, std::ios::binary);
      if (!bf) throw std::runtime_error("sample " + sample.id + ": cannot open " + path.string());
      std::vector<float> raw(static_cast<std::size_t>(band.h) * band.w);
      bf.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
      if (!bf || bf.gcount() != static_cast<std::streamsize>(raw.size() * sizeof(float)))
        throw std::runtime_error("sample " + sample.id + " band " + std::to_string(b) + " (" +
                                 band.file + "): file shorter than h*w floats");

      std::vector<double> plane(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!(raw[i] >= 0.0f) || raw[i] > band.max)
          throw std::out_of_range("sample " + sample.id + " band " + std::to_string(b) + " (" +
                                  band.file + "): pixel " + std::to_string(i) +
                                  " outside [0, max]");
        plane[i] = raw[i] / band.max;
      }
      if (band.h != m.height || band.w != m.width)
        plane = resample_bicubic(plane, band.h, band.w, m.height, m.width);
      for (int i = 0; i < m.height * m.width; ++i) {
        // bicubic overshoot is clipped back into the pixel range
        const double v = std::clamp(plane[i], 0.0, 1.0);
        img.values[static_cast<std::size_t>(b) * m.height * m.width + i] = static_cast<float>(v);
      }
    }
    ds.samples.push_back(std::move(img));
    ds.split.push_back(sample.split);
  }
  ds.validate();
  return ds;
}

// Writes the dataset in the manifest + raw band file layout.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir,
                         double band_resolution_m = 10.0) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir.string());
  manifest << "satjscc-dataset v1\n";
  manifest << "bands " << ds.bands << "\n";
  manifest << "height " << ds.height << "\n";
  manifest << "width " << ds.width << "\n";
  char name[64];
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    std::snprintf(name, sizeof(name), "s%05zu", i);
    manifest << "sample id=" << name << " split=" << split_name(ds.split[i]) << "\n";
    for (int b = 0; b < ds.bands; ++b) {
      char file[96];
      std::snprintf(file, sizeof(file), "%s_b%02d.f32", name, b);
      manifest << "band file=" << file << " dtype=f32le h=" << ds.height << " w=" << ds.width
               << " res_m=" << band_resolution_m << " max=1\n";
      std::ofstream bf(dir / file, std::ios::binary);
      const float* plane =
          ds.samples[i].values.data() + static_cast<std::size_t>(b) * ds.height * ds.width;
      bf.write(reinterpret_cast<const char*>(plane),
               static_cast<std::streamsize>(sizeof(float) * ds.height * ds.width));
    }
  }
}

}  // namespace satjscc::harness
