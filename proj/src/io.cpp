#include "lfi/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lfi/error.hpp"

namespace lfi::io {
namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return __builtin_bswap64(v);
  }
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void write_f64_blob(const fs::path& path, std::span<const double> values) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::vector<std::uint64_t> raw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) raw[i] = to_le(std::bit_cast<std::uint64_t>(values[i]));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
  if (!out) fail(ErrorKind::io, "short write to " + path.string());
}

std::vector<double> read_f64_blob(const fs::path& path, std::size_t expected_count) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != expected_count * 8) {
    fail(ErrorKind::io, path.string() + ": expected " + std::to_string(expected_count) +
                            " float64 values, found " + std::to_string(bytes.size()) + " bytes");
  }
  std::vector<double> out(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) {
    std::uint64_t v;
    std::memcpy(&v, bytes.data() + 8 * i, 8);
    out[i] = std::bit_cast<double>(to_le(v));
  }
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorKind::io, "short write to " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, path.string() + ": " + e.what());
  }
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

json to_json(const PriorSpec& prior) {
  json j;
  j["kind"] = prior.kind == PriorSpec::Kind::uniform_box ? "uniform-box" : "uniform-triangle";
  j["bounds"] = json::array();
  for (const auto& b : prior.bounds) j["bounds"].push_back({b.lo, b.hi});
  j["constraints"] = json::array();
  for (const auto& c : prior.constraints) j["constraints"].push_back({{"coeffs", c.coeffs}, {"rhs", c.rhs}});
  return j;
}

PriorSpec prior_from_json(const json& j) {
  try {
    PriorSpec p;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "uniform-box") {
      p.kind = PriorSpec::Kind::uniform_box;
    } else if (kind == "uniform-triangle") {
      p.kind = PriorSpec::Kind::uniform_triangle;
    } else {
      fail(ErrorKind::configuration, "unknown prior kind '" + kind + "'");
    }
    for (const auto& b : j.at("bounds")) p.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    if (j.contains("constraints")) {
      for (const auto& c : j.at("constraints")) {
        p.constraints.push_back({c.at("coeffs").get<std::vector<double>>(), c.at("rhs").get<double>()});
      }
    }
    p.validate();
    return p;
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, std::string("malformed prior: ") + e.what());
  }
}

fs::path sibling(const fs::path& json_path, const std::string& suffix) {
  auto p = json_path;
  p.replace_extension(suffix);
  return p;
}

void save_simbatch(const SimBatch& batch, const fs::path& json_path) {
  const std::size_t m = batch.size();
  const std::size_t channels = m ? batch.series[0].channels() : 0;
  const std::size_t length = m ? batch.series[0].length() : 0;
  const std::size_t d = parameter_dim(batch.model);
  std::vector<double> series;
  series.reserve(m * channels * length);
  std::vector<double> params;
  params.reserve(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& s = batch.series[i];
    if (s.channels() != channels || s.length() != length) {
      fail(ErrorKind::configuration, "sim batch items have inconsistent shapes");
    }
    series.insert(series.end(), s.samples().begin(), s.samples().end());
    params.insert(params.end(), batch.parameters[i].values.begin(), batch.parameters[i].values.end());
  }
  const auto series_path = sibling(json_path, "series.bin");
  const auto params_path = sibling(json_path, "params.bin");
  write_f64_blob(series_path, series);
  write_f64_blob(params_path, params);
  json j;
  j["model"] = std::string(to_string(batch.model));
  j["prior"] = to_json(batch.prior);
  j["m"] = m;
  j["master_seed"] = batch.master_seed;
  j["dtype"] = kDtype;
  j["series_shape"] = {m, channels, length};
  j["params_shape"] = {m, d};
  j["series_file"] = series_path.filename().string();
  j["params_file"] = params_path.filename().string();
  j["seeds"] = batch.seeds;
  write_json(json_path, j);
}

SimBatch load_simbatch(const fs::path& json_path) {
  const json j = read_json(json_path);
  try {
    if (j.at("dtype").get<std::string>() != kDtype) fail(ErrorKind::io, "unsupported dtype");
    SimBatch batch;
    batch.model = parse_model_id(j.at("model").get<std::string>());
    batch.prior = prior_from_json(j.at("prior"));
    batch.master_seed = j.at("master_seed").get<std::uint64_t>();
    const auto shape = j.at("series_shape").get<std::vector<std::size_t>>();
    const auto pshape = j.at("params_shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3 || pshape.size() != 2 || shape[0] != pshape[0] ||
        pshape[1] != parameter_dim(batch.model)) {
      fail(ErrorKind::io, json_path.string() + ": inconsistent shapes");
    }
    const std::size_t m = shape[0];
    const auto dir = json_path.parent_path();
    const auto series = read_f64_blob(dir / j.at("series_file").get<std::string>(), m * shape[1] * shape[2]);
    const auto params = read_f64_blob(dir / j.at("params_file").get<std::string>(), m * pshape[1]);
    batch.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (batch.seeds.size() != m) fail(ErrorKind::io, json_path.string() + ": seed count mismatch");
    const std::size_t per = shape[1] * shape[2];
    for (std::size_t i = 0; i < m; ++i) {
      batch.series.emplace_back(shape[1], shape[2],
                                std::vector<double>(series.begin() + static_cast<std::ptrdiff_t>(i * per),
                                                    series.begin() + static_cast<std::ptrdiff_t>((i + 1) * per)));
      batch.parameters.push_back(ParameterPoint{
          batch.model, std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(i * pshape[1]),
                                           params.begin() + static_cast<std::ptrdiff_t>((i + 1) * pshape[1]))});
    }
    return batch;
  } catch (const json::exception& e) {
    fail(ErrorKind::io, json_path.string() + ": " + e.what());
  }
}

}  // namespace lfi::io
