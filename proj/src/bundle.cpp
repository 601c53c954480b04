#include "lvar/bundle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <set>

namespace lvar {

namespace {

constexpr char kMagic[6] = {'L', 'V', 'A', 'R', '1', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 6 + 4 * sizeof(std::uint32_t);

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

void put_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::string sequence_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seq_%05zu.lvar", index);
  return buf;
}

void write_payload(const SequenceEntry& seq, int n_layers, Eigen::Index dim,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw BundleError(BundleErrorKind::Io,
                      "cannot open '" + path.string() + "' for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(n_layers));
  put_u32(out, static_cast<std::uint32_t>(seq.length()));
  put_u32(out, static_cast<std::uint32_t>(dim));

  std::vector<float> row(static_cast<std::size_t>(dim));
  for (const auto& layer : seq.layers) {
    for (Eigen::Index r = 0; r < layer.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.values.cols(); ++c) {
        row[static_cast<std::size_t>(c)] =
            static_cast<float>(layer.values(r, c));
      }
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
  }
  if (!out) {
    throw BundleError(BundleErrorKind::Io,
                      "write failed for '" + path.string() + "'");
  }
}

std::vector<TokenMatrix> read_payload(const std::filesystem::path& path,
                                      const std::string& id, int n_layers,
                                      Eigen::Index expected_t,
                                      Eigen::Index expected_d) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw BundleError(BundleErrorKind::Io,
                      "cannot open payload '" + path.string() + "'");
  }

  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw BundleError(BundleErrorKind::Magic,
                      "bad magic at offset 0 in '" + path.string() + "'");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw BundleError(BundleErrorKind::Version,
                      "unsupported payload version " + std::to_string(version) +
                          " in '" + path.string() + "'");
  }
  const std::uint32_t layers = get_u32(in);
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  if (!in) {
    throw BundleError(BundleErrorKind::Truncated,
                      "payload header truncated in '" + path.string() + "'");
  }
  if (layers != static_cast<std::uint32_t>(n_layers) ||
      rows != static_cast<std::uint32_t>(expected_t) ||
      cols != static_cast<std::uint32_t>(expected_d)) {
    throw BundleError(
        BundleErrorKind::Dimension,
        "sequence '" + id + "': payload declares layers=" +
            std::to_string(layers) + " T=" + std::to_string(rows) + " d=" +
            std::to_string(cols) + " but manifest declares layers=" +
            std::to_string(n_layers) + " T=" + std::to_string(expected_t) +
            " d=" + std::to_string(expected_d));
  }

  const std::uintmax_t expected_size =
      kHeaderBytes + std::uintmax_t{layers} * rows * cols * sizeof(float);
  std::error_code ec;
  const std::uintmax_t actual_size = std::filesystem::file_size(path, ec);
  if (ec || actual_size != expected_size) {
    throw BundleError(BundleErrorKind::Truncated,
                      "sequence '" + id + "': payload '" + path.string() +
                          "' has " + std::to_string(actual_size) +
                          " bytes, expected " + std::to_string(expected_size));
  }

  std::vector<TokenMatrix> out;
  out.reserve(layers);
  std::vector<float> buf(std::size_t{rows} * cols);
  for (std::uint32_t layer = 0; layer < layers; ++layer) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (in.gcount() !=
        static_cast<std::streamsize>(buf.size() * sizeof(float))) {
      throw BundleError(BundleErrorKind::Truncated,
                        "sequence '" + id + "': payload data truncated in '" +
                            path.string() + "'");
    }
    TokenMatrix m;
    m.layer_index = static_cast<int>(layer);
    m.values.resize(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        const float v = buf[std::size_t{r} * cols + c];
        if (!std::isfinite(v)) {
          throw BundleError(BundleErrorKind::NonFinite,
                            "sequence '" + id + "': non-finite value at layer " +
                                std::to_string(layer) + ", row " +
                                std::to_string(r) + ", column " +
                                std::to_string(c));
        }
        m.values(r, c) = static_cast<double>(v);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

void validate(const ActivationBundle& bundle) {
  if (bundle.n_layers < 1) {
    throw BundleError(BundleErrorKind::Manifest, "bundle has no layers");
  }
  if (bundle.dim < 1) {
    throw BundleError(BundleErrorKind::Manifest, "bundle dimension must be >= 1");
  }
  if (bundle.sequences.empty()) {
    throw BundleError(BundleErrorKind::Manifest, "bundle has no sequences");
  }
  // Parallel corpora repeat ids across languages, so uniqueness is per
  // (language, id).
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& seq : bundle.sequences) {
    if (seq.id.empty()) {
      throw BundleError(BundleErrorKind::Manifest, "sequence with empty id");
    }
    if (!keys.insert({seq.language, seq.id}).second) {
      throw BundleError(BundleErrorKind::Manifest,
                        "duplicate sequence id '" + seq.id +
                            "' for language '" + seq.language + "'");
    }
    if (static_cast<int>(seq.layers.size()) != bundle.n_layers) {
      throw BundleError(BundleErrorKind::Dimension,
                        "sequence '" + seq.id + "' has " +
                            std::to_string(seq.layers.size()) +
                            " layers, bundle declares " +
                            std::to_string(bundle.n_layers));
    }
    const Eigen::Index t = seq.length();
    if (static_cast<Eigen::Index>(seq.tokens.size()) != t) {
      throw BundleError(BundleErrorKind::Manifest,
                        "sequence '" + seq.id + "' has " +
                            std::to_string(seq.tokens.size()) +
                            " tokens but " + std::to_string(t) + " rows");
    }
    for (std::size_t k = 0; k < seq.layers.size(); ++k) {
      const auto& layer = seq.layers[k];
      if (layer.layer_index != static_cast<int>(k)) {
        throw BundleError(BundleErrorKind::Manifest,
                          "sequence '" + seq.id + "' layer " +
                              std::to_string(k) + " carries layer_index " +
                              std::to_string(layer.layer_index));
      }
      if (layer.values.rows() != t || layer.values.cols() != bundle.dim) {
        throw BundleError(BundleErrorKind::Dimension,
                          "sequence '" + seq.id + "' layer " +
                              std::to_string(layer.layer_index) +
                              " has shape " + std::to_string(layer.values.rows()) +
                              "x" + std::to_string(layer.values.cols()) +
                              ", expected " + std::to_string(t) + "x" +
                              std::to_string(bundle.dim));
      }
      if (!layer.values.allFinite()) {
        throw BundleError(BundleErrorKind::NonFinite,
                          "sequence '" + seq.id + "' layer " +
                              std::to_string(layer.layer_index) +
                              " holds non-finite values");
      }
    }
  }
}

void write_bundle(const ActivationBundle& bundle,
                  const std::filesystem::path& dir) {
  validate(bundle);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw BundleError(BundleErrorKind::Io,
                      "cannot create bundle directory '" + dir.string() + "'");
  }

  nlohmann::json manifest;
  manifest["format"] = "lvar-bundle";
  manifest["version"] = kVersion;
  manifest["n_layers"] = bundle.n_layers;
  manifest["dim"] = static_cast<std::int64_t>(bundle.dim);
  auto& seqs = manifest["sequences"] = nlohmann::json::array();
  for (std::size_t i = 0; i < bundle.sequences.size(); ++i) {
    const auto& seq = bundle.sequences[i];
    const std::string file =
        seq.file.empty() ? sequence_file_name(i) : seq.file;
    nlohmann::json entry;
    entry["id"] = seq.id;
    entry["language"] = seq.language;
    entry["file"] = file;
    entry["length"] = static_cast<std::int64_t>(seq.length());
    entry["tokens"] = seq.tokens;
    if (seq.depth.has_value()) entry["depth"] = *seq.depth;
    seqs.push_back(std::move(entry));
    write_payload(seq, bundle.n_layers, bundle.dim, dir / file);
  }

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) {
    throw BundleError(BundleErrorKind::Io,
                      "cannot write manifest in '" + dir.string() + "'");
  }
  out << manifest.dump(2) << "\n";
}

ActivationBundle read_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw BundleError(BundleErrorKind::Io,
                      "cannot open manifest '" + manifest_path.string() + "'");
  }
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(BundleErrorKind::Manifest,
                      std::string("malformed manifest: ") + e.what());
  }

  ActivationBundle bundle;
  try {
    if (manifest.at("format").get<std::string>() != "lvar-bundle") {
      throw BundleError(BundleErrorKind::Manifest,
                        "manifest format is not 'lvar-bundle'");
    }
    if (manifest.at("version").get<std::uint32_t>() != kVersion) {
      throw BundleError(BundleErrorKind::Version,
                        "unsupported manifest version");
    }
    bundle.n_layers = manifest.at("n_layers").get<int>();
    bundle.dim = manifest.at("dim").get<Eigen::Index>();
    for (const auto& entry : manifest.at("sequences")) {
      SequenceEntry seq;
      seq.id = entry.at("id").get<std::string>();
      seq.language = entry.at("language").get<std::string>();
      seq.file = entry.at("file").get<std::string>();
      seq.tokens = entry.at("tokens").get<std::vector<std::string>>();
      const auto length = entry.at("length").get<Eigen::Index>();
      if (static_cast<Eigen::Index>(seq.tokens.size()) != length) {
        throw BundleError(BundleErrorKind::Manifest,
                          "sequence '" + seq.id + "' declares length " +
                              std::to_string(length) + " but lists " +
                              std::to_string(seq.tokens.size()) + " tokens");
      }
      if (entry.contains("depth")) seq.depth = entry.at("depth").get<double>();
      seq.layers = read_payload(dir / seq.file, seq.id, bundle.n_layers, length,
                                bundle.dim);
      bundle.sequences.push_back(std::move(seq));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(BundleErrorKind::Manifest,
                      std::string("manifest field error: ") + e.what());
  }

  validate(bundle);
  return bundle;
}

}  // namespace lvar
