#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lvar/core.hpp"

namespace lvar {

// A bundle is a directory holding manifest.json plus one payload file per
// sequence. Payload layout (all integers little-endian):
//
//   offset 0  : magic "LVAR1\0" (6 bytes)
//   offset 6  : u32 version (= 1)
//   offset 10 : u32 n_layers
//   offset 14 : u32 T (token rows)
//   offset 18 : u32 d (hidden dimension)
//   offset 22 : n_layers * T * d float32 values, layer-major,
//               row-major within a layer
//
// The manifest lists every sequence (id, language, token strings, payload
// file, length, optional depth covariate) plus the bundle-wide n_layers and
// dim, which the payload headers are cross-checked against.

enum class BundleErrorKind {
  Io,         // missing / unreadable / unwritable file
  Magic,      // bad magic bytes
  Version,    // unsupported payload version
  Dimension,  // payload header disagrees with the manifest
  Truncated,  // payload size does not match the header
  NonFinite,  // payload holds a non-finite value
  Manifest,   // malformed or inconsistent manifest
};

class BundleError : public std::runtime_error {
 public:
  BundleError(BundleErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  BundleErrorKind kind() const { return kind_; }

 private:
  BundleErrorKind kind_;
};

struct SequenceEntry {
  std::string id;
  std::string language;
  std::string file;  // payload path relative to the bundle directory
  std::vector<std::string> tokens;
  std::optional<double> depth;  // precomputed covariate (e.g. AST depth)
  std::vector<TokenMatrix> layers;

  Eigen::Index length() const {
    return layers.empty() ? 0 : layers.front().length();
  }
};

struct ActivationBundle {
  int n_layers = 0;
  Eigen::Index dim = 0;
  std::vector<SequenceEntry> sequences;
};

// Structural invariants: layer counts, shapes, token lengths, unique ids.
void validate(const ActivationBundle& bundle);

// Writes manifest.json and payload files into `dir` (created if missing).
// Values are stored as float32; a written-then-read bundle re-writes to the
// identical bytes.
void write_bundle(const ActivationBundle& bundle,
                  const std::filesystem::path& dir);

ActivationBundle read_bundle(const std::filesystem::path& dir);

}  // namespace lvar
