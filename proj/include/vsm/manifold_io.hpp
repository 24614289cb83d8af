#pragma once

// On-disk form of a ManifoldModel: manifest.json plus one raw little-endian
// float64 file per coefficient per u-node (theta, psi, lambda, row-major).

#include "vsm/manifold_builder.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace vsm {

inline constexpr const char* kManifestName = "manifest.json";

/// Writes the model into dir (created if missing). provenance is stored verbatim.
void save_model(const ManifoldModel& model, const std::filesystem::path& dir,
                const nlohmann::json& provenance = nlohmann::json::object());

/// Reads a model written by save_model; checks every array against its recorded digest.
ManifoldModel load_model(const std::filesystem::path& dir);

/// SHA-256 of the manifest bytes (the manifest lists the digest of every array).
std::string manifest_hash(const std::filesystem::path& dir);

nlohmann::json read_manifest(const std::filesystem::path& dir);

}  // namespace vsm
