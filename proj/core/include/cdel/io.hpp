#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "cdel/types.hpp"

namespace cdel::io {

// Provenance written as a leading `# key=value ...` line of every artifact CSV
// and as fields of every artifact JSON document.
struct ArtifactStamp {
  std::string format;       // e.g. "cdel-assignment/1"
  std::string config_hash;  // empty when not produced from a run config
};

[[nodiscard]] std::string stamp_line(const ArtifactStamp& stamp,
                                     const std::map<std::string, std::string>& extra = {});

// Manifest: header `id,text,image_path,label` (any column order, extra columns ignored).
[[nodiscard]] SampleTable load_manifest(const std::filesystem::path& path);
[[nodiscard]] SampleTable read_manifest(std::istream& in, std::string_view source = "<stream>");
void write_manifest(std::ostream& out, const SampleTable& table);

// Embeddings: `id,v0,...,v{d-1}` rows with an optional header row whose first cell is `id`.
[[nodiscard]] EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                              std::optional<Eigen::Index> expected_dim = {});
[[nodiscard]] EmbeddingMatrix read_embeddings(std::istream& in,
                                              std::optional<Eigen::Index> expected_dim = {},
                                              std::string_view source = "<stream>");
void write_embeddings(std::ostream& out, const EmbeddingMatrix& emb);

// Real formatted with 9 significant digits, the precision of every CSV artifact.
[[nodiscard]] std::string format_real(double value);

// Assignment: header `id,cluster_id`; the faceless cluster id travels in the stamp line.
[[nodiscard]] ClusterAssignment load_assignment(const std::filesystem::path& path);
[[nodiscard]] ClusterAssignment read_assignment(std::istream& in,
                                                std::string_view source = "<stream>");
void write_assignment(std::ostream& out, const ClusterAssignment& assign,
                      const ArtifactStamp& stamp = {"cdel-assignment/1", ""});

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace cdel::io
