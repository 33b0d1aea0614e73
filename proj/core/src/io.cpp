#include "cdel/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "cdel/csv.hpp"
#include "cdel/errors.hpp"

namespace cdel::io {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

std::optional<double> parse_real(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return value;
}

}  // namespace

std::string stamp_line(const ArtifactStamp& stamp, const std::map<std::string, std::string>& extra) {
  std::string line = "# format=" + stamp.format;
  if (!stamp.config_hash.empty()) line += " config=" + stamp.config_hash;
  for (const auto& [k, v] : extra) line += " " + k + "=" + v;
  line += "\n";
  return line;
}

// --- manifest ---

SampleTable load_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_manifest(in, path.string());
}

SampleTable read_manifest(std::istream& in, std::string_view source) {
  csv::Reader reader(in);
  reader.read_preamble();
  std::vector<std::string> header;
  if (!reader.next(header)) throw DataError(std::string(source) + ": empty manifest (no header row)");

  constexpr std::array<std::string_view, 4> kColumns{"id", "text", "image_path", "label"};
  std::array<std::size_t, 4> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw DataError(std::string(source) + ": manifest header is missing required column '" +
                      std::string(kColumns[c]) + "'");
    }
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<SampleRecord> records;
  std::vector<std::string> row;
  std::unordered_map<std::string, std::size_t> first_line;
  while (reader.next(row)) {
    if (row.size() != header.size()) {
      throw DataError(where(source, reader.line()) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(row.size()));
    }
    SampleRecord rec;
    rec.id = row[col[0]];
    rec.text = row[col[1]];
    if (!row[col[2]].empty()) rec.image_ref = row[col[2]];
    if (rec.id.empty()) throw DataError(where(source, reader.line()) + ": empty id");
    if (auto [it, ok] = first_line.emplace(rec.id, reader.line()); !ok) {
      throw DataError(where(source, reader.line()) + ": duplicate id '" + rec.id +
                      "' (first seen on line " + std::to_string(it->second) + ")");
    }
    const std::string& label = row[col[3]];
    if (!label.empty()) {
      rec.label = parse_label(label);
      if (!rec.label) {
        throw DataError(where(source, reader.line()) + ": label '" + label +
                        "' is not one of negative, neutral, positive");
      }
    }
    records.push_back(std::move(rec));
  }
  return SampleTable(std::move(records));
}

void write_manifest(std::ostream& out, const SampleTable& table) {
  out << "id,text,image_path,label\n";
  for (const auto& r : table.records()) {
    out << csv::join({r.id, r.text, r.image_ref.value_or(""),
                      r.label ? std::string(label_name(*r.label)) : std::string()})
        << '\n';
  }
}

// --- embeddings ---

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                std::optional<Eigen::Index> expected_dim) {
  auto in = open_input(path);
  return read_embeddings(in, expected_dim, path.string());
}

EmbeddingMatrix read_embeddings(std::istream& in, std::optional<Eigen::Index> expected_dim,
                                std::string_view source) {
  csv::Reader reader(in);
  reader.read_preamble();
  std::vector<std::string> row;
  std::vector<std::string> ids;
  std::vector<double> flat;
  std::optional<std::size_t> width;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t data_row = 0;
  bool first = true;

  while (reader.next(row)) {
    if (first) {
      first = false;
      if (!row.empty() && row[0] == "id") {
        if (row.size() < 2) throw DataError(std::string(source) + ": header declares no value columns");
        width = row.size() - 1;
        continue;
      }
    }
    ++data_row;
    const std::string context = std::string(source) + ": row " + std::to_string(data_row) +
                                " (line " + std::to_string(reader.line()) + ")";
    if (row.size() < 2) throw DataError(context + ": expected an id followed by at least one value");
    const std::size_t d = row.size() - 1;
    if (!width) width = d;
    if (d != *width) {
      throw DataError(context + ": ragged row with " + std::to_string(d) + " values, expected " +
                      std::to_string(*width));
    }
    if (row[0].empty()) throw DataError(context + ": empty id");
    if (auto [it, ok] = seen.emplace(row[0], data_row); !ok) {
      throw DataError(context + ": duplicate id '" + row[0] + "' (first at row " +
                      std::to_string(it->second) + ")");
    }
    for (std::size_t j = 1; j < row.size(); ++j) {
      auto v = parse_real(row[j]);
      if (!v) throw DataError(context + ": column " + std::to_string(j) + " is not a real: '" + row[j] + "'");
      if (!std::isfinite(*v)) {
        throw DataError(context + ": non-finite value in column " + std::to_string(j));
      }
      flat.push_back(*v);
    }
    ids.push_back(row[0]);
  }

  if (!width) {
    if (!expected_dim) throw DataError(std::string(source) + ": empty embedding file of unknown width");
    width = static_cast<std::size_t>(*expected_dim);
  }
  if (expected_dim && static_cast<Eigen::Index>(*width) != *expected_dim) {
    throw DataError(std::string(source) + ": embedding width " + std::to_string(*width) +
                    " does not match expected " + std::to_string(*expected_dim));
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(*width);
  Eigen::MatrixXd values(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) values(i, j) = flat[static_cast<std::size_t>(i * d + j)];
  }
  return EmbeddingMatrix(std::move(ids), std::move(values));
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& emb) {
  out << "id";
  for (Eigen::Index j = 0; j < emb.dim(); ++j) out << ",v" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    out << csv::escape(emb.ids()[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < emb.dim(); ++j) out << ',' << format_real(emb.values()(i, j));
    out << '\n';
  }
}

// --- assignment ---

ClusterAssignment load_assignment(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_assignment(in, path.string());
}

ClusterAssignment read_assignment(std::istream& in, std::string_view source) {
  csv::Reader reader(in);
  const auto meta = reader.read_preamble();
  std::vector<std::string> row;
  if (!reader.next(row) || row.size() != 2 || row[0] != "id" || row[1] != "cluster_id") {
    throw DataError(std::string(source) + ": assignment header must be 'id,cluster_id'");
  }
  std::vector<std::string> ids;
  std::vector<int> clusters;
  while (reader.next(row)) {
    if (row.size() != 2) throw DataError(where(source, reader.line()) + ": expected 2 fields");
    int c = -1;
    auto [ptr, ec] = std::from_chars(row[1].data(), row[1].data() + row[1].size(), c);
    if (ec != std::errc() || ptr != row[1].data() + row[1].size() || c < 0) {
      throw DataError(where(source, reader.line()) + ": bad cluster id '" + row[1] + "'");
    }
    ids.push_back(row[0]);
    clusters.push_back(c);
  }
  std::optional<int> faceless;
  if (auto it = meta.find("faceless_cluster_id"); it != meta.end()) {
    int f = -1;
    auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), f);
    if (ec != std::errc()) throw DataError(std::string(source) + ": bad faceless_cluster_id");
    faceless = f;
  }
  return ClusterAssignment(std::move(ids), std::move(clusters), faceless);
}

void write_assignment(std::ostream& out, const ClusterAssignment& assign, const ArtifactStamp& stamp) {
  std::map<std::string, std::string> extra;
  extra["clusters"] = std::to_string(assign.cluster_count());
  if (auto f = assign.faceless_cluster_id()) extra["faceless_cluster_id"] = std::to_string(*f);
  out << stamp_line(stamp, extra);
  out << "id,cluster_id\n";
  for (std::size_t i = 0; i < assign.size(); ++i) {
    out << csv::escape(assign.ids()[i]) << ',' << assign.cluster_ids()[i] << '\n';
  }
}

// --- files ---

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DataError("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cdel::io
