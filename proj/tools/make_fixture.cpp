// Writes the bundled synthetic fixture: labels depend on a latent face group,
// text and image embeddings are pure noise, some samples carry no face.
//
//   cdel_make_fixture <out-dir> [seed]

#include <array>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdel/io.hpp"
#include "cdel/random.hpp"
#include "cdel/types.hpp"

namespace {

constexpr int kSamples = 400;
constexpr int kGroups = 5;
constexpr int kFaceDim = 8;
constexpr int kFeatureDim = 8;
constexpr double kFacelessRate = 0.1;
constexpr double kLabelNoise = 0.15;
constexpr double kGroupSpread = 0.01;
constexpr double kMinCenterGap = 1.2;

constexpr std::array<cdel::Label, kGroups> kGroupLabel{cdel::Label::negative, cdel::Label::neutral,
                                                       cdel::Label::positive, cdel::Label::neutral,
                                                       cdel::Label::positive};

const std::array<const char*, 24> kVocab{"when", "you", "finally", "monday", "cat", "boss", "friday",
                                         "exam", "coffee", "me", "nobody", "literally", "every", "time",
                                         "mood", "that", "feeling", "dog", "pizza", "again", "why",
                                         "sleep", "weekend", "meeting"};

cdel::Label random_label(cdel::Rng& rng) { return cdel::label_at(rng.index(cdel::kNumClasses)); }

void write(const std::filesystem::path& path, const std::string& text) {
  cdel::io::write_file_atomic(path, text);
  std::cout << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cdel_make_fixture <out-dir> [seed]\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;
  std::filesystem::create_directories(dir);
  cdel::Rng rng(seed);

  Eigen::MatrixXd centers(kGroups, kFaceDim);
  for (int g = 0; g < kGroups; ++g) {
    for (bool ok = false; !ok;) {
      for (int j = 0; j < kFaceDim; ++j) centers(g, j) = rng.uniform(-1.5, 1.5);
      ok = true;
      for (int h = 0; h < g; ++h) ok = ok && (centers.row(g) - centers.row(h)).norm() >= kMinCenterGap;
    }
  }

  std::vector<cdel::SampleRecord> records;
  std::vector<std::string> face_ids, all_ids;
  std::vector<Eigen::VectorXd> face_rows;
  std::ostringstream groups;
  groups << "id,group\n";
  Eigen::MatrixXd text(kSamples, kFeatureDim), image(kSamples, kFeatureDim);

  for (int i = 0; i < kSamples; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "m%04d", i);
    const bool faceless = rng.uniform() < kFacelessRate;
    const int group = faceless ? -1 : static_cast<int>(rng.index(kGroups));

    cdel::Label label;
    if (faceless) {
      const double u = rng.uniform();
      label = u < 0.6 ? cdel::Label::positive : (u < 0.85 ? cdel::Label::neutral : cdel::Label::negative);
    } else {
      label = rng.uniform() < kLabelNoise ? random_label(rng) : kGroupLabel[static_cast<std::size_t>(group)];
    }

    std::string words;
    if (rng.uniform() >= 0.05) {
      const auto count = 3 + rng.index(6);
      for (std::uint64_t w = 0; w < count; ++w) {
        if (w) words += ' ';
        words += kVocab[rng.index(kVocab.size())];
      }
    }
    records.push_back({id, words, std::string("img/") + id + ".png", label});
    all_ids.emplace_back(id);
    groups << id << ',' << group << '\n';

    if (!faceless) {
      Eigen::VectorXd f(kFaceDim);
      for (int j = 0; j < kFaceDim; ++j) f(j) = centers(group, j) + kGroupSpread * rng.normal();
      face_ids.emplace_back(id);
      face_rows.push_back(std::move(f));
    }
    for (int j = 0; j < kFeatureDim; ++j) text(i, j) = rng.normal();
    for (int j = 0; j < kFeatureDim; ++j) image(i, j) = rng.normal();
  }

  Eigen::MatrixXd faces(static_cast<Eigen::Index>(face_rows.size()), kFaceDim);
  for (std::size_t i = 0; i < face_rows.size(); ++i) faces.row(static_cast<Eigen::Index>(i)) = face_rows[i];

  auto manifest = [&](int begin, int end) {
    std::vector<cdel::SampleRecord> part(records.begin() + begin, records.begin() + end);
    std::ostringstream out;
    cdel::io::write_manifest(out, cdel::SampleTable(std::move(part)));
    return out.str();
  };
  auto embeddings = [](std::vector<std::string> ids, Eigen::MatrixXd values) {
    std::ostringstream out;
    cdel::io::write_embeddings(out, cdel::EmbeddingMatrix(std::move(ids), std::move(values)));
    return out.str();
  };

  const int train_end = kSamples * 4 / 5;
  write(dir / "manifest.csv", manifest(0, kSamples));
  write(dir / "train.csv", manifest(0, train_end));
  write(dir / "test.csv", manifest(train_end, kSamples));
  write(dir / "face_encodings.csv", embeddings(face_ids, faces));
  write(dir / "text_embeddings.csv", embeddings(all_ids, text));
  write(dir / "image_embeddings.csv", embeddings(all_ids, image));
  write(dir / "latent_groups.csv", groups.str());
  return 0;
}
