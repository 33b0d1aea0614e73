#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cdel/csv.hpp"
#include "cdel/errors.hpp"
#include "cdel/io.hpp"
#include "cdel/random.hpp"
#include "cdel/types.hpp"

using namespace cdel;

namespace {

SampleTable manifest_from(const std::string& text) {
  std::istringstream in(text);
  return io::read_manifest(in, "test.csv");
}

EmbeddingMatrix embeddings_from(const std::string& text, std::optional<Eigen::Index> dim = {}) {
  std::istringstream in(text);
  return io::read_embeddings(in, dim, "emb.csv");
}

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Labels, NamesRoundTrip) {
  for (Label l : kClassOrder) EXPECT_EQ(parse_label(label_name(l)), l);
  EXPECT_FALSE(parse_label("angry"));
  EXPECT_EQ(label_at(2), Label::positive);
  EXPECT_THROW((void)label_at(3), DataError);
}

TEST(Manifest, LoadsRowsInFileOrder) {
  const auto t = manifest_from(
      "id,text,image_path,label\n"
      "a,hello world,img/a.png,positive\n"
      "b,,img/b.png,negative\n"
      "c,\"multi\nline, quoted \"\"x\"\"\",,neutral\n");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].id, "a");
  EXPECT_EQ(t[1].text, "");
  EXPECT_EQ(t[1].label, Label::negative);
  EXPECT_EQ(t[2].text, "multi\nline, quoted \"x\"");
  EXPECT_FALSE(t[2].image_ref);
  EXPECT_TRUE(t.all_labeled());
}

TEST(Manifest, ColumnOrderIsFree) {
  const auto t = manifest_from("label,id,extra,image_path,text\npositive,z,ignored,p.png,hi\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].id, "z");
  EXPECT_EQ(t[0].text, "hi");
}

TEST(Manifest, UnlabeledRowsAreKept) {
  const auto t = manifest_from("id,text,image_path,label\na,x,,\n");
  EXPECT_FALSE(t[0].label);
  EXPECT_FALSE(t.all_labeled());
}

TEST(Manifest, BadLabelCitesTheRow) {
  const auto msg = error_of([] { (void)manifest_from("id,text,image_path,label\na,x,,positive\nb,y,,angry\n"); });
  EXPECT_NE(msg.find("test.csv:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("angry"), std::string::npos);
}

TEST(Manifest, Rejections) {
  EXPECT_THROW((void)manifest_from("id,text,label\na,x,positive\n"), DataError);
  EXPECT_THROW((void)manifest_from("id,text,image_path,label\na,x,,positive\na,y,,neutral\n"), DataError);
  EXPECT_THROW((void)manifest_from("id,text,image_path,label\na,x,positive\n"), DataError);
  EXPECT_THROW((void)manifest_from(""), DataError);
}

TEST(Manifest, WriteReadRoundTrip) {
  const auto t = manifest_from("id,text,image_path,label\na,\"x, y\",i.png,neutral\nb,,,\n");
  std::ostringstream out;
  io::write_manifest(out, t);
  const auto back = manifest_from(out.str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].text, "x, y");
  EXPECT_EQ(back[0].image_ref, "i.png");
  EXPECT_FALSE(back[1].label);
}

TEST(Embeddings, TwoRowsOfWidthFour) {
  const auto e = embeddings_from("a,1,2,3,4\nb,5,6,7,8\n");
  EXPECT_EQ(e.rows(), 2);
  EXPECT_EQ(e.dim(), 4);
  EXPECT_EQ(e.values()(1, 2), 7.0);
  EXPECT_EQ(e.row_of("b"), 1);
}

TEST(Embeddings, RaggedRowReportsRowTwo) {
  const auto msg = error_of([] { (void)embeddings_from("a,1,2,3,4\nb,1,2,3,4,5\n"); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
}

TEST(Embeddings, HeaderAndDimensionChecks) {
  const auto e = embeddings_from("id,v0,v1\na,1,2\n", 2);
  EXPECT_EQ(e.dim(), 2);
  EXPECT_THROW((void)embeddings_from("a,1,2\n", 3), DataError);
  EXPECT_THROW((void)embeddings_from("a,1,nan\n"), DataError);
  EXPECT_THROW((void)embeddings_from("a,1,inf\n"), DataError);
  EXPECT_THROW((void)embeddings_from("a,1,x\n"), DataError);
  EXPECT_THROW((void)embeddings_from("a,1\na,2\n"), DataError);
  EXPECT_THROW((void)embeddings_from(""), DataError);
  EXPECT_EQ(embeddings_from("", 3).rows(), 0);
}

TEST(Embeddings, RandomMatrixRoundTripsExactly) {
  Rng rng(42);
  Eigen::MatrixXd v(5, 128);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal() * 1e3;
  std::vector<std::string> ids{"p", "q", "r", "s", "t"};
  const EmbeddingMatrix e(ids, v);
  std::ostringstream out;
  io::write_embeddings(out, e);
  const auto back = embeddings_from(out.str(), 128);
  EXPECT_EQ(back.ids(), ids);
  // 9 significant digits: the round trip is exact at that precision.
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    EXPECT_NEAR(back.values().data()[i], v.data()[i], std::abs(v.data()[i]) * 1e-8);
  }
  std::ostringstream again;
  io::write_embeddings(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(EmbeddingMatrixType, Invariants) {
  EXPECT_THROW(EmbeddingMatrix({"a"}, Eigen::MatrixXd(2, 3)), DataError);
  EXPECT_THROW(EmbeddingMatrix({"a", "a"}, Eigen::MatrixXd::Zero(2, 3)), DataError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(EmbeddingMatrix({"a"}, bad), DataError);
  const EmbeddingMatrix e({"a", "b", "c"}, Eigen::MatrixXd::Identity(3, 3));
  const std::vector<std::string> pick{"c", "a"};
  const auto s = e.select(pick);
  EXPECT_EQ(s.ids(), pick);
  EXPECT_EQ(s.values()(0, 2), 1.0);
  const std::vector<std::string> missing{"zz"};
  EXPECT_THROW((void)e.select(missing), DataError);
}

TEST(FaceEncodings, DeriveSplitsFacelessInTableOrder) {
  const auto t = manifest_from("id,text,image_path,label\na,,,\nb,,,\nc,,,\nd,,,\n");
  const EmbeddingMatrix enc({"c", "a"}, Eigen::MatrixXd::Identity(2, 2));
  const auto f = FaceEncodingSet::derive(t, enc);
  EXPECT_EQ(f.encodings().ids(), (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(f.faceless_ids(), (std::vector<std::string>{"b", "d"}));
  EXPECT_EQ(f.size(), 4u);
  const EmbeddingMatrix stray({"zzz"}, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_THROW((void)FaceEncodingSet::derive(t, stray), DataError);
}

TEST(Assignment, ContiguityAndRelabeling) {
  EXPECT_THROW(ClusterAssignment({"a", "b"}, {0, 2}), DataError);
  EXPECT_THROW(ClusterAssignment({"a", "a"}, {0, 0}), DataError);
  const std::vector<int> raw{7, 3, 7, 9};
  const auto a = ClusterAssignment::from_raw_labels({"w", "x", "y", "z"}, raw);
  EXPECT_EQ(a.cluster_ids(), (std::vector<int>{0, 1, 0, 2}));
  EXPECT_EQ(a.cluster_count(), 3);
  EXPECT_EQ(a.cluster_of("z"), 2);
  EXPECT_FALSE(a.cluster_of("nope"));
  EXPECT_EQ(a.cluster_sizes(), (std::vector<std::size_t>{2, 1, 1}));
}

TEST(Assignment, FileRoundTripKeepsFacelessCluster) {
  const ClusterAssignment a({"a", "b", "c"}, {0, 1, 2}, 2);
  std::ostringstream out;
  io::write_assignment(out, a, {"cdel-assignment/1", "abc"});
  EXPECT_EQ(out.str().rfind("# format=cdel-assignment/1 config=abc", 0), 0u);
  std::istringstream in(out.str());
  const auto back = io::read_assignment(in);
  EXPECT_EQ(back.ids(), a.ids());
  EXPECT_EQ(back.cluster_ids(), a.cluster_ids());
  EXPECT_EQ(back.faceless_cluster_id(), 2);
}

TEST(Priors, FromTrainCounts) {
  const std::array<std::size_t, 3> counts{469, 1634, 3089};
  const auto p = ClassPriors::from_counts(counts);
  EXPECT_NEAR(p[0], 469.0 / 5192.0, 1e-15);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
  const std::array<std::size_t, 3> absent{0, 3, 4};
  EXPECT_THROW((void)ClassPriors::from_counts(absent), DataError);
  EXPECT_THROW(ClassPriors({0.5, 0.5, 0.0}), ConfigError);
  EXPECT_THROW(ClassPriors({0.5, 0.4, 0.2}), ConfigError);
  EXPECT_DOUBLE_EQ(ClassPriors()[1], 1.0 / 3.0);
}

TEST(Csv, PreambleAndEscaping) {
  std::istringstream in("# format=x config=y\n# extra=1\na,\"b,c\"\n");
  csv::Reader r(in);
  const auto meta = r.read_preamble();
  EXPECT_EQ(meta.at("format"), "x");
  EXPECT_EQ(meta.at("extra"), "1");
  std::vector<std::string> f;
  ASSERT_TRUE(r.next(f));
  EXPECT_EQ(f, (std::vector<std::string>{"a", "b,c"}));
  EXPECT_EQ(r.line(), 3u);
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a\"b"), "\"a\"\"b\"");
}

TEST(Files, AtomicWriteReplacesAndLeavesNoTemp) {
  const auto dir = std::filesystem::temp_directory_path() / "cdel_atomic_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  io::write_file_atomic(dir / "f.txt", "one");
  io::write_file_atomic(dir / "f.txt", "two");
  EXPECT_EQ(io::read_file(dir / "f.txt"), "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW((void)io::read_file(dir / "missing"), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Errors, ExitCodes) {
  EXPECT_EQ(exit_code(ErrorKind::config), 2);
  EXPECT_EQ(exit_code(ErrorKind::data), 3);
  EXPECT_EQ(exit_code(ErrorKind::numeric), 4);
}
