#include "huberlr/archive.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <fstream>
#include <random>

#include "test_support.hpp"

namespace huberlr {
namespace {

namespace fs = std::filesystem;

class ArchiveTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("huberlr_archive_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no huberlr::Error thrown";
  return ErrorCode::InvalidArgument;
}

TEST_F(ArchiveTest, ComplexArrayRoundTrip) {
  ComplexArray a{2, 3, 4, {}};
  for (int i = 0; i < 24; ++i) a.values.emplace_back(0.5 * i, -1.0 / (i + 1));
  write_complex_array(dir_ / "a", a);
  EXPECT_EQ(fs::file_size(dir_ / "a"), 16u + 24u * 16u);
  const auto b = read_complex_array(dir_ / "a");
  EXPECT_EQ(b.rows, 2u);
  EXPECT_EQ(b.cols, 3u);
  EXPECT_EQ(b.depth, 4u);
  EXPECT_EQ(b.values, a.values);

  a.values.pop_back();
  EXPECT_EQ(code_of([&] { write_complex_array(dir_ / "bad", a); }), ErrorCode::DimensionMismatch);
}

TEST_F(ArchiveTest, MatrixLayoutIsRowMajor) {
  CMatrix m(2, 2);
  m << Complex(1, 2), Complex(3, 4), Complex(5, 6), Complex(7, 8);
  write_matrix(dir_ / "m", m);
  std::ifstream in(dir_ / "m", std::ios::binary);
  char magic[4];
  std::uint32_t dims[3];
  double payload[8];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  in.read(reinterpret_cast<char*>(payload), sizeof payload);
  EXPECT_EQ(std::string(magic, 4), "CMPX");
  EXPECT_EQ(dims[0], 2u);
  EXPECT_EQ(dims[1], 2u);
  EXPECT_EQ(dims[2], 1u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(payload[i], i + 1.0);
  EXPECT_EQ(read_matrix(dir_ / "m"), m);
}

TEST_F(ArchiveTest, MaskRoundTripAndMagic) {
  MaskMatrix mask(3, 2);
  mask << 1, 0, 0, 1, 1, 1;
  write_mask(dir_ / "mask", mask);
  EXPECT_EQ(fs::file_size(dir_ / "mask"), 16u + 6u);
  EXPECT_EQ(read_mask(dir_ / "mask"), mask);
  EXPECT_EQ(code_of([&] { read_matrix(dir_ / "mask"); }), ErrorCode::Io);
  EXPECT_EQ(code_of([&] { read_mask(dir_ / "missing"); }), ErrorCode::Io);
}

TEST_F(ArchiveTest, TruncatedFilesAreRejected) {
  std::mt19937_64 rng(91);
  write_matrix(dir_ / "m", testing::random_matrix(rng, 4, 4));
  fs::resize_file(dir_ / "m", 16 + 100);
  EXPECT_EQ(code_of([&] { read_matrix(dir_ / "m"); }), ErrorCode::Io);
  fs::resize_file(dir_ / "m", 10);
  EXPECT_EQ(code_of([&] { read_matrix(dir_ / "m"); }), ErrorCode::Io);
}

TEST_F(ArchiveTest, MetaRoundTrip) {
  const std::map<std::string, std::string> kv{{"alpha", "1.5"}, {"name", "two words"}, {"seed", "7"}};
  write_meta(dir_ / "meta", kv);
  EXPECT_EQ(read_meta(dir_ / "meta"), kv);
  {
    std::ofstream out(dir_ / "meta2");
    out << "# comment\n\n  x =  3 \nbroken line\n";
  }
  EXPECT_EQ(code_of([&] { read_meta(dir_ / "meta2"); }), ErrorCode::Io);
}

TEST_F(ArchiveTest, ProblemRoundTripIsBitExact) {
  SyntheticParams sp;
  sp.image_x = 16;
  sp.image_y = 8;
  sp.frames = 4;
  sp.coils = 3;
  sp.seed = 11;
  auto p = generate_synthetic(sp, PatchGeometry(16, 8, 4, 4));
  p.lambda = 0.123456789012345678;
  save_problem(dir_ / "prob", p);
  const auto q = load_problem(dir_ / "prob");

  ASSERT_NE(q.mri(), nullptr);
  EXPECT_EQ(q.data, p.data);
  ASSERT_TRUE(q.truth.has_value());
  EXPECT_EQ(*q.truth, *p.truth);
  EXPECT_EQ(q.mri()->coils(), p.mri()->coils());
  EXPECT_EQ(q.mri()->masks(), p.mri()->masks());
  EXPECT_EQ(q.lambda, p.lambda);
  EXPECT_EQ(q.params.seed, 11u);
  EXPECT_EQ(q.params.noise_sigma, p.params.noise_sigma);
  EXPECT_EQ(q.geometry.locations().size(), p.geometry.locations().size());
  EXPECT_EQ(q.geometry.shifts().size(), p.geometry.shifts().size());

  const auto unshifted = PatchGeometry::unshifted(16, 8, 4, 4);
  auto p2 = generate_synthetic(sp, unshifted);
  save_problem(dir_ / "prob2", p2);
  EXPECT_EQ(load_problem(dir_ / "prob2").geometry.shifts().size(), 1u);
}

TEST_F(ArchiveTest, ProblemErrors) {
  EXPECT_EQ(code_of([&] { load_problem(dir_ / "nothing"); }), ErrorCode::Io);

  const CMatrix y = CMatrix::Ones(4, 2);
  ReconstructionProblem denoise{std::make_shared<IdentityOperator>(4, 2), y, std::nullopt,
                                PatchGeometry::global(2, 2), std::nullopt, {}};
  EXPECT_EQ(code_of([&] { save_problem(dir_ / "id", denoise); }), ErrorCode::InvalidArgument);

  SyntheticParams sp;
  sp.image_x = 8;
  sp.image_y = 8;
  sp.frames = 4;
  save_problem(dir_ / "p", generate_synthetic(sp, PatchGeometry(8, 8, 4, 4)));
  fs::remove(dir_ / "p" / "kspace");
  EXPECT_EQ(code_of([&] { load_problem(dir_ / "p"); }), ErrorCode::Io);

  save_problem(dir_ / "q", generate_synthetic(sp, PatchGeometry(8, 8, 4, 4)));
  auto meta = read_meta(dir_ / "q" / "meta");
  meta["frames"] = "four";
  write_meta(dir_ / "q" / "meta", meta);
  EXPECT_EQ(code_of([&] { load_problem(dir_ / "q"); }), ErrorCode::Io);
}

}  // namespace
}  // namespace huberlr
