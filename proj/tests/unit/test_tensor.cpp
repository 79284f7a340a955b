#include <doctest.h>

#include <fstream>

#include "seeds/error.hpp"
#include "seeds/tensor.hpp"
#include "test_support.hpp"

using namespace seeds;
using seeds::testing::TempDir;

using seeds::testing::error_of;

TEST_CASE("embedding arithmetic") {
  const Embedding a({1.0, 2.0, 2.0});
  const Embedding b({0.5, -1.0, 0.0});
  CHECK(a.norm() == doctest::Approx(3.0));
  CHECK((a + b) == Embedding({1.5, 1.0, 2.0}));
  CHECK((a - b) == Embedding({0.5, 3.0, 2.0}));
  CHECK((2.0 * b) == Embedding({1.0, -2.0, 0.0}));
  CHECK(dot(a, b) == doctest::Approx(-1.5));
  CHECK(error_of([&] { (void)(a + Embedding({1.0})); }) == ErrorCode::DimMismatch);
  CHECK(error_of([] { Embedding({std::nan("")}); }) == ErrorCode::PreconditionViolated);
}

TEST_CASE("sparse activations are non-negative") {
  CHECK(SparseActivation({0.0, 2.0, 0.0, 1.0}).nnz() == 2);
  CHECK(error_of([] { SparseActivation({0.0, -1.0}); }) == ErrorCode::PreconditionViolated);
}

TEST_CASE("tensor file round trip keeps order, shapes, attrs and float32 values") {
  TempDir dir;
  TensorFile f;
  f.header_m = 3;
  f.header_n = 2;
  f.add("w", {3, 2}, {1.5f, -2.0f, 0.25f, 4.0f, 5.0f, -6.0f});
  f.add("b", {3}, {0.1f, 0.2f, 0.3f});
  f.attrs["note"] = "x";
  write_tensor_file(dir / "t.bin", f);
  const TensorFile g = read_tensor_file(dir / "t.bin");
  CHECK(g.header_m == 3);
  CHECK(g.order == std::vector<std::string>{"w", "b"});
  CHECK(g.find("w")->shape == std::vector<std::size_t>{3, 2});
  CHECK(g.find("w")->data == f.find("w")->data);
  CHECK(g.find("b")->data == f.find("b")->data);
  CHECK(g.attrs.at("note") == "x");
  CHECK(g.find("missing") == nullptr);
}

TEST_CASE("truncated or malformed tensor files are Io errors") {
  TempDir dir;
  TensorFile f;
  f.header_m = 1;
  f.header_n = 1;
  f.add("w", {4}, {1, 2, 3, 4});
  write_tensor_file(dir / "t.bin", f);
  const auto size = std::filesystem::file_size(dir / "t.bin");
  std::filesystem::resize_file(dir / "t.bin", size - 3);
  CHECK(error_of([&] { read_tensor_file(dir / "t.bin"); }) == ErrorCode::Io);

  std::ofstream(dir / "bad.bin") << "NOTSAE 1 2\n";
  CHECK(error_of([&] { read_tensor_file(dir / "bad.bin"); }) == ErrorCode::Io);
  CHECK(error_of([&] { read_tensor_file(dir / "absent.bin"); }) == ErrorCode::Io);
}

TEST_CASE("embedding files round trip through float32") {
  TempDir dir;
  const Embedding e({0.5, -0.25, 3.0});
  save_embedding(dir / "e.bin", e);
  CHECK(load_embedding(dir / "e.bin") == e);
}
