#include <doctest.h>

#include "seeds/error.hpp"
#include "seeds/sae.hpp"
#include "test_support.hpp"

using namespace seeds;
using seeds::testing::error_of;
using seeds::testing::TempDir;

namespace {

std::vector<double> values(const Embedding& e) { return {e.values().begin(), e.values().end()}; }

// Central difference of the oracle loss with respect to one weight entry.
double numeric_grad(const sae::SaeModel& base, const std::function<void(Matrix&, std::vector<double>&, Matrix&,
                                                                         std::vector<double>&, double)>& nudge,
                    const std::vector<double>& a, double h) {
  auto eval = [&](double delta) {
    Matrix we = base.w_enc(), wd = base.w_dec();
    std::vector<double> be(base.b_enc().begin(), base.b_enc().end());
    std::vector<double> bd(base.b_dec().begin(), base.b_dec().end());
    nudge(we, be, wd, bd, delta);
    return testing::oracle::loss(sae::SaeModel(we, be, wd, bd, base.sparsity_coeff()), a);
  };
  return (eval(h) - eval(-h)) / (2 * h);
}

}  // namespace

TEST_CASE("encode, decode and loss agree with the loop oracle") {
  std::mt19937_64 rng(3);
  const auto model = testing::random_sae(rng, 6, 14, 0.2);
  for (int t = 0; t < 50; ++t) {
    const auto a = testing::random_vector(rng, 6);
    const auto h = sae::encode(model, Embedding(a));
    const auto expected_h = testing::oracle::encode(model, a);
    for (std::size_t j = 0; j < model.m(); ++j) CHECK(h[j] == doctest::Approx(expected_h[j]).epsilon(1e-12));
    const auto r = values(sae::decode(model, h));
    const auto expected_r = testing::oracle::decode(model, expected_h);
    for (std::size_t i = 0; i < model.n(); ++i) CHECK(r[i] == doctest::Approx(expected_r[i]).epsilon(1e-12));
    CHECK(sae::loss(model, Embedding(a)) == doctest::Approx(testing::oracle::loss(model, a)).epsilon(1e-12));
  }
}

TEST_CASE("model construction rejects bad shapes and values") {
  std::mt19937_64 rng(1);
  auto m = [&](std::size_t r, std::size_t c) { return testing::random_matrix(rng, r, c); };
  CHECK(error_of([&] { sae::SaeModel(m(4, 4), std::vector<double>(4), m(4, 4), std::vector<double>(4)); }) ==
        ErrorCode::NotOvercomplete);
  CHECK(error_of([&] { sae::SaeModel(m(8, 4), std::vector<double>(7), m(4, 8), std::vector<double>(4)); }) ==
        ErrorCode::ShapeMismatch);
  CHECK(error_of([&] { sae::SaeModel(m(8, 4), std::vector<double>(8), m(4, 8), std::vector<double>(4), -1.0); }) ==
        ErrorCode::InvalidModel);
  CHECK(error_of([&] { sae::SaeModel(m(8, 4), std::vector<double>(8), Matrix(4, 8), std::vector<double>(4)); }) ==
        ErrorCode::InvalidModel);
  const auto model = testing::random_sae(rng, 4, 8, 0.1);
  CHECK(error_of([&] { sae::encode(model, Embedding::zeros(5)); }) == ErrorCode::DimMismatch);
  CHECK(error_of([&] { sae::mean_loss(model, {}); }) == ErrorCode::EmptyData);
}

TEST_CASE("weights round trip and missing tensors are reported by name") {
  TempDir dir;
  std::mt19937_64 rng(5);
  const auto model = testing::random_sae(rng, 4, 8, 0.25);
  sae::save_sae(dir / "w.bin", model);
  const auto back = sae::load_sae(dir / "w.bin");
  CHECK(back.m() == 8);
  CHECK(back.n() == 4);
  CHECK(back.sparsity_coeff() == doctest::Approx(0.25));
  // Stored as float32, so compare at single precision.
  for (std::size_t k = 0; k < model.w_enc().data().size(); ++k)
    CHECK(back.w_enc().data()[k] == doctest::Approx(model.w_enc().data()[k]).epsilon(1e-6));

  TensorFile f = read_tensor_file(dir / "w.bin");
  TensorFile partial;
  partial.header_m = f.header_m;
  partial.header_n = f.header_n;
  for (const auto& name : f.order)
    if (name != "b_dec") partial.add(name, f.tensors.at(name).shape, f.tensors.at(name).data);
  write_tensor_file(dir / "partial.bin", partial);
  try {
    sae::load_sae(dir / "partial.bin");
    FAIL("expected MissingTensor");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingTensor);
    CHECK(std::string(e.what()).find("b_dec") != std::string::npos);
  }
}

TEST_CASE("top_k keeps strictly positive features, largest first, ties to the lower index") {
  std::mt19937_64 rng(2);
  const auto model = testing::random_sae(rng, 3, 6, 0.0);
  const SparseActivation h({0.5, 0.0, 2.0, 0.5, 1.0, 0.0});
  const auto atoms = sae::top_k_atoms(model, h, 6);
  REQUIRE(atoms.size() == 4);
  CHECK(atoms[0].index == 2);
  CHECK(atoms[1].index == 4);
  CHECK(atoms[2].index == 0);
  CHECK(atoms[3].index == 3);
  CHECK(atoms[0].direction == model.atom(2));
  CHECK(sae::top_k_atoms(model, h, 2).size() == 2);
  CHECK(error_of([&] { sae::top_k_atoms(model, SparseActivation(std::vector<double>(6, 0.0)), 3); }) ==
        ErrorCode::NoActiveFeatures);
  CHECK(error_of([&] { sae::top_k_atoms(model, h, 0); }) == ErrorCode::PreconditionViolated);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(11);
  const auto model = testing::random_sae(rng, 5, 9, 0.3);
  const auto a = testing::random_vector(rng, 5);
  const auto g = sae::loss_gradient(model, Embedding(a));
  const double h = 1e-5;
  auto close = [](double analytic, double numeric) {
    return std::fabs(analytic - numeric) <= 1e-4 * std::max(1.0, std::fabs(numeric));
  };
  for (std::size_t r = 0; r < model.m(); ++r)
    for (std::size_t c = 0; c < model.n(); ++c) {
      const double num = numeric_grad(
          model, [&](Matrix& we, auto&, Matrix&, auto&, double d) { we(r, c) += d; }, a, h);
      CHECK(close(g.w_enc(r, c), num));
    }
  for (std::size_t r = 0; r < model.n(); ++r)
    for (std::size_t c = 0; c < model.m(); ++c) {
      const double num = numeric_grad(
          model, [&](Matrix&, auto&, Matrix& wd, auto&, double d) { wd(r, c) += d; }, a, h);
      CHECK(close(g.w_dec(r, c), num));
    }
  for (std::size_t j = 0; j < model.m(); ++j) {
    const double num = numeric_grad(
        model, [&](Matrix&, std::vector<double>& be, Matrix&, auto&, double d) { be[j] += d; }, a, h);
    CHECK(close(g.b_enc[j], num));
  }
  for (std::size_t i = 0; i < model.n(); ++i) {
    const double num = numeric_grad(
        model, [&](Matrix&, auto&, Matrix&, std::vector<double>& bd, double d) { bd[i] += d; }, a, h);
    CHECK(close(g.b_dec[i], num));
  }
}

TEST_CASE("toy training is reproducible and lowers the loss") {
  const auto ds = sae::make_sparse_dataset(4, 8, 256, 2, 9);
  const auto init = sae::init_toy_sae(4, 8, 0.03, 1);
  const auto a = sae::train_toy_sae(ds.samples, 8, 0.03, 300, 1);
  const auto b = sae::train_toy_sae(ds.samples, 8, 0.03, 300, 1);
  CHECK(a == b);
  CHECK(sae::mean_loss(a, ds.samples) < sae::mean_loss(init, ds.samples));
  for (std::size_t j = 0; j < a.m(); ++j) CHECK(a.atom(j).norm() == doctest::Approx(1.0));
  CHECK(error_of([&] { sae::train_toy_sae({}, 8, 0.03, 10, 1); }) == ErrorCode::EmptyData);
}
