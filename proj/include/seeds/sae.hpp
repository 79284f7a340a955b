#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "seeds/tensor.hpp"

namespace seeds::sae {

enum class Activation { relu };

// Single-layer sparse autoencoder over embedding vectors:
//   h = relu(w_enc a + b_enc),  a_hat = w_dec h + b_dec
// with w_enc m x n, w_dec n x m and m > n.
class SaeModel {
 public:
  SaeModel(Matrix w_enc, std::vector<double> b_enc, Matrix w_dec, std::vector<double> b_dec,
           double sparsity_coeff = 0.0, Activation activation = Activation::relu);

  std::size_t m() const noexcept { return w_enc_.rows(); }
  std::size_t n() const noexcept { return w_enc_.cols(); }

  const Matrix& w_enc() const noexcept { return w_enc_; }
  const Matrix& w_dec() const noexcept { return w_dec_; }
  std::span<const double> b_enc() const noexcept { return b_enc_; }
  std::span<const double> b_dec() const noexcept { return b_dec_; }
  double sparsity_coeff() const noexcept { return sparsity_coeff_; }
  Activation activation() const noexcept { return activation_; }

  // Column j of w_dec: the feature direction, without decoder bias.
  Embedding atom(std::size_t j) const;

  bool operator==(const SaeModel&) const = default;

 private:
  Matrix w_enc_;
  std::vector<double> b_enc_;
  Matrix w_dec_;
  std::vector<double> b_dec_;
  double sparsity_coeff_;
  Activation activation_;
};

SaeModel load_sae(const std::filesystem::path& weights_path);
void save_sae(const std::filesystem::path& weights_path, const SaeModel& model);

SparseActivation encode(const SaeModel& model, const Embedding& a);
Embedding decode(const SaeModel& model, const SparseActivation& h);

// ||a - decode(encode(a))||^2 + sparsity_coeff * ||encode(a)||_1
double loss(const SaeModel& model, const Embedding& a);
double mean_loss(const SaeModel& model, std::span<const Embedding> data);

struct Atom {
  std::size_t index;
  double activation;
  Embedding direction;
};

// Up to k strictly positive features, largest activation first, ties to the
// lower index. Throws NoActiveFeatures when h has no positive entry.
std::vector<Atom> top_k_atoms(const SaeModel& model, const SparseActivation& h, std::size_t k);

// Gradient of `loss` for a single input, same layout as the model weights.
struct Gradient {
  Matrix w_enc;
  std::vector<double> b_enc;
  Matrix w_dec;
  std::vector<double> b_dec;
};

Gradient loss_gradient(const SaeModel& model, const Embedding& a);

struct ToyTrainOptions {
  double learning_rate = 0.1;
  std::size_t batch_size = 8;
};

// Seeded initial model: Gaussian encoder scaled by 1/sqrt(n), decoder set to
// the unit-normalised encoder transpose, zero biases.
SaeModel init_toy_sae(std::size_t n, std::size_t m, double sparsity_coeff, std::uint64_t rng_seed);

// Minibatch SGD from init_toy_sae(...); decoder columns are renormalised to
// unit length after every step. Single-threaded so the result is
// bitwise-reproducible for a given seed.
SaeModel train_toy_sae(std::span<const Embedding> data, std::size_t m, double sparsity_coeff, std::size_t steps,
                       std::uint64_t rng_seed, const ToyTrainOptions& options = {});

// Samples that are non-negative combinations of `active` distinct unit
// atoms with coefficients in [0.5, 1.5). Used to check that training
// recovers a known dictionary.
struct SparseDataset {
  std::vector<Embedding> atoms;
  std::vector<Embedding> samples;
};

SparseDataset make_sparse_dataset(std::size_t n, std::size_t n_atoms, std::size_t n_samples, std::size_t active,
                                  std::uint64_t rng_seed);

// Largest |cosine| between decoder column j and any of `atoms`.
double best_atom_match(const SaeModel& model, std::size_t j, std::span<const Embedding> atoms);

}  // namespace seeds::sae
