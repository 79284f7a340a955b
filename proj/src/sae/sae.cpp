#include "seeds/sae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "seeds/error.hpp"
#include "seeds/kernels.hpp"

namespace seeds::sae {

namespace {

std::string shape_str(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

SaeModel::SaeModel(Matrix w_enc, std::vector<double> b_enc, Matrix w_dec, std::vector<double> b_dec,
                   double sparsity_coeff, Activation activation)
    : w_enc_(std::move(w_enc)),
      b_enc_(std::move(b_enc)),
      w_dec_(std::move(w_dec)),
      b_dec_(std::move(b_dec)),
      sparsity_coeff_(sparsity_coeff),
      activation_(activation) {
  const std::size_t m = w_enc_.rows();
  const std::size_t n = w_enc_.cols();
  require(m > 0 && n > 0, ErrorCode::ShapeMismatch, "empty encoder");
  require(b_enc_.size() == m, ErrorCode::ShapeMismatch, "b_enc length " + std::to_string(b_enc_.size()) + " != m " + std::to_string(m));
  require(w_dec_.rows() == n && w_dec_.cols() == m, ErrorCode::ShapeMismatch,
          "w_dec is " + shape_str(w_dec_.rows(), w_dec_.cols()) + ", expected " + shape_str(n, m));
  require(b_dec_.size() == n, ErrorCode::ShapeMismatch, "b_dec length " + std::to_string(b_dec_.size()) + " != n " + std::to_string(n));
  require(m > n, ErrorCode::NotOvercomplete, "m = " + std::to_string(m) + " must exceed n = " + std::to_string(n));
  require(std::isfinite(sparsity_coeff_) && sparsity_coeff_ >= 0.0, ErrorCode::InvalidModel,
          "sparsity coefficient must be finite and nonnegative");

  const auto all_finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  require(all_finite(w_enc_.data()) && all_finite(b_enc_) && all_finite(b_dec_), ErrorCode::InvalidModel,
          "non-finite weight");
  for (std::size_t j = 0; j < m; ++j) {
    bool nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = w_dec_(i, j);
      require(std::isfinite(v), ErrorCode::InvalidModel, "non-finite entry in w_dec column " + std::to_string(j));
      nonzero = nonzero || v != 0.0;
    }
    require(nonzero, ErrorCode::InvalidModel, "w_dec column " + std::to_string(j) + " is all zero");
  }
}

Embedding SaeModel::atom(std::size_t j) const {
  require(j < m(), ErrorCode::IndexOutOfRange, "atom index " + std::to_string(j) + " >= m");
  return Embedding(w_dec_.column(j));
}

// ---------------------------------------------------------------------------

SaeModel load_sae(const std::filesystem::path& weights_path) {
  const TensorFile file = read_tensor_file(weights_path);
  for (const char* name : {"w_enc", "b_enc", "w_dec", "b_dec"})
    require(file.find(name) != nullptr, ErrorCode::MissingTensor, std::string("missing tensor '") + name + "'");

  const NamedTensor& w_enc = *file.find("w_enc");
  const NamedTensor& b_enc = *file.find("b_enc");
  const NamedTensor& w_dec = *file.find("w_dec");
  const NamedTensor& b_dec = *file.find("b_dec");
  require(w_enc.shape.size() == 2 && w_dec.shape.size() == 2, ErrorCode::ShapeMismatch, "weight matrices must be rank 2");
  require(b_enc.shape.size() == 1 && b_dec.shape.size() == 1, ErrorCode::ShapeMismatch, "biases must be rank 1");

  const std::size_t m = w_enc.shape[0];
  const std::size_t n = w_enc.shape[1];
  require(w_dec.shape[0] == n && w_dec.shape[1] == m, ErrorCode::ShapeMismatch,
          "w_enc is " + shape_str(m, n) + " but w_dec is " + shape_str(w_dec.shape[0], w_dec.shape[1]));
  require(b_enc.shape[0] == m && b_dec.shape[0] == n, ErrorCode::ShapeMismatch, "bias lengths disagree with weights");
  require(file.header_m == m && file.header_n == n, ErrorCode::ShapeMismatch,
          "header declares " + shape_str(file.header_m, file.header_n) + " but tensors are " + shape_str(m, n));

  const auto widen = [](const NamedTensor& t) { return std::vector<double>(t.data.begin(), t.data.end()); };
  double coeff = 0.0;
  if (auto it = file.attrs.find("sparsity_coeff"); it != file.attrs.end()) coeff = std::stod(it->second);
  if (auto it = file.attrs.find("activation"); it != file.attrs.end())
    require(it->second == "relu", ErrorCode::InvalidModel, "unsupported activation '" + it->second + "'");

  return SaeModel(Matrix(m, n, widen(w_enc)), widen(b_enc), Matrix(n, m, widen(w_dec)), widen(b_dec), coeff);
}

void save_sae(const std::filesystem::path& weights_path, const SaeModel& model) {
  const auto narrow = [](std::span<const double> v) { return std::vector<float>(v.begin(), v.end()); };
  TensorFile file;
  file.header_m = model.m();
  file.header_n = model.n();
  file.add("w_enc", {model.m(), model.n()}, narrow(model.w_enc().data()));
  file.add("b_enc", {model.m()}, narrow(model.b_enc()));
  file.add("w_dec", {model.n(), model.m()}, narrow(model.w_dec().data()));
  file.add("b_dec", {model.n()}, narrow(model.b_dec()));
  std::ostringstream coeff;
  coeff.precision(17);
  coeff << model.sparsity_coeff();
  file.attrs["sparsity_coeff"] = coeff.str();
  file.attrs["activation"] = "relu";
  write_tensor_file(weights_path, file);
}

// ---------------------------------------------------------------------------

SparseActivation encode(const SaeModel& model, const Embedding& a) {
  require(a.dim() == model.n(), ErrorCode::DimMismatch,
          "embedding dim " + std::to_string(a.dim()) + " != model n " + std::to_string(model.n()));
  std::vector<double> h(model.m());
  kernels::parallel::affine(model.w_enc(), a.values(), model.b_enc(), h);
  for (double& v : h) v = std::max(v, 0.0);
  return SparseActivation(std::move(h));
}

Embedding decode(const SaeModel& model, const SparseActivation& h) {
  require(h.size() == model.m(), ErrorCode::DimMismatch,
          "activation length " + std::to_string(h.size()) + " != model m " + std::to_string(model.m()));
  std::vector<double> out(model.n());
  kernels::parallel::affine(model.w_dec(), h.values(), model.b_dec(), out);
  return Embedding(std::move(out));
}

double loss(const SaeModel& model, const Embedding& a) {
  const SparseActivation h = encode(model, a);
  const Embedding recon = decode(model, h);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - recon[i];
    sq += d * d;
  }
  const auto hv = h.values();
  const double l1 = std::accumulate(hv.begin(), hv.end(), 0.0);
  return sq + model.sparsity_coeff() * l1;
}

double mean_loss(const SaeModel& model, std::span<const Embedding> data) {
  require(!data.empty(), ErrorCode::EmptyData, "mean_loss over empty data");
  double total = 0.0;
  for (const auto& a : data) total += loss(model, a);
  return total / static_cast<double>(data.size());
}

std::vector<Atom> top_k_atoms(const SaeModel& model, const SparseActivation& h, std::size_t k) {
  require(h.size() == model.m(), ErrorCode::DimMismatch, "activation length != model m");
  require(k >= 1 && k <= model.m(), ErrorCode::PreconditionViolated,
          "k = " + std::to_string(k) + " must be in [1, m = " + std::to_string(model.m()) + "]");
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < h.size(); ++j)
    if (h[j] > 0.0) active.push_back(j);
  require(!active.empty(), ErrorCode::NoActiveFeatures, "no strictly positive activation");

  const auto by_activation = [&](std::size_t x, std::size_t y) { return h[x] > h[y] || (h[x] == h[y] && x < y); };
  const std::size_t keep = std::min(k, active.size());
  std::partial_sort(active.begin(), active.begin() + static_cast<std::ptrdiff_t>(keep), active.end(), by_activation);

  std::vector<Atom> atoms;
  atoms.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) atoms.push_back({active[i], h[active[i]], model.atom(active[i])});
  return atoms;
}

// ---------------------------------------------------------------------------

Gradient loss_gradient(const SaeModel& model, const Embedding& a) {
  require(a.dim() == model.n(), ErrorCode::DimMismatch, "embedding dim != model n");
  const std::size_t m = model.m();
  const std::size_t n = model.n();

  std::vector<double> pre(m);
  kernels::serial::affine(model.w_enc(), a.values(), model.b_enc(), pre);
  std::vector<double> h(m);
  for (std::size_t j = 0; j < m; ++j) h[j] = std::max(pre[j], 0.0);
  std::vector<double> recon(n);
  kernels::serial::affine(model.w_dec(), h, model.b_dec(), recon);

  // d/d(a_hat) of ||a - a_hat||^2
  std::vector<double> d_recon(n);
  for (std::size_t i = 0; i < n; ++i) d_recon[i] = 2.0 * (recon[i] - a[i]);

  Gradient g{Matrix(m, n), std::vector<double>(m, 0.0), Matrix(n, m), d_recon};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) g.w_dec(i, j) = d_recon[i] * h[j];

  for (std::size_t j = 0; j < m; ++j) {
    if (pre[j] <= 0.0) continue;  // relu gate closed
    double d_h = model.sparsity_coeff();
    for (std::size_t i = 0; i < n; ++i) d_h += model.w_dec()(i, j) * d_recon[i];
    g.b_enc[j] = d_h;
    for (std::size_t i = 0; i < n; ++i) g.w_enc(j, i) = d_h * a[i];
  }
  return g;
}

SaeModel init_toy_sae(std::size_t n, std::size_t m, double sparsity_coeff, std::uint64_t rng_seed) {
  require(n > 0, ErrorCode::PreconditionViolated, "n must be positive");
  require(m > n, ErrorCode::NotOvercomplete, "m = " + std::to_string(m) + " must exceed n = " + std::to_string(n));
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  Matrix w_enc(m, n);
  for (double& v : w_enc.data()) v = normal(rng) * scale;
  Matrix w_dec(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += w_enc(j, i) * w_enc(j, i);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) w_dec(i, j) = norm > 0.0 ? w_enc(j, i) / norm : (i == j % n ? 1.0 : 0.0);
  }
  return SaeModel(std::move(w_enc), std::vector<double>(m, 0.0), std::move(w_dec), std::vector<double>(n, 0.0),
                  sparsity_coeff);
}

SaeModel train_toy_sae(std::span<const Embedding> data, std::size_t m, double sparsity_coeff, std::size_t steps,
                       std::uint64_t rng_seed, const ToyTrainOptions& options) {
  require(!data.empty(), ErrorCode::EmptyData, "no training data");
  const std::size_t n = data.front().dim();
  for (const auto& a : data) require(a.dim() == n, ErrorCode::DimMismatch, "training embeddings differ in dim");
  require(m > n, ErrorCode::NotOvercomplete, "m = " + std::to_string(m) + " must exceed n = " + std::to_string(n));
  require(options.batch_size >= 1 && options.learning_rate > 0.0, ErrorCode::PreconditionViolated,
          "batch size and learning rate must be positive");

  const SaeModel initial = init_toy_sae(n, m, sparsity_coeff, rng_seed);
  if (steps == 0) return initial;

  Matrix w_enc = initial.w_enc();
  std::vector<double> b_enc(initial.b_enc().begin(), initial.b_enc().end());
  Matrix w_dec = initial.w_dec();
  std::vector<double> b_dec(initial.b_dec().begin(), initial.b_dec().end());

  // Separate stream for sample order so the init does not depend on `steps`.
  std::mt19937_64 order_rng(rng_seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  const double lr = options.learning_rate / static_cast<double>(options.batch_size);

  for (std::size_t step = 0; step < steps; ++step) {
    const SaeModel current(w_enc, b_enc, w_dec, b_dec, sparsity_coeff);
    Gradient acc{Matrix(m, n), std::vector<double>(m, 0.0), Matrix(n, m), std::vector<double>(n, 0.0)};
    for (std::size_t b = 0; b < options.batch_size; ++b) {
      const Gradient g = loss_gradient(current, data[pick(order_rng)]);
      for (std::size_t i = 0; i < acc.w_enc.data().size(); ++i) acc.w_enc.data()[i] += g.w_enc.data()[i];
      for (std::size_t i = 0; i < acc.w_dec.data().size(); ++i) acc.w_dec.data()[i] += g.w_dec.data()[i];
      for (std::size_t j = 0; j < m; ++j) acc.b_enc[j] += g.b_enc[j];
      for (std::size_t i = 0; i < n; ++i) acc.b_dec[i] += g.b_dec[i];
    }
    for (std::size_t i = 0; i < w_enc.data().size(); ++i) w_enc.data()[i] -= lr * acc.w_enc.data()[i];
    for (std::size_t i = 0; i < w_dec.data().size(); ++i) w_dec.data()[i] -= lr * acc.w_dec.data()[i];
    for (std::size_t j = 0; j < m; ++j) b_enc[j] -= lr * acc.b_enc[j];
    for (std::size_t i = 0; i < n; ++i) b_dec[i] -= lr * acc.b_dec[i];

    for (std::size_t j = 0; j < m; ++j) {
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) norm += w_dec(i, j) * w_dec(i, j);
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (std::size_t i = 0; i < n; ++i) w_dec(i, j) /= norm;
    }
  }

  SaeModel trained(std::move(w_enc), std::move(b_enc), std::move(w_dec), std::move(b_dec), sparsity_coeff);
  if (mean_loss(trained, data) > mean_loss(initial, data)) return initial;
  return trained;
}

SparseDataset make_sparse_dataset(std::size_t n, std::size_t n_atoms, std::size_t n_samples, std::size_t active,
                                  std::uint64_t rng_seed) {
  require(n >= 1 && active >= 1 && active <= n_atoms, ErrorCode::PreconditionViolated,
          "need 1 <= active <= n_atoms and n >= 1");
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> coeff(0.5, 1.5);
  SparseDataset out;
  for (std::size_t a = 0; a < n_atoms; ++a) {
    std::vector<double> v(n);
    double sq = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      sq += x * x;
    }
    for (auto& x : v) x /= std::sqrt(sq);
    out.atoms.emplace_back(std::move(v));
  }
  std::vector<std::size_t> ids(n_atoms);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 0; k < active; ++k) {
      // Partial Fisher-Yates: ids[k] becomes a fresh atom.
      std::uniform_int_distribution<std::size_t> pick(k, n_atoms - 1);
      std::swap(ids[k], ids[pick(rng)]);
      const double c = coeff(rng);
      for (std::size_t d = 0; d < n; ++d) v[d] += c * out.atoms[ids[k]][d];
    }
    out.samples.emplace_back(std::move(v));
  }
  return out;
}

double best_atom_match(const SaeModel& model, std::size_t j, std::span<const Embedding> atoms) {
  const Embedding col = model.atom(j);
  double best = 0.0;
  for (const auto& a : atoms) best = std::max(best, std::fabs(dot(col, a)) / (col.norm() * a.norm()));
  return best;
}

}  // namespace seeds::sae
